#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "attracta/box.hpp"

namespace attracta {

using Matrix = Eigen::MatrixXd;

enum class Verdict { Certified, NotCertified, Inconclusive };
enum class Method { MMatrix, Planar, Nicholson };

std::string to_string(Verdict v);
std::string to_string(Method m);

/// Sampling evidence for F(I_n) within I_{n+1}. Evidence, not proof.
struct SamplingEvidence {
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    double worst_margin = 0.0;
    bool passed = false;
};

/// Monotone bracketing sequences of the planar criterion.
struct PlanarWitness {
    double x_star = 0.0;
    double y_star = 0.0;
    Vector a1, a2, b1, b2;
};

struct NicholsonWitness {
    Vector beta;
    Vector gamma;
    Vector alpha_i;
    Vector x_lower;
};

/// An inequality lhs < rhs reported for comparison with other criteria.
struct Comparison {
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
};

struct Certificate {
    Verdict verdict = Verdict::Inconclusive;
    Method method = Method::MMatrix;
    Vector equilibrium;
    Vector xi;
    std::optional<double> alpha;
    std::optional<double> c;
    std::optional<Matrix> lipschitz;
    std::vector<Box> boxes;
    std::optional<PlanarWitness> planar;
    std::optional<NicholsonWitness> nicholson;
    std::optional<Comparison> corollary5;
    std::optional<bool> comparison_flower;
    std::optional<Comparison> comparison_abs_nichol2;
    std::optional<SamplingEvidence> sampling;
    /// Validation log: what was checked and how.
    std::vector<std::string> log;
};

/// Canonical JSON form (keys sorted). Absent optional fields are omitted.
nlohmann::json to_json(const Certificate& cert);

}  // namespace attracta
