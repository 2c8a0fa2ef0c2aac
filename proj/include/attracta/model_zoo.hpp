#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "attracta/certifier.hpp"
#include "attracta/system.hpp"

namespace attracta {

using DelayGrid = std::vector<std::vector<DelayDistribution>>;

/// s x s grid holding the same distribution everywhere.
DelayGrid uniform_grid(std::size_t s, const DelayDistribution& dist);

struct Activation {
    std::function<double(double)> fn;
    double lipschitz = 1.0;
    std::string label;

    static Activation identity();
    static Activation tanh();
};

struct PlanarMaps {
    std::function<double(double)> f1;  // x-equation, reads y
    std::function<double(double)> f2;  // y-equation, reads x
};

/// A system together with whatever the certifier needs to reason about it.
struct ModelBuild {
    ModelBuild(std::string name, DelaySystem sys, Vector z)
        : model(std::move(name)), system(std::move(sys)), equilibrium(std::move(z)) {}

    std::string model;
    DelaySystem system;
    Vector equilibrium;
    /// False for systems whose attractivity is an open question.
    bool certifiable = true;
    std::optional<LipschitzData> lipschitz;
    std::optional<PlanarMaps> planar;
    std::optional<NicholsonParams> nicholson;
    std::vector<std::string> notes;
};

/// x_i' = -b_i x_i + sum_j c_ij act_j(x_j(delayed)), written with g_i = b_i.
ModelBuild build_hopfield(const Vector& b, const Matrix& C, const std::vector<Activation>& act,
                          const DelayGrid& delays);

/// f_i(x) = (sum_j alpha_ij x_j)^{1/(2 k_i)} with row-stochastic alpha.
ModelBuild build_bam_root(const Matrix& alpha, const std::vector<int>& k, const DelayGrid& delays,
                          std::vector<Rate> rates = {});

/// Undelayed coupling a_ij x_j(t) plus a delayed self term beta_i x e^{-x}.
ModelBuild build_nicholson(const NicholsonParams& params);

/// "sqrt_pair": f1(y) = sqrt y, f2(x) = sqrt x; "power_pair": f1(y) = y^2,
/// f2(x) = x^{1/4}. `d1` delays y in the first equation, `d2` delays x in
/// the second.
ModelBuild build_pair_example(const std::string& name, const DelayDistribution& d1,
                              const DelayDistribution& d2, std::vector<Rate> rates = {});

struct PatchParams {
    std::vector<Rate> rates;
    Matrix a;
    Vector beta;
    /// Carrying capacities (logistic, Ricker).
    Vector K;
    /// Mackey-Glass exponent.
    double n = 2.0;
    std::vector<DelayDistribution> self_delay;
};

/// "logistic_patch", "mackey_glass_patch" or "ricker_patch". Simulation only.
ModelBuild build_section5(const std::string& name, const PatchParams& params);

/// Dispatches on the model's structure: Nicholson, planar, or M-matrix.
/// Throws UnsupportedModel for non-certifiable builds.
Certificate certify_model(const ModelBuild& build, const std::string& method = "auto",
                          const CertifyOptions& opts = {});

}  // namespace attracta
