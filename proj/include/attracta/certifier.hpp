#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attracta/box.hpp"
#include "attracta/certificate.hpp"
#include "attracta/system.hpp"

namespace attracta {

using VectorMap = std::function<Vector(std::span<const double>)>;

inline constexpr std::uint64_t kDefaultSeed = 0x5EED;

/// Half-width of the band around rho = 1 in which M-matrix verdicts are
/// withheld.
inline constexpr double kStrictMargin = 1e-9;

struct MMatrixResult {
    bool is_m_matrix = false;
    /// rho too close to 1, or A numerically singular: no verdict either way.
    bool borderline = false;
    /// A^{-1} * 1; present iff is_m_matrix.
    Vector xi;
    /// A^{-1} when A is numerically invertible.
    std::optional<Matrix> inverse;
    /// rho(N)/s for the splitting A = sI - N with N >= 0 (rho(L) for A = I - L).
    double spectral_radius = 0.0;
    std::string note;
};

/// Nonsingular M-matrix test with two independent routes: positivity of
/// A^{-1} (LU) and a power-iteration spectral radius. Throws
/// InternalConsistencyError if they disagree outside the margin band.
MMatrixResult is_m_matrix(const Matrix& A);

/// Spectral radius of a nonnegative matrix by power iteration on N + I,
/// returning the Collatz-Wielandt upper bound at convergence.
double spectral_radius_nonnegative(const Matrix& N);

/// alpha = max_i [ L_ii + sum_{j != i} (xi_j / xi_i) L_ij ].
double contraction_rate(const Matrix& L, std::span<const double> xi);

/// Largest c with the box z +- c xi inside the closure of `domain`;
/// infinite when no face bounds it.
double max_admissible_c(std::span<const double> z, std::span<const double> xi, const Box& domain);

/// I_n = prod_i [z_i - alpha^{n-1} c xi_i, z_i + alpha^{n-1} c xi_i], n >= 1.
/// Throws InvalidParameter when c breaks the boundary rule for `domain`.
Box box_sequence(std::span<const double> z, double c, std::span<const double> xi, double alpha,
                 int n, const Box& domain);
Box box_sequence(std::span<const double> z, double c, std::span<const double> xi, double alpha,
                 int n);

struct BoxCheck {
    bool ok = false;
    /// Smallest signed margin of an image inside `outer`; negative on violation.
    double worst_margin = kInf;
    Vector worst_point;
    std::size_t evaluated = 0;
};

/// Sampling evidence that F(inner) lies in outer: a Latin hypercube of
/// `samples` points plus all corners of `inner`.
BoxCheck verify_box_mapping(const VectorMap& F, const Box& inner, const Box& outer,
                            std::size_t samples, std::uint64_t seed = kDefaultSeed);

/// Solves F(z) = z to 1e-12 in the sup norm. Damped Newton with a
/// finite-difference Jacobian, falling back to fixed-point iteration.
/// Throws NotFound, or DomainExit if the root lies outside `domain`.
Vector find_equilibrium(const VectorMap& F, const Box& domain, std::span<const double> guess);

/// Every column sum of L below one.
bool column_sum_test(const Matrix& L);

struct LipschitzData {
    Matrix L;
    Vector equilibrium;
    /// Open box on which the L bounds hold (may be smaller than the system's).
    Box domain;
    std::vector<std::string> notes;
};

struct CertifyOptions {
    std::uint64_t seed = kDefaultSeed;
    std::size_t samples = 1000;
    /// Number of consecutive box pairs checked by sampling.
    int depth = 8;
    /// sup_t |Phi_i(t) - z_i| per component; sizes I_1 when the domain imposes no bound.
    std::optional<Vector> history_anchor;
};

/// Contraction-box certificate from an M-matrix I - L.
Certificate certify_m_matrix(const Nonlinearity& f, const LipschitzData& lip,
                             const CertifyOptions& opts = {});
Certificate certify_m_matrix(const DelaySystem& system, const LipschitzData& lip,
                             const CertifyOptions& opts = {});

// ---- planar monotone criterion ----

struct PlanarOptions {
    double x_star_hint = 1.0;
    int grid = 200;
    int depth = 64;
    double a11 = 0.1;
    double b11 = 9.0;
};

/// Criterion for x' = g1 (f1(y(h1)) - x), y' = g2 (f2(x(h2)) - y) with
/// increasing f1, f2 vanishing at zero.
Certificate planar_certify(const std::function<double(double)>& f1,
                           const std::function<double(double)>& f2, const PlanarOptions& opts = {});

// ---- Nicholson systems ----

struct NicholsonParams {
    std::vector<Rate> rates;
    /// Coupling a_ij >= 0 with zero diagonal.
    Matrix a;
    Vector beta;
    /// Self-delay distribution per equation.
    std::vector<DelayDistribution> self_delay;

    std::size_t dim() const { return beta.size(); }
    void validate() const;
};

/// max{1 - ln b, b e^-2} on (1, e], b e^-2 on (e, e^2).
double nicholson_alpha(double beta);
/// Eventual lower bound x^0 of solutions: ln b on (1, e), (b^2/e) e^{-b/e} on [e, e^2).
double nicholson_lower_bound(double beta);
/// beta_i / (1 - sum of the off-diagonal couplings in the row). The
/// diagonal entry of `a_row` is zero by convention.
double nicholson_gamma(double beta, std::span<const double> a_row);

/// F_i(x) = sum_{j != i} a_ij x_j + beta_i x_i e^{-x_i}.
VectorMap nicholson_map(const NicholsonParams& params);

Certificate certify_nicholson(const NicholsonParams& params, const CertifyOptions& opts = {});

}  // namespace attracta
