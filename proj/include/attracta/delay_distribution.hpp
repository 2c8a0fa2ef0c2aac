#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace attracta {

/// A scalar delayed argument t -> h(t) with h(t) <= t.
class Lag {
public:
    enum class Kind { Constant, Proportional, Custom };

    /// h(t) = t - tau, tau >= 0.
    static Lag constant(double tau);
    /// h(t) = rho * t, rho in (0, 1). Meaningful for t >= 0 only.
    static Lag proportional(double rho);
    /// Arbitrary measurable h. Treated as a black box by the integrator.
    static Lag custom(std::function<double(double)> h, std::string label = "custom");

    Kind kind() const { return kind_; }
    /// tau for Constant, rho for Proportional, NaN for Custom.
    double parameter() const { return param_; }

    double argument(double t) const;

    /// Smallest t with h(t) = b, when it can be computed in closed form.
    /// Used to propagate derivative jumps of the solution.
    std::optional<double> preimage(double b) const;

    std::string describe() const;

private:
    Lag(Kind kind, double param, std::function<double(double)> h, std::string label)
        : kind_(kind), param_(param), custom_(std::move(h)), label_(std::move(label)) {}

    Kind kind_;
    double param_;
    std::function<double(double)> custom_;
    std::string label_;
};

struct Atom {
    double weight;
    Lag lag;
};

/// Normalized Stieltjes measure over (h(t), t], one per (i, j) pair of a
/// system. All four variants carry total mass one.
class DelayDistribution {
public:
    struct PointMass {
        Lag lag;
    };
    struct Mixture {
        std::vector<Atom> atoms;
    };
    /// Left-continuous CDF with finitely many jumps; sizes are the atom weights.
    struct StepCdf {
        std::vector<Atom> jumps;
    };
    struct Kernel {
        std::function<double(double t, double tau)> density;
        Lag lower;
        std::string label;
    };
    using Variant = std::variant<PointMass, Mixture, StepCdf, Kernel>;

    static DelayDistribution point_mass(Lag lag);
    /// No delay at all: the point mass at tau = t.
    static DelayDistribution instantaneous();
    static DelayDistribution mixture(std::vector<Atom> atoms);
    static DelayDistribution step_cdf(std::vector<Atom> jumps);
    static DelayDistribution kernel(std::function<double(double, double)> density, Lag lower,
                                    std::string label = "kernel");
    /// Density 1/width on [t - width, t].
    static DelayDistribution uniform(double width);

    const Variant& variant() const { return v_; }
    bool is_kernel() const { return std::holds_alternative<Kernel>(v_); }
    bool is_instantaneous() const;

    /// Lags whose arguments bound the support (atoms, kernel lower limit).
    std::vector<Lag> lags() const;
    std::string describe() const;

private:
    explicit DelayDistribution(Variant v) : v_(std::move(v)) {}
    Variant v_;
};

struct QuadratureNode {
    double tau;
    double weight;
};

struct QuadratureOptions {
    double abs_tol = 1e-10;
    int max_depth = 40;
};

/// Discrete rule representing the measure at time t. Atoms map to nodes
/// one-to-one; kernels are discretized by adaptive Gauss-Legendre on
/// panels split at `knots`. When `probe` is set, the kernel refinement
/// also resolves the product density * probe.
std::vector<QuadratureNode> measure_nodes(const DelayDistribution& dist, double t,
                                          std::span<const double> knots = {},
                                          const std::function<double(double)>& probe = {},
                                          const QuadratureOptions& opts = {});

double total_mass(const DelayDistribution& dist, double t);

/// Integral of u against the measure at time t.
double delayed_functional(const DelayDistribution& dist, double t,
                          const std::function<double(double)>& u,
                          std::span<const double> knots = {}, const QuadratureOptions& opts = {});

/// Infimum of the support at time t.
double earliest_argument(const DelayDistribution& dist, double t);

}  // namespace attracta
