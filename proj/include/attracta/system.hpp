#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "attracta/box.hpp"
#include "attracta/delay_distribution.hpp"

namespace attracta {

/// Nonnegative rate g_i(t) with divergent integral over [0, inf).
class Rate {
public:
    static Rate constant(double value);
    /// c * (1.1 + sin t): bounded, bounded away from zero, non-autonomous.
    static Rate oscillatory(double c);
    /// User rate. Divergence of its integral is declared, not checked.
    static Rate function(std::function<double(double)> g, std::string label);

    double operator()(double t) const { return g_(t); }
    /// Positive lower bound when known in closed form (constants, presets).
    std::optional<double> lower_bound() const { return lower_bound_; }
    const std::string& label() const { return label_; }

private:
    Rate(std::function<double(double)> g, std::optional<double> lb, std::string label)
        : g_(std::move(g)), lower_bound_(lb), label_(std::move(label)) {}

    std::function<double(double)> g_;
    std::optional<double> lower_bound_;
    std::string label_;
};

/// F = (f_1, ..., f_s) evaluated component-wise, with an optional
/// dependency pattern: depends(i, j) == false promises that f_i ignores x_j.
class Nonlinearity {
public:
    using Component = std::function<double(std::size_t i, std::span<const double> x)>;

    Nonlinearity() = default;
    Nonlinearity(std::size_t dim, Component f, std::vector<std::vector<bool>> depends = {});

    std::size_t dim() const { return dim_; }
    double component(std::size_t i, std::span<const double> x) const { return f_(i, x); }
    Vector operator()(std::span<const double> x) const;
    bool depends(std::size_t i, std::size_t j) const {
        return depends_.empty() || depends_[i][j];
    }

private:
    std::size_t dim_ = 0;
    Component f_;
    std::vector<std::vector<bool>> depends_;
};

/// Initial function on [t_min, t0], continued constantly to the left of t_min.
class HistoryFunction {
public:
    using Fn = std::function<double(std::size_t j, double t)>;

    static HistoryFunction constant(Vector values, double t0 = 0.0);
    /// Piecewise-linear through the samples; t0 is the last sample time.
    static HistoryFunction table(std::vector<double> times, std::vector<Vector> values);
    static HistoryFunction from_function(std::size_t dim, double t_min, double t0, Fn fn,
                                         std::vector<double> knots = {});

    std::size_t dim() const { return dim_; }
    double t0() const { return t0_; }
    double t_min() const { return t_min_; }
    double value(std::size_t j, double t) const;
    Vector at(double t) const;
    /// Interior break points of the history (table samples).
    std::span<const double> knots() const { return knots_; }
    /// Value of component j when it is known to be constant, else nullopt.
    std::optional<double> constant_value(std::size_t j) const;

private:
    HistoryFunction() = default;

    std::size_t dim_ = 0;
    double t_min_ = 0.0;
    double t0_ = 0.0;
    Fn fn_;
    std::vector<double> knots_;
    std::vector<std::optional<double>> constant_;
};

/// dx_i/dt = g_i(t) [ integral of f_i(X(tau)) against R_i(t, .) - x_i(t) ].
///
/// By default row i integrates f_i against the product of the per-coordinate
/// measures R_ij (the iterated form). A row may instead be "shared": all
/// coordinates are read at a common tau drawn from one measure.
class DelaySystem {
public:
    DelaySystem(std::vector<Rate> rates, Nonlinearity f,
                std::vector<std::vector<DelayDistribution>> distributions, Box domain,
                std::string name = "system");

    /// Makes row i use `dist` for every coordinate at a common tau.
    DelaySystem& share_row(std::size_t i, DelayDistribution dist);

    std::size_t dim() const { return rates_.size(); }
    const std::string& name() const { return name_; }
    const Rate& rate(std::size_t i) const { return rates_[i]; }
    const Nonlinearity& nonlinearity() const { return f_; }
    const DelayDistribution& distribution(std::size_t i, std::size_t j) const {
        return dists_[i][j];
    }
    const std::optional<DelayDistribution>& shared_row(std::size_t i) const { return shared_[i]; }
    const Box& domain() const { return domain_; }

    /// Every lag appearing in a distribution that f actually reads.
    std::vector<Lag> active_lags() const;
    /// Minimum over active distributions of earliest_argument at t.
    double earliest_argument(double t) const;

private:
    std::vector<Rate> rates_;
    Nonlinearity f_;
    std::vector<std::vector<DelayDistribution>> dists_;
    std::vector<std::optional<DelayDistribution>> shared_;
    Box domain_;
    std::string name_;
};

/// Validates the admissibility assumptions on rates, distributions,
/// nonlinearity and history over [t0, t_end]. Throws InvalidConfig,
/// InvalidDistribution or InvalidParameter.
void check_admissible(const DelaySystem& system, const HistoryFunction& history, double t_end);

}  // namespace attracta
