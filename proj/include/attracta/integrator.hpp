#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "attracta/system.hpp"
#include "attracta/trajectory.hpp"

namespace attracta {

struct IntegratorOptions {
    double rtol = 1e-8;
    double atol = 1e-10;
    /// 0 selects an initial step automatically.
    double initial_step = 0.0;
    double max_step = kInf;
    std::size_t max_steps = 2'000'000;
    /// Must match the continuous extension of the Dormand-Prince pair.
    int dense_order = 4;
    bool positivity_clamp = false;
    /// Disables error control and steps with this exact size (except at
    /// mandatory mesh points). Used for order studies.
    std::optional<double> fixed_step;
    /// Depth of the breaking-point tree for constant/proportional lags.
    int breaking_order = 3;
    int max_fixed_point_iterations = 10;

    void validate() const;
};

/// Classical order of the propagated solution of the pair.
inline constexpr int kPairOrder = 5;

/// Right-hand side g_i(t) [E_i - x_i] at state x, where E_i is the
/// distributed evaluation of f_i over the history in `source`. Delayed
/// arguments equal to t read the current state x.
Vector rhs_eval(const DelaySystem& system, double t, std::span<const double> x,
                const SolutionSource& source);

/// Sorted mandatory mesh points in (t0, t_end) generated by propagating the
/// derivative jump at t0 through constant and proportional lags.
std::vector<double> breaking_points(const DelaySystem& system, double t0, double t_end, int order);

/// Method of steps with the Dormand-Prince 5(4) pair and dense output.
Trajectory integrate(const DelaySystem& system, const HistoryFunction& history, double t_end,
                     const IntegratorOptions& opts = {});

}  // namespace attracta
