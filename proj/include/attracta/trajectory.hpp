#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "attracta/box.hpp"
#include "attracta/system.hpp"

namespace attracta {

/// Anything that can report the solution x_j(tau) on its stored range.
class SolutionSource {
public:
    virtual ~SolutionSource() = default;
    virtual double value(std::size_t j, double t) const = 0;
    /// Appends the sorted break points lying strictly inside (a, b).
    virtual void knots(double a, double b, std::vector<double>& out) const = 0;
};

/// One accepted Runge-Kutta step with its continuous extension
///   y(t0 + theta h) = r1 + theta (r2 + (1 - theta)(r3 + theta (r4 + (1 - theta) r5))).
struct StepRecord {
    double t_start = 0.0;
    double t_end = 0.0;
    Vector y_start;
    Vector y_end;
    /// r1..r5 laid out coefficient-major: coeffs[r * s + j].
    Vector coeffs;
    double error_estimate = 0.0;

    std::size_t dim() const { return y_start.size(); }
    double eval(std::size_t j, double t) const;
    Vector eval(double t) const;
};

class Trajectory final : public SolutionSource {
public:
    explicit Trajectory(HistoryFunction history) : history_(std::move(history)) {}

    const HistoryFunction& history() const { return history_; }
    const std::vector<StepRecord>& steps() const { return steps_; }
    std::size_t dim() const { return history_.dim(); }
    double t0() const { return history_.t0(); }
    double t_last() const { return steps_.empty() ? t0() : steps_.back().t_end; }
    Vector final_state() const;

    void append(StepRecord step);

    double value(std::size_t j, double t) const override;
    Vector at(double t) const;
    void knots(double a, double b, std::vector<double>& out) const override;

    /// Step ends plus `per_step` interior interpolant points per step,
    /// restricted to t >= from.
    std::vector<std::pair<double, Vector>> samples(int per_step = 10,
                                                   double from = -kInf) const;

private:
    HistoryFunction history_;
    std::vector<StepRecord> steps_;
};

/// Sup over the last `window` time units of ||X(t) - target||_inf <= tol.
bool converged_to(const Trajectory& traj, std::span<const double> target, double tol,
                  double window);

/// Sup-norm distance to target over the last `window` time units.
double final_error(const Trajectory& traj, std::span<const double> target, double window);

/// Earliest sampled time after which the trajectory stays within tol of target.
std::optional<double> time_to_tolerance(const Trajectory& traj, std::span<const double> target,
                                        double tol);

/// CSV with header t,x1,...,xs and 17 significant digits. Rows are the
/// accepted step ends (and t0), or a uniform grid when resample_dt is set.
void write_csv(std::ostream& os, const Trajectory& traj,
               std::optional<double> resample_dt = std::nullopt);

}  // namespace attracta
