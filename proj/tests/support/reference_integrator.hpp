#pragma once

#include <functional>
#include <span>
#include <vector>

// Brute-force solver for systems whose delays are all concentrated at constant
// lags: x_i' = g_i(t) (f_i(x_1(t - tau_i1), ..., x_s(t - tau_is)) - x_i(t)).
// Classical RK4 on a uniform grid; delayed values come from Lagrange
// interpolation on stencils that never straddle a breaking point. Shares no
// code with the library's integrator.
namespace attracta::oracle {

struct ConcentratedSystem {
    std::size_t dim = 0;
    std::function<double(std::size_t i, double t)> rate;
    std::function<double(std::size_t i, std::span<const double> x)> f;
    /// tau[i][j]: lag with which equation i reads coordinate j. Must be
    /// multiples of the grid step.
    std::vector<std::vector<double>> tau;
    std::function<double(std::size_t j, double t)> history;
};

class ReferenceSolution {
public:
    ReferenceSolution(const ConcentratedSystem& sys, double t0, double t_end, double h);

    double t0() const { return t0_; }
    double step() const { return h_; }
    std::size_t size() const { return grid_.size(); }
    double time(std::size_t n) const { return t0_ + static_cast<double>(n) * h_; }
    const std::vector<double>& state(std::size_t n) const { return grid_[n]; }
    /// Solution (or history) at an arbitrary time in range.
    double value(std::size_t j, double t) const;

private:
    const ConcentratedSystem& sys_;
    double t0_;
    double h_;
    std::vector<std::vector<double>> grid_;
    std::vector<double> breaks_;
};

}  // namespace attracta::oracle
