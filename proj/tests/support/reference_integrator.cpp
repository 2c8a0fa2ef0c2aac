#include "reference_integrator.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace attracta::oracle {

namespace {

constexpr int kStencil = 8;

}  // namespace

ReferenceSolution::ReferenceSolution(const ConcentratedSystem& sys, double t0, double t_end, double h)
    : sys_(sys), t0_(t0), h_(h) {
    const std::size_t s = sys.dim;
    const auto steps = static_cast<std::size_t>(std::llround((t_end - t0) / h));

    // Derivative jumps start at t0 and travel along every positive lag.
    std::set<double> lags;
    for (const auto& row : sys.tau)
        for (double tau : row)
            if (tau > 0.0) lags.insert(tau);
    std::set<double> breaks{t0};
    for (int order = 0; order < 6; ++order) {
        std::set<double> next = breaks;
        for (double b : breaks)
            for (double tau : lags)
                if (b + tau <= t_end) next.insert(b + tau);
        breaks.swap(next);
    }
    breaks_.assign(breaks.begin(), breaks.end());
    breaks_.push_back(t_end + 1.0);

    std::vector<double> x0(s);
    for (std::size_t j = 0; j < s; ++j) x0[j] = sys.history(j, t0);
    grid_.reserve(steps + 1);
    grid_.push_back(x0);

    std::vector<double> arg(s), k1(s), k2(s), k3(s), k4(s), tmp(s);
    // Right-hand side at time t with current state x; delayed reads of the
    // solution at lag zero use x itself.
    auto rhs = [&](double t, const std::vector<double>& x, std::vector<double>& out) {
        for (std::size_t i = 0; i < s; ++i) {
            for (std::size_t j = 0; j < s; ++j) {
                const double tau = sys.tau[i][j];
                arg[j] = tau == 0.0 ? x[j] : value(j, t - tau);
            }
            out[i] = sys.rate(i, t) * (sys.f(i, arg) - x[i]);
        }
    };
    for (std::size_t n = 0; n < steps; ++n) {
        const double t = time(n);
        const std::vector<double> x = grid_.back();
        rhs(t, x, k1);
        for (std::size_t j = 0; j < s; ++j) tmp[j] = x[j] + 0.5 * h * k1[j];
        rhs(t + 0.5 * h, tmp, k2);
        for (std::size_t j = 0; j < s; ++j) tmp[j] = x[j] + 0.5 * h * k2[j];
        rhs(t + 0.5 * h, tmp, k3);
        for (std::size_t j = 0; j < s; ++j) tmp[j] = x[j] + h * k3[j];
        rhs(t + h, tmp, k4);
        std::vector<double> next(s);
        for (std::size_t j = 0; j < s; ++j) next[j] = x[j] + h / 6.0 * (k1[j] + 2 * k2[j] + 2 * k3[j] + k4[j]);
        grid_.push_back(std::move(next));
    }
}

double ReferenceSolution::value(std::size_t j, double t) const {
    if (t <= t0_) return sys_.history(j, t);
    const double u = (t - t0_) / h_;
    const auto nearest = static_cast<std::size_t>(std::llround(u));
    if (std::abs(u - static_cast<double>(nearest)) < 1e-9 && nearest < grid_.size()) return grid_[nearest][j];

    // Smooth piece [lo, hi] between consecutive breaking points containing t.
    const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), t);
    const double lo = *(it - 1);
    const double hi = *it;
    const auto first_ok = static_cast<long>(std::llround((lo - t0_) / h_));
    const auto last_known = static_cast<long>(grid_.size()) - 1;
    const long last_ok = std::min(static_cast<long>(std::llround((hi - t0_) / h_)), last_known);
    if (last_ok - first_ok + 1 < kStencil) throw std::logic_error("reference: smooth piece too short for the stencil");

    long start = static_cast<long>(std::floor(u)) - kStencil / 2 + 1;
    start = std::clamp(start, first_ok, last_ok - kStencil + 1);
    double sum = 0.0;
    for (long a = start; a < start + kStencil; ++a) {
        double w = 1.0;
        for (long b = start; b < start + kStencil; ++b)
            if (b != a) w *= (u - static_cast<double>(b)) / static_cast<double>(a - b);
        sum += w * grid_[static_cast<std::size_t>(a)][j];
    }
    return sum;
}

}  // namespace attracta::oracle
