#include "attracta/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "attracta/errors.hpp"

namespace attracta {

double StepRecord::eval(std::size_t j, double t) const {
    if (t >= t_end) return y_end[j];
    if (t <= t_start) return y_start[j];
    const std::size_t s = dim();
    const double theta = (t - t_start) / (t_end - t_start);
    const double theta1 = 1.0 - theta;
    const double* r = coeffs.data();
    return r[j] + theta * (r[s + j] + theta1 * (r[2 * s + j] +
                                                theta * (r[3 * s + j] + theta1 * r[4 * s + j])));
}

Vector StepRecord::eval(double t) const {
    Vector v(dim());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = eval(j, t);
    return v;
}

Vector Trajectory::final_state() const {
    return steps_.empty() ? history_.at(t0()) : steps_.back().y_end;
}

void Trajectory::append(StepRecord step) {
    if (!(step.t_end > step.t_start)) throw InvalidParameter("step record must have t_end > t_start");
    if (step.t_start != t_last()) throw InvalidParameter("step record does not continue the trajectory");
    steps_.push_back(std::move(step));
}

double Trajectory::value(std::size_t j, double t) const {
    if (t <= t0()) return history_.value(j, t);
    if (t > t_last()) {
        std::ostringstream os;
        os << "solution requested at t=" << t << " beyond the last accepted time " << t_last();
        throw InsufficientHistory(os.str(), t_last(), t);
    }
    auto it = std::lower_bound(steps_.begin(), steps_.end(), t,
                               [](const StepRecord& s, double v) { return s.t_end < v; });
    return it->eval(j, t);
}

Vector Trajectory::at(double t) const {
    Vector v(dim());
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = value(j, t);
    return v;
}

void Trajectory::knots(double a, double b, std::vector<double>& out) const {
    for (double k : history_.knots()) {
        if (k > a && k < b) out.push_back(k);
    }
    const double t0v = t0();
    if (t0v > a && t0v < b && (out.empty() || out.back() != t0v)) out.push_back(t0v);
    auto it = std::upper_bound(steps_.begin(), steps_.end(), a,
                               [](double v, const StepRecord& s) { return v < s.t_end; });
    for (; it != steps_.end() && it->t_end < b; ++it) out.push_back(it->t_end);
}

std::vector<std::pair<double, Vector>> Trajectory::samples(int per_step, double from) const {
    std::vector<std::pair<double, Vector>> out;
    if (t0() >= from) out.emplace_back(t0(), history_.at(t0()));
    for (const auto& st : steps_) {
        if (st.t_end < from) continue;
        for (int k = 1; k <= per_step; ++k) {
            const double t = st.t_start + (st.t_end - st.t_start) * k / (per_step + 1);
            if (t >= from) out.emplace_back(t, st.eval(t));
        }
        out.emplace_back(st.t_end, st.y_end);
    }
    return out;
}

double final_error(const Trajectory& traj, std::span<const double> target, double window) {
    double worst = 0.0;
    for (const auto& [t, x] : traj.samples(10, traj.t_last() - window)) {
        for (std::size_t j = 0; j < x.size(); ++j) worst = std::max(worst, std::abs(x[j] - target[j]));
    }
    return worst;
}

bool converged_to(const Trajectory& traj, std::span<const double> target, double tol,
                  double window) {
    if (target.size() != traj.dim()) throw InvalidParameter("converged_to: target has wrong size");
    return final_error(traj, target, window) <= tol;
}

std::optional<double> time_to_tolerance(const Trajectory& traj, std::span<const double> target,
                                        double tol) {
    const auto pts = traj.samples(10);
    std::optional<double> entry;
    for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
        double err = 0.0;
        for (std::size_t j = 0; j < it->second.size(); ++j) {
            err = std::max(err, std::abs(it->second[j] - target[j]));
        }
        if (err > tol) break;
        entry = it->first;
    }
    return entry;
}

void write_csv(std::ostream& os, const Trajectory& traj, std::optional<double> resample_dt) {
    const std::size_t s = traj.dim();
    os << "t";
    for (std::size_t j = 0; j < s; ++j) os << ",x" << j + 1;
    os << "\r\n";
    const auto old_precision = os.precision(17);
    auto row = [&](double t, const Vector& x) {
        os << t;
        for (double v : x) os << ',' << v;
        os << "\r\n";
    };
    if (resample_dt) {
        if (!(*resample_dt > 0.0)) throw InvalidParameter("resample step must be positive");
        const double t0 = traj.t0();
        const double t1 = traj.t_last();
        const auto n = static_cast<long long>(std::floor((t1 - t0) / *resample_dt + 1e-9));
        for (long long k = 0; k <= n; ++k) {
            const double t = std::min(t0 + static_cast<double>(k) * *resample_dt, t1);
            row(t, traj.at(t));
        }
        if (t0 + static_cast<double>(n) * *resample_dt < t1 - 1e-12) row(t1, traj.final_state());
    } else {
        row(traj.t0(), traj.history().at(traj.t0()));
        for (const auto& st : traj.steps()) row(st.t_end, st.y_end);
    }
    os.precision(old_precision);
}

}  // namespace attracta
