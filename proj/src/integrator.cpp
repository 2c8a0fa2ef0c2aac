#include "attracta/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "attracta/errors.hpp"

namespace attracta {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                 d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                 d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

/// Accepted trajectory plus the step currently being computed.
class PendingView final : public SolutionSource {
public:
    PendingView(const Trajectory& traj, const StepRecord& pending)
        : traj_(traj), pending_(pending) {}

    double value(std::size_t j, double t) const override {
        if (t > pending_.t_start) {
            touched_ = true;
            return pending_.eval(j, t);
        }
        return traj_.value(j, t);
    }

    void knots(double a, double b, std::vector<double>& out) const override {
        traj_.knots(a, b, out);
        const double ts = pending_.t_start;
        if (ts > a && ts < b && (out.empty() || out.back() < ts)) out.push_back(ts);
    }

    bool touched() const { return touched_; }
    void reset() const { touched_ = false; }

private:
    const Trajectory& traj_;
    const StepRecord& pending_;
    mutable bool touched_ = false;
};

double read_component(const SolutionSource& src, std::size_t j, double tau, double t,
                      std::span<const double> x) {
    return tau >= t ? x[j] : src.value(j, tau);
}

void check_argument(const Box& dom, std::size_t j, double v, double tau) {
    if (!std::isfinite(v) || !dom[j].contains(v)) {
        std::ostringstream os;
        os << "argument x" << j + 1 << "(" << tau << ") = " << v << " lies outside the domain";
        throw DomainExit(os.str(), j, tau);
    }
}

struct Candidate {
    StepRecord record;
    Vector k7;
    double err = 0.0;
};

class Stepper {
public:
    Stepper(const DelaySystem& sys, const IntegratorOptions& opts) : sys_(sys), opts_(opts) {}

    /// Attempts one step of size h from (t, y) with derivative k1.
    /// Returns nullopt when the overlap fixed-point iteration fails.
    std::optional<Candidate> attempt(const Trajectory& traj, double t, double h,
                                     const Vector& y, const Vector& k1) const {
        const std::size_t s = y.size();
        StepRecord pending;
        pending.t_start = t;
        pending.t_end = t + h;
        pending.y_start = y;
        pending.coeffs.assign(5 * s, 0.0);
        for (std::size_t j = 0; j < s; ++j) {
            pending.coeffs[j] = y[j];
            pending.coeffs[s + j] = h * k1[j];
        }
        pending.y_end.resize(s);
        for (std::size_t j = 0; j < s; ++j) pending.y_end[j] = y[j] + h * k1[j];

        PendingView view(traj, pending);
        Candidate cand;
        for (int it = 0; it <= opts_.max_fixed_point_iterations; ++it) {
            view.reset();
            cand = stages(view, t, h, y, k1);
            if (!view.touched()) return cand;
            double change = 0.0;
            for (std::size_t k = 0; k < cand.record.coeffs.size(); ++k) {
                const std::size_t j = k % s;
                const double sc = opts_.atol + opts_.rtol * std::abs(y[j]);
                change = std::max(change, std::abs(cand.record.coeffs[k] - pending.coeffs[k]) / sc);
            }
            pending.coeffs = cand.record.coeffs;
            pending.y_end = cand.record.y_end;
            if (it > 0 && change < 1e-3) return cand;
        }
        return std::nullopt;
    }

private:
    Candidate stages(const SolutionSource& src, double t, double h, const Vector& y,
                     const Vector& k1) const {
        const std::size_t s = y.size();
        Vector tmp(s);
        auto combo = [&](std::initializer_list<std::pair<double, const Vector*>> terms) {
            for (std::size_t j = 0; j < s; ++j) {
                double acc = 0.0;
                for (const auto& [a, k] : terms) acc += a * (*k)[j];
                tmp[j] = y[j] + h * acc;
            }
            return tmp;
        };
        const Vector k2 = rhs_eval(sys_, t + c2 * h, combo({{a21, &k1}}), src);
        const Vector k3 = rhs_eval(sys_, t + c3 * h, combo({{a31, &k1}, {a32, &k2}}), src);
        const Vector k4 =
            rhs_eval(sys_, t + c4 * h, combo({{a41, &k1}, {a42, &k2}, {a43, &k3}}), src);
        const Vector k5 = rhs_eval(sys_, t + c5 * h,
                                   combo({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}), src);
        const Vector k6 = rhs_eval(
            sys_, t + h, combo({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}), src);
        Vector y1 = combo({{a71, &k1}, {a73, &k3}, {a74, &k4}, {a75, &k5}, {a76, &k6}});
        Candidate c;
        c.k7 = rhs_eval(sys_, t + h, y1, src);
        const Vector& k7 = c.k7;

        double err2 = 0.0;
        for (std::size_t j = 0; j < s; ++j) {
            const double e = h * (e1 * k1[j] + e3 * k3[j] + e4 * k4[j] + e5 * k5[j] +
                                  e6 * k6[j] + e7 * k7[j]);
            const double sc = opts_.atol + opts_.rtol * std::max(std::abs(y[j]), std::abs(y1[j]));
            err2 += (e / sc) * (e / sc);
        }
        c.err = std::sqrt(err2 / static_cast<double>(s));

        StepRecord& r = c.record;
        r.t_start = t;
        r.t_end = t + h;
        r.y_start = y;
        r.coeffs.resize(5 * s);
        for (std::size_t j = 0; j < s; ++j) {
            const double dy = y1[j] - y[j];
            const double bspl = h * k1[j] - dy;
            r.coeffs[j] = y[j];
            r.coeffs[s + j] = dy;
            r.coeffs[2 * s + j] = bspl;
            r.coeffs[3 * s + j] = dy - h * k7[j] - bspl;
            r.coeffs[4 * s + j] = h * (d1 * k1[j] + d3 * k3[j] + d4 * k4[j] + d5 * k5[j] +
                                       d6 * k6[j] + d7 * k7[j]);
        }
        r.y_end = std::move(y1);
        r.error_estimate = c.err;
        return c;
    }

    const DelaySystem& sys_;
    const IntegratorOptions& opts_;
};

void clamp_nonnegative(StepRecord& r, const Vector& k1, const Vector& k7) {
    const std::size_t s = r.dim();
    const double h = r.t_end - r.t_start;
    for (std::size_t j = 0; j < s; ++j) {
        if (r.y_end[j] >= 0.0) continue;
        r.y_end[j] = 0.0;
        const double dy = -r.y_start[j];
        const double bspl = h * k1[j] - dy;
        r.coeffs[s + j] = dy;
        r.coeffs[2 * s + j] = bspl;
        r.coeffs[3 * s + j] = dy - h * k7[j] - bspl;
    }
}

}  // namespace

void IntegratorOptions::validate() const {
    if (!(rtol > 0.0) || !(atol > 0.0)) throw InvalidParameter("tolerances must be positive");
    if (max_steps == 0) throw InvalidParameter("max_steps must be positive");
    if (dense_order != 4) {
        throw InvalidParameter("dense output order must be 4 for the Dormand-Prince pair");
    }
    if (!(max_step > 0.0)) throw InvalidParameter("max_step must be positive");
    if (initial_step < 0.0) throw InvalidParameter("initial_step must be >= 0");
    if (fixed_step && !(*fixed_step > 0.0)) throw InvalidParameter("fixed_step must be positive");
    if (breaking_order < 0) throw InvalidParameter("breaking_order must be >= 0");
    if (max_fixed_point_iterations < 1) {
        throw InvalidParameter("max_fixed_point_iterations must be >= 1");
    }
}

Vector rhs_eval(const DelaySystem& system, double t, std::span<const double> x,
                const SolutionSource& source) {
    const std::size_t s = system.dim();
    const Nonlinearity& f = system.nonlinearity();
    const Box& dom = system.domain();
    Vector out(s);
    Vector args(s);
    std::vector<double> knot_buf;

    std::vector<std::vector<QuadratureNode>> nodes(s);
    std::vector<Vector> values(s);

    for (std::size_t i = 0; i < s; ++i) {
        double estimate = 0.0;
        if (const auto& shared = system.shared_row(i)) {
            knot_buf.clear();
            source.knots(earliest_argument(*shared, t), t, knot_buf);
            auto probe = [&](double tau) {
                double acc = 0.0;
                for (std::size_t j = 0; j < s; ++j) acc += read_component(source, j, tau, t, x);
                return acc;
            };
            for (const auto& n : measure_nodes(*shared, t, knot_buf, probe)) {
                for (std::size_t j = 0; j < s; ++j) {
                    args[j] = read_component(source, j, n.tau, t, x);
                    check_argument(dom, j, args[j], n.tau);
                }
                estimate += n.weight * f.component(i, args);
            }
        } else {
            for (std::size_t j = 0; j < s; ++j) {
                nodes[j].clear();
                values[j].clear();
                if (!f.depends(i, j)) {
                    nodes[j].push_back({t, 1.0});
                    values[j].push_back(x[j]);
                    continue;
                }
                const DelayDistribution& d = system.distribution(i, j);
                auto probe = [&](double tau) { return read_component(source, j, tau, t, x); };
                knot_buf.clear();
                if (d.is_kernel()) source.knots(earliest_argument(d, t), t, knot_buf);
                nodes[j] = measure_nodes(d, t, knot_buf, probe);
                for (const auto& n : nodes[j]) {
                    const double v = read_component(source, j, n.tau, t, x);
                    check_argument(dom, j, v, n.tau);
                    values[j].push_back(v);
                }
            }
            // Iterated integral over the product measure: tensor sum over nodes.
            std::vector<std::size_t> idx(s, 0);
            while (true) {
                double w = 1.0;
                for (std::size_t j = 0; j < s; ++j) {
                    w *= nodes[j][idx[j]].weight;
                    args[j] = values[j][idx[j]];
                }
                if (w != 0.0) estimate += w * f.component(i, args);
                std::size_t j = 0;
                while (j < s && ++idx[j] == nodes[j].size()) idx[j++] = 0;
                if (j == s) break;
            }
        }
        if (!std::isfinite(estimate)) {
            std::ostringstream os;
            os << "f_" << i + 1 << " is not finite at t=" << t;
            throw DomainExit(os.str(), i, t);
        }
        out[i] = system.rate(i)(t) * (estimate - x[i]);
    }
    return out;
}

std::vector<double> breaking_points(const DelaySystem& system, double t0, double t_end, int order) {
    std::vector<Lag> lags;
    for (auto& l : system.active_lags()) {
        if (l.kind() != Lag::Kind::Custom) lags.push_back(std::move(l));
    }
    std::vector<double> all;
    std::vector<double> frontier{t0};
    constexpr std::size_t kCap = 20000;
    for (int depth = 0; depth < order && !frontier.empty(); ++depth) {
        std::vector<double> next;
        for (double b : frontier) {
            for (const auto& l : lags) {
                const auto p = l.preimage(b);
                if (p && *p > t0 && *p < t_end) next.push_back(*p);
            }
        }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end(),
                               [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }),
                   next.end());
        all.insert(all.end(), next.begin(), next.end());
        if (all.size() > kCap) break;
        frontier = std::move(next);
    }
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end(),
                          [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)); }),
              all.end());
    return all;
}

Trajectory integrate(const DelaySystem& system, const HistoryFunction& history, double t_end,
                     const IntegratorOptions& opts) {
    opts.validate();
    const std::size_t s = system.dim();
    if (history.dim() != s) throw InvalidConfig("history dimension does not match system");
    const double t0 = history.t0();
    if (!(t_end > t0)) throw InvalidConfig("empty integration interval");

    Trajectory traj(history);
    Stepper stepper(system, opts);
    const Box& dom = system.domain();

    std::vector<double> mesh = breaking_points(system, t0, t_end, opts.breaking_order);
    mesh.push_back(t_end);
    std::size_t next_mesh = 0;

    double t = t0;
    Vector y = history.at(t0);
    Vector k1 = rhs_eval(system, t, y, traj);

    double h;
    if (opts.fixed_step) {
        h = *opts.fixed_step;
    } else if (opts.initial_step > 0.0) {
        h = opts.initial_step;
    } else {
        double d0 = 0.0, d1n = 0.0;
        for (std::size_t j = 0; j < s; ++j) {
            const double sc = opts.atol + opts.rtol * std::abs(y[j]);
            d0 += (y[j] / sc) * (y[j] / sc);
            d1n += (k1[j] / sc) * (k1[j] / sc);
        }
        d0 = std::sqrt(d0 / s);
        d1n = std::sqrt(d1n / s);
        h = (d0 < 1e-5 || d1n < 1e-5) ? 1e-6 : 0.01 * d0 / d1n;
        h = std::clamp(h, 1e-8, 0.1 * (t_end - t0));
    }
    h = std::min(h, opts.max_step);

    bool last_rejected = false;
    std::optional<DomainExit> last_exit;
    std::size_t accepted = 0;
    while (t < t_end) {
        while (next_mesh < mesh.size() && mesh[next_mesh] <= t) ++next_mesh;
        const double target = mesh[next_mesh];
        double step = std::min(opts.fixed_step ? *opts.fixed_step : h, opts.max_step);
        bool lands = false;
        if (t + step >= target - 1e-12 * std::max(1.0, std::abs(target))) {
            step = target - t;
            lands = true;
        }
        const double hmin = 1e-13 * std::max(1.0, std::abs(t));
        if (step < hmin) {
            // Steps collapsed while stages kept leaving D: report the exit itself.
            if (last_exit) throw *last_exit;
            std::ostringstream os;
            os << "step size underflow at t=" << t;
            throw StepSizeUnderflow(os.str(), t);
        }

        std::optional<Candidate> cand;
        try {
            cand = stepper.attempt(traj, t, step, y, k1);
        } catch (const DomainExit& e) {
            if (opts.fixed_step) throw;
            last_exit = e;
            h = 0.25 * step;
            last_rejected = true;
            continue;
        }
        if (!cand) {
            if (opts.fixed_step) {
                std::ostringstream os;
                os << "overlap iteration did not converge at t=" << t << " with the fixed step";
                throw StepSizeUnderflow(os.str(), t);
            }
            h = 0.5 * step;
            last_rejected = true;
            continue;
        }

        const double err = cand->err;
        if (!opts.fixed_step && !(err <= 1.0)) {
            const double fac = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
            h = step * fac;
            last_rejected = true;
            continue;
        }

        StepRecord& rec = cand->record;
        if (lands) rec.t_end = target;
        if (opts.positivity_clamp) clamp_nonnegative(rec, k1, cand->k7);
        for (std::size_t j = 0; j < s; ++j) {
            const double v = rec.y_end[j];
            if (dom[j].contains_open(v)) continue;
            const auto hist = history.constant_value(j);
            const bool pinned = dom[j].contains(v) && hist && *hist == v;
            if (!pinned) {
                std::ostringstream os;
                os << "component x" << j + 1 << " = " << v << " left the domain at t=" << rec.t_end;
                throw DomainExit(os.str(), j, rec.t_end);
            }
        }

        t = rec.t_end;
        y = rec.y_end;
        k1 = std::move(cand->k7);
        traj.append(std::move(rec));
        last_exit.reset();
        if (++accepted > opts.max_steps) {
            std::ostringstream os;
            os << "maximum number of steps exceeded at t=" << t;
            throw StepSizeUnderflow(os.str(), t);
        }
        if (!opts.fixed_step) {
            double fac = err > 0.0 ? std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2))) : 5.0;
            if (last_rejected) fac = std::min(fac, 1.0);
            // Keep the controller's step when a mesh point forced a short one.
            h = lands ? std::max(h, step * fac) : step * fac;
        }
        last_rejected = false;
    }
    return traj;
}

}  // namespace attracta
