#include "attracta/delay_distribution.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "attracta/errors.hpp"

namespace attracta {

namespace {

constexpr double kNormTol = 1e-12;

// 6-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 6> kGlNodes = {
    -0.9324695142031520278123016, -0.6612093864662645136613996, -0.2386191860831969086305017,
    0.2386191860831969086305017,  0.6612093864662645136613996,  0.9324695142031520278123016};
constexpr std::array<double, 6> kGlWeights = {
    0.1713244923791703450402961, 0.3607615730481386075698335, 0.4679139345726910473898703,
    0.4679139345726910473898703, 0.3607615730481386075698335, 0.1713244923791703450402961};

void check_weights(const std::vector<Atom>& atoms, bool strictly_positive, const char* what) {
    if (atoms.empty()) throw InvalidDistribution(std::string(what) + ": no atoms");
    double sum = 0.0;
    for (const auto& a : atoms) {
        if (!std::isfinite(a.weight) || a.weight < 0.0 || (strictly_positive && a.weight == 0.0)) {
            throw InvalidDistribution(std::string(what) + ": weights must be " +
                                      (strictly_positive ? "positive" : "nonnegative"));
        }
        sum += a.weight;
    }
    if (std::abs(sum - 1.0) > kNormTol) {
        std::ostringstream os;
        os << what << ": weights sum to " << sum << ", expected 1";
        throw InvalidDistribution(os.str());
    }
}

struct PanelRule {
    std::array<QuadratureNode, 6> nodes;
    double mass = 0.0;
    double moment = 0.0;
    /// Sum of |w * probe|: the scale of the moment's rounding error.
    double magnitude = 0.0;
};

class KernelDiscretizer {
public:
    KernelDiscretizer(const DelayDistribution::Kernel& k, double t,
                      const std::function<double(double)>& probe, const QuadratureOptions& opts,
                      double total_width)
        : k_(k), t_(t), probe_(probe), opts_(opts), width_(total_width) {}

    void add_panel(double a, double b, std::vector<QuadratureNode>& out) {
        PanelRule whole = rule(a, b);
        refine(a, b, whole, 0, out);
    }

private:
    PanelRule rule(double a, double b) const {
        PanelRule r;
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        for (std::size_t q = 0; q < kGlNodes.size(); ++q) {
            const double tau = mid + half * kGlNodes[q];
            const double dens = k_.density(t_, tau);
            if (!(dens >= 0.0) || !std::isfinite(dens)) {
                std::ostringstream os;
                os << "kernel '" << k_.label << "' has invalid density " << dens << " at (t=" << t_
                   << ", tau=" << tau << ")";
                throw InvalidDistribution(os.str());
            }
            const double w = half * kGlWeights[q] * dens;
            r.nodes[q] = {tau, w};
            r.mass += w;
            if (probe_) {
                const double m = w * probe_(tau);
                r.moment += m;
                r.magnitude += std::abs(m);
            }
        }
        return r;
    }

    void refine(double a, double b, const PanelRule& whole, int depth,
                std::vector<QuadratureNode>& out) {
        const double mid = 0.5 * (a + b);
        PanelRule left = rule(a, mid);
        PanelRule right = rule(mid, b);
        // Past a large integrand, rounding alone exceeds the absolute tolerance;
        // the moment defect is measured above a rounding floor.
        const double floor = 64.0 * std::numeric_limits<double>::epsilon() * whole.magnitude;
        const double defect =
            std::max(std::abs(left.mass + right.mass - whole.mass),
                     std::abs(left.moment + right.moment - whole.moment) - floor);
        const double budget = opts_.abs_tol * std::max((b - a) / width_, 1e-6);
        if (defect <= budget) {
            out.insert(out.end(), whole.nodes.begin(), whole.nodes.end());
            return;
        }
        if (depth >= opts_.max_depth || (b - a) <= 1e-14 * std::max(1.0, std::abs(t_))) {
            std::ostringstream os;
            os << "kernel '" << k_.label << "' quadrature did not converge on [" << a << ", " << b
               << "], estimated defect " << defect;
            throw IntegrationAccuracyError(os.str(), defect);
        }
        refine(a, mid, left, depth + 1, out);
        refine(mid, b, right, depth + 1, out);
    }

    const DelayDistribution::Kernel& k_;
    double t_;
    const std::function<double(double)>& probe_;
    const QuadratureOptions& opts_;
    double width_;
};

}  // namespace

// ---------------------------------------------------------------- Lag

Lag Lag::constant(double tau) {
    if (!(tau >= 0.0) || !std::isfinite(tau)) {
        throw InvalidDistribution("constant lag must be finite and >= 0");
    }
    return Lag(Kind::Constant, tau, {}, {});
}

Lag Lag::proportional(double rho) {
    if (!(rho > 0.0 && rho < 1.0)) {
        throw InvalidDistribution("proportional lag requires rho in (0, 1)");
    }
    return Lag(Kind::Proportional, rho, {}, {});
}

Lag Lag::custom(std::function<double(double)> h, std::string label) {
    if (!h) throw InvalidDistribution("custom lag requires a callable");
    return Lag(Kind::Custom, std::numeric_limits<double>::quiet_NaN(), std::move(h),
               std::move(label));
}

double Lag::argument(double t) const {
    switch (kind_) {
        case Kind::Constant:
            return t - param_;
        case Kind::Proportional:
            return param_ * t;
        case Kind::Custom: {
            const double h = custom_(t);
            if (!(h <= t)) {
                std::ostringstream os;
                os << "lag '" << label_ << "' returned h(" << t << ") = " << h << " > t";
                throw InvalidDistribution(os.str());
            }
            return h;
        }
    }
    return t;
}

std::optional<double> Lag::preimage(double b) const {
    switch (kind_) {
        case Kind::Constant:
            if (param_ > 0.0) return b + param_;
            return std::nullopt;
        case Kind::Proportional:
            if (b > 0.0) return b / param_;
            return std::nullopt;
        case Kind::Custom:
            return std::nullopt;
    }
    return std::nullopt;
}

std::string Lag::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::Constant:
            os << "t-" << param_;
            break;
        case Kind::Proportional:
            os << param_ << "*t";
            break;
        case Kind::Custom:
            os << label_;
            break;
    }
    return os.str();
}

// ---------------------------------------------------------------- DelayDistribution

DelayDistribution DelayDistribution::point_mass(Lag lag) { return DelayDistribution(PointMass{std::move(lag)}); }

DelayDistribution DelayDistribution::instantaneous() { return point_mass(Lag::constant(0.0)); }

DelayDistribution DelayDistribution::mixture(std::vector<Atom> atoms) {
    check_weights(atoms, true, "mixture");
    return DelayDistribution(Mixture{std::move(atoms)});
}

DelayDistribution DelayDistribution::step_cdf(std::vector<Atom> jumps) {
    check_weights(jumps, false, "step CDF");
    return DelayDistribution(StepCdf{std::move(jumps)});
}

DelayDistribution DelayDistribution::kernel(std::function<double(double, double)> density, Lag lower,
                                            std::string label) {
    if (!density) throw InvalidDistribution("kernel requires a density callable");
    return DelayDistribution(Kernel{std::move(density), std::move(lower), std::move(label)});
}

DelayDistribution DelayDistribution::uniform(double width) {
    if (!(width > 0.0) || !std::isfinite(width)) {
        throw InvalidDistribution("uniform kernel width must be positive");
    }
    const double d = 1.0 / width;
    std::ostringstream os;
    os << "uniform[t-" << width << ",t]";
    return kernel([d](double, double) { return d; }, Lag::constant(width), os.str());
}

bool DelayDistribution::is_instantaneous() const {
    const auto* pm = std::get_if<PointMass>(&v_);
    return pm && pm->lag.kind() == Lag::Kind::Constant && pm->lag.parameter() == 0.0;
}

std::vector<Lag> DelayDistribution::lags() const {
    return std::visit(
        [](const auto& d) -> std::vector<Lag> {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, PointMass>) {
                return {d.lag};
            } else if constexpr (std::is_same_v<T, Kernel>) {
                return {d.lower};
            } else if constexpr (std::is_same_v<T, Mixture>) {
                std::vector<Lag> out;
                for (const auto& a : d.atoms) out.push_back(a.lag);
                return out;
            } else {
                std::vector<Lag> out;
                for (const auto& a : d.jumps) out.push_back(a.lag);
                return out;
            }
        },
        v_);
}

std::string DelayDistribution::describe() const {
    return std::visit(
        [](const auto& d) -> std::string {
            using T = std::decay_t<decltype(d)>;
            std::ostringstream os;
            if constexpr (std::is_same_v<T, PointMass>) {
                os << "point(" << d.lag.describe() << ")";
            } else if constexpr (std::is_same_v<T, Kernel>) {
                os << d.label;
            } else {
                const auto& atoms = [&]() -> const std::vector<Atom>& {
                    if constexpr (std::is_same_v<T, Mixture>) return d.atoms;
                    else return d.jumps;
                }();
                os << (std::is_same_v<T, Mixture> ? "mixture{" : "step_cdf{");
                for (std::size_t k = 0; k < atoms.size(); ++k) {
                    if (k) os << ",";
                    os << atoms[k].weight << "@" << atoms[k].lag.describe();
                }
                os << "}";
            }
            return os.str();
        },
        v_);
}

// ---------------------------------------------------------------- measure operations

std::vector<QuadratureNode> measure_nodes(const DelayDistribution& dist, double t,
                                          std::span<const double> knots,
                                          const std::function<double(double)>& probe,
                                          const QuadratureOptions& opts) {
    std::vector<QuadratureNode> out;
    std::visit(
        [&](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, DelayDistribution::PointMass>) {
                out.push_back({d.lag.argument(t), 1.0});
            } else if constexpr (std::is_same_v<T, DelayDistribution::Mixture>) {
                for (const auto& a : d.atoms) out.push_back({a.lag.argument(t), a.weight});
            } else if constexpr (std::is_same_v<T, DelayDistribution::StepCdf>) {
                for (const auto& a : d.jumps) {
                    if (a.weight > 0.0) out.push_back({a.lag.argument(t), a.weight});
                }
            } else {
                const double lo = d.lower.argument(t);
                if (lo == t) {
                    throw InvalidDistribution("kernel '" + d.label + "' has empty support at t");
                }
                const double width = t - lo;
                KernelDiscretizer disc(d, t, probe, opts, width);
                double a = lo;
                auto it = std::upper_bound(knots.begin(), knots.end(), lo);
                for (; it != knots.end() && *it < t; ++it) {
                    if (*it - a > 1e-13 * std::max(1.0, std::abs(t))) {
                        disc.add_panel(a, *it, out);
                        a = *it;
                    }
                }
                disc.add_panel(a, t, out);
            }
        },
        dist.variant());
    return out;
}

double total_mass(const DelayDistribution& dist, double t) {
    const auto nodes = measure_nodes(dist, t);
    double m = 0.0;
    for (const auto& n : nodes) m += n.weight;
    return m;
}

double delayed_functional(const DelayDistribution& dist, double t,
                          const std::function<double(double)>& u, std::span<const double> knots,
                          const QuadratureOptions& opts) {
    const auto nodes = measure_nodes(dist, t, knots, u, opts);
    double acc = 0.0;
    for (const auto& n : nodes) acc += n.weight * u(n.tau);
    return acc;
}

double earliest_argument(const DelayDistribution& dist, double t) {
    double e = t;
    for (const auto& lag : dist.lags()) e = std::min(e, lag.argument(t));
    return e;
}

}  // namespace attracta
