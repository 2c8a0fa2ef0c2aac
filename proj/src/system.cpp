#include "attracta/system.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "attracta/errors.hpp"

namespace attracta {

// ---------------------------------------------------------------- Rate

Rate Rate::constant(double value) {
    if (!(value > 0.0) || !std::isfinite(value)) {
        throw InvalidParameter("constant rate must be positive and finite");
    }
    std::ostringstream os;
    os << value;
    return Rate([value](double) { return value; }, value, os.str());
}

Rate Rate::oscillatory(double c) {
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidParameter("oscillatory rate needs c > 0");
    std::ostringstream os;
    os << c << "*(1.1+sin t)";
    return Rate([c](double t) { return c * (1.1 + std::sin(t)); }, 0.1 * c, os.str());
}

Rate Rate::function(std::function<double(double)> g, std::string label) {
    if (!g) throw InvalidParameter("rate function must be callable");
    return Rate(std::move(g), std::nullopt, std::move(label));
}

// ---------------------------------------------------------------- Nonlinearity

Nonlinearity::Nonlinearity(std::size_t dim, Component f, std::vector<std::vector<bool>> depends)
    : dim_(dim), f_(std::move(f)), depends_(std::move(depends)) {
    if (!f_) throw InvalidParameter("nonlinearity must be callable");
    if (!depends_.empty()) {
        if (depends_.size() != dim_) throw InvalidParameter("dependency pattern has wrong size");
        for (const auto& row : depends_) {
            if (row.size() != dim_) throw InvalidParameter("dependency pattern has wrong size");
        }
    }
}

Vector Nonlinearity::operator()(std::span<const double> x) const {
    Vector out(dim_);
    for (std::size_t i = 0; i < dim_; ++i) out[i] = f_(i, x);
    return out;
}

// ---------------------------------------------------------------- HistoryFunction

HistoryFunction HistoryFunction::constant(Vector values, double t0) {
    HistoryFunction h;
    h.dim_ = values.size();
    h.t_min_ = t0;
    h.t0_ = t0;
    h.constant_.assign(values.begin(), values.end());
    h.fn_ = [values = std::move(values)](std::size_t j, double) { return values[j]; };
    return h;
}

HistoryFunction HistoryFunction::table(std::vector<double> times, std::vector<Vector> values) {
    if (times.empty() || times.size() != values.size()) {
        throw InvalidConfig("history table needs matching non-empty times and values");
    }
    if (!std::is_sorted(times.begin(), times.end()) ||
        std::adjacent_find(times.begin(), times.end()) != times.end()) {
        throw InvalidConfig("history table times must be strictly increasing");
    }
    const std::size_t dim = values.front().size();
    for (const auto& v : values) {
        if (v.size() != dim) throw InvalidConfig("history table rows have different sizes");
    }
    HistoryFunction h;
    h.dim_ = dim;
    h.t_min_ = times.front();
    h.t0_ = times.back();
    h.knots_ = times;
    h.constant_.resize(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        const bool flat = std::all_of(values.begin(), values.end(),
                                      [&](const Vector& v) { return v[j] == values.front()[j]; });
        if (flat) h.constant_[j] = values.front()[j];
    }
    h.fn_ = [times = std::move(times), values = std::move(values)](std::size_t j, double t) {
        if (t <= times.front()) return values.front()[j];
        auto it = std::upper_bound(times.begin(), times.end(), t);
        if (it == times.end()) return values.back()[j];
        const std::size_t k = static_cast<std::size_t>(it - times.begin());
        const double w = (t - times[k - 1]) / (times[k] - times[k - 1]);
        return (1.0 - w) * values[k - 1][j] + w * values[k][j];
    };
    return h;
}

HistoryFunction HistoryFunction::from_function(std::size_t dim, double t_min, double t0, Fn fn,
                                               std::vector<double> knots) {
    if (!(t_min <= t0)) throw InvalidConfig("history interval must satisfy t_min <= t0");
    if (!fn) throw InvalidConfig("history function must be callable");
    HistoryFunction h;
    h.dim_ = dim;
    h.t_min_ = t_min;
    h.t0_ = t0;
    h.fn_ = std::move(fn);
    std::sort(knots.begin(), knots.end());
    h.knots_ = std::move(knots);
    h.constant_.resize(dim);
    return h;
}

double HistoryFunction::value(std::size_t j, double t) const {
    if (t > t0_) {
        std::ostringstream os;
        os << "history queried at t=" << t << " beyond t0=" << t0_;
        throw InsufficientHistory(os.str(), t0_, t);
    }
    return fn_(j, std::max(t, t_min_));
}

Vector HistoryFunction::at(double t) const {
    Vector v(dim_);
    for (std::size_t j = 0; j < dim_; ++j) v[j] = value(j, t);
    return v;
}

std::optional<double> HistoryFunction::constant_value(std::size_t j) const {
    return j < constant_.size() ? constant_[j] : std::nullopt;
}

// ---------------------------------------------------------------- DelaySystem

DelaySystem::DelaySystem(std::vector<Rate> rates, Nonlinearity f,
                         std::vector<std::vector<DelayDistribution>> distributions, Box domain,
                         std::string name)
    : rates_(std::move(rates)),
      f_(std::move(f)),
      dists_(std::move(distributions)),
      shared_(rates_.size()),
      domain_(std::move(domain)),
      name_(std::move(name)) {
    const std::size_t s = rates_.size();
    if (s == 0) throw InvalidConfig("system dimension must be positive");
    if (f_.dim() != s) throw InvalidConfig("nonlinearity dimension does not match rates");
    if (dists_.size() != s) throw InvalidConfig("distribution matrix must be s x s");
    for (const auto& row : dists_) {
        if (row.size() != s) throw InvalidConfig("distribution matrix must be s x s");
    }
    if (domain_.dim() != s) throw InvalidConfig("domain dimension does not match system");
    for (std::size_t i = 0; i < s; ++i) {
        if (!(domain_[i].lo < domain_[i].hi)) throw InvalidConfig("domain axes must be non-empty");
    }
}

DelaySystem& DelaySystem::share_row(std::size_t i, DelayDistribution dist) {
    if (i >= dim()) throw InvalidConfig("share_row: row out of range");
    for (auto& d : dists_[i]) d = dist;
    shared_[i] = std::move(dist);
    return *this;
}

std::vector<Lag> DelaySystem::active_lags() const {
    std::vector<Lag> out;
    for (std::size_t i = 0; i < dim(); ++i) {
        if (shared_[i]) {
            for (auto& l : shared_[i]->lags()) out.push_back(std::move(l));
            continue;
        }
        for (std::size_t j = 0; j < dim(); ++j) {
            if (!f_.depends(i, j)) continue;
            for (auto& l : dists_[i][j].lags()) out.push_back(std::move(l));
        }
    }
    return out;
}

double DelaySystem::earliest_argument(double t) const {
    double e = t;
    for (const auto& lag : active_lags()) e = std::min(e, lag.argument(t));
    return e;
}

// ---------------------------------------------------------------- admissibility

namespace {

void check_distribution(const DelayDistribution& d, double t0, double t_end, std::size_t i,
                        std::size_t j) {
    for (const auto& lag : d.lags()) {
        if (lag.kind() == Lag::Kind::Proportional && t0 < 0.0) {
            throw InvalidDistribution("proportional lag requires t0 >= 0");
        }
    }
    const double tol = d.is_kernel() ? 1e-8 : 1e-10;
    constexpr int kSamples = 16;
    for (int k = 0; k <= kSamples; ++k) {
        const double t = t0 + (t_end - t0) * k / kSamples;
        const double m = total_mass(d, t);
        if (std::abs(m - 1.0) > tol) {
            std::ostringstream os;
            os << "distribution (" << i + 1 << "," << j + 1 << ") " << d.describe()
               << " has total mass " << m << " at t=" << t;
            throw InvalidDistribution(os.str());
        }
        if (earliest_argument(d, t) > t) {
            throw InvalidDistribution("distribution support extends beyond t");
        }
    }
}

}  // namespace

void check_admissible(const DelaySystem& system, const HistoryFunction& history, double t_end) {
    const std::size_t s = system.dim();
    if (history.dim() != s) throw InvalidConfig("history dimension does not match system");
    const double t0 = history.t0();
    if (!(t_end > t0)) throw InvalidConfig("empty integration interval");

    for (std::size_t i = 0; i < s; ++i) {
        for (int k = 0; k <= 32; ++k) {
            const double t = t0 + (t_end - t0) * k / 32.0;
            const double g = system.rate(i)(t);
            if (!(g >= 0.0) || !std::isfinite(g)) {
                std::ostringstream os;
                os << "rate g_" << i + 1 << " is negative or not finite at t=" << t;
                throw InvalidConfig(os.str());
            }
        }
    }

    for (std::size_t i = 0; i < s; ++i) {
        if (const auto& shared = system.shared_row(i)) {
            check_distribution(*shared, t0, t_end, i, i);
            continue;
        }
        for (std::size_t j = 0; j < s; ++j) {
            if (system.nonlinearity().depends(i, j)) {
                check_distribution(system.distribution(i, j), t0, t_end, i, j);
            }
        }
    }

    const Box& dom = system.domain();
    auto check_hist = [&](double t) {
        for (std::size_t j = 0; j < s; ++j) {
            const double v = history.value(j, t);
            if (!std::isfinite(v) || !dom[j].contains(v)) {
                std::ostringstream os;
                os << "history component " << j + 1 << " = " << v << " at t=" << t
                   << " is outside the closure of the domain";
                throw InvalidConfig(os.str());
            }
        }
    };
    for (int k = 0; k <= 16; ++k) {
        check_hist(history.t_min() + (history.t0() - history.t_min()) * k / 16.0);
    }
    for (double t : history.knots()) check_hist(t);

    // Continuity of F is declared; sample it for finiteness near the history.
    std::mt19937_64 rng(0x5EED);
    const Vector anchor = history.at(t0);
    Vector x(s);
    for (int k = 0; k < 64; ++k) {
        for (std::size_t j = 0; j < s; ++j) {
            const double r = 1.0 + std::abs(anchor[j]);
            double lo = std::max(dom[j].lo, anchor[j] - r);
            double hi = std::min(dom[j].hi, anchor[j] + r);
            std::uniform_real_distribution<double> u(lo, hi);
            x[j] = u(rng);
            if (!dom[j].contains_open(x[j])) x[j] = 0.5 * (lo + hi);
        }
        for (std::size_t i = 0; i < s; ++i) {
            const double v = system.nonlinearity().component(i, x);
            if (!std::isfinite(v)) {
                throw InvalidConfig("nonlinearity f_" + std::to_string(i + 1) +
                                    " is not finite inside the domain");
            }
        }
    }
}

}  // namespace attracta
