#include "attracta/model_zoo.hpp"

#include <cmath>
#include <sstream>

#include "attracta/errors.hpp"

namespace attracta {

namespace {

std::vector<Rate> default_rates(std::vector<Rate> rates, std::size_t s) {
    if (rates.empty()) return std::vector<Rate>(s, Rate::constant(1.0));
    if (rates.size() != s) throw InvalidParameter("need one rate per equation");
    return rates;
}

void check_grid(const DelayGrid& g, std::size_t s) {
    if (g.size() != s) throw InvalidParameter("delay grid must be s x s");
    for (const auto& row : g) {
        if (row.size() != s) throw InvalidParameter("delay grid must be s x s");
    }
}

std::vector<std::vector<bool>> pattern_of(const Matrix& m) {
    std::vector<std::vector<bool>> dep(m.rows(), std::vector<bool>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) dep[i][j] = m(i, j) != 0.0;
    }
    return dep;
}

/// Coupling j != i undelayed, self term delayed by `self[i]`.
DelayGrid patch_grid(std::size_t s, const std::vector<DelayDistribution>& self) {
    if (self.size() != s) throw InvalidParameter("need one self-delay distribution per equation");
    DelayGrid g(s, std::vector<DelayDistribution>(s, DelayDistribution::instantaneous()));
    for (std::size_t i = 0; i < s; ++i) g[i][i] = self[i];
    return g;
}

std::vector<std::vector<bool>> patch_pattern(const Matrix& a) {
    auto dep = pattern_of(a);
    for (std::size_t i = 0; i < dep.size(); ++i) dep[i][i] = true;
    return dep;
}

double fixed_point_defect(const Nonlinearity& f, const Vector& z) {
    const Vector fz = f(z);
    double d = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) d = std::max(d, std::abs(fz[i] - z[i]));
    return d;
}

}  // namespace

DelayGrid uniform_grid(std::size_t s, const DelayDistribution& dist) {
    return DelayGrid(s, std::vector<DelayDistribution>(s, dist));
}

Activation Activation::identity() {
    return {[](double u) { return u; }, 1.0, "identity"};
}

Activation Activation::tanh() {
    return {[](double u) { return std::tanh(u); }, 1.0, "tanh"};
}

ModelBuild build_hopfield(const Vector& b, const Matrix& C, const std::vector<Activation>& act,
                          const DelayGrid& delays) {
    const std::size_t s = b.size();
    if (s == 0) throw InvalidParameter("hopfield: empty network");
    if (static_cast<std::size_t>(C.rows()) != s || static_cast<std::size_t>(C.cols()) != s) {
        throw InvalidParameter("hopfield: C must be s x s");
    }
    if (act.size() != s) throw InvalidParameter("hopfield: need one activation per neuron");
    check_grid(delays, s);
    std::vector<Rate> rates;
    for (double bi : b) {
        if (!(bi > 0.0)) throw InvalidParameter("hopfield: b_i must be positive");
        rates.push_back(Rate::constant(bi));
    }
    Nonlinearity f(
        s,
        [b, C, act](std::size_t i, std::span<const double> x) {
            double v = 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) {
                if (C(i, j) != 0.0) v += C(i, j) * act[j].fn(x[j]);
            }
            return v / b[i];
        },
        pattern_of(C));

    Matrix L(s, s);
    for (std::size_t i = 0; i < s; ++i) {
        for (std::size_t j = 0; j < s; ++j) L(i, j) = std::abs(C(i, j)) * act[j].lipschitz / b[i];
    }
    const Box domain = Box::unbounded(s);
    const VectorMap F = [f](std::span<const double> x) { return f(x); };
    const Vector z = find_equilibrium(F, domain, Vector(s, 0.0));

    ModelBuild out{"hopfield", DelaySystem(rates, f, delays, domain, "hopfield"), z};
    out.lipschitz = LipschitzData{L, z, domain, {}};
    return out;
}

ModelBuild build_bam_root(const Matrix& alpha, const std::vector<int>& k, const DelayGrid& delays,
                          std::vector<Rate> rates) {
    const std::size_t s = k.size();
    if (s == 0) throw InvalidParameter("bam_root: empty system");
    if (static_cast<std::size_t>(alpha.rows()) != s || static_cast<std::size_t>(alpha.cols()) != s) {
        throw InvalidParameter("bam_root: alpha must be s x s");
    }
    check_grid(delays, s);
    for (std::size_t i = 0; i < s; ++i) {
        if (k[i] < 1) throw InvalidParameter("bam_root: k_i must be a positive integer");
        double row = 0.0;
        for (std::size_t j = 0; j < s; ++j) {
            if (!(alpha(i, j) >= 0.0)) throw InvalidParameter("bam_root: alpha must be nonnegative");
            row += alpha(i, j);
        }
        if (std::abs(row - 1.0) > 1e-12) {
            std::ostringstream os;
            os << "bam_root: row " << i + 1 << " of alpha sums to " << row << ", not 1";
            throw InvalidParameter(os.str());
        }
    }
    rates = default_rates(std::move(rates), s);

    Nonlinearity f(
        s,
        [alpha, k](std::size_t i, std::span<const double> x) {
            double u = 0.0;
            for (std::size_t j = 0; j < x.size(); ++j) u += alpha(i, j) * x[j];
            return std::pow(u, 1.0 / (2.0 * k[i]));
        },
        pattern_of(alpha));

    // Positive solutions eventually exceed every level below 1: a lower bound
    // a maps to a^{1/(2k)}. The row sums of L drop below 1 once solutions
    // exceed theta = max_i (2 k_i)^{-2k_i/(2k_i - 1)}; we certify above
    // x0 = sqrt(theta), which lies strictly between theta and 1.
    double theta = 0.0;
    for (int ki : k) {
        const double m = 2.0 * ki;
        theta = std::max(theta, std::pow(m, -m / (m - 1.0)));
    }
    const double x0 = std::sqrt(theta);
    Matrix L(s, s);
    for (std::size_t i = 0; i < s; ++i) {
        const double m = 2.0 * k[i];
        for (std::size_t j = 0; j < s; ++j) L(i, j) = alpha(i, j) / m * std::pow(x0, 1.0 / m - 1.0);
    }
    const Vector z(s, 1.0);
    std::ostringstream note;
    note << "Lipschitz bounds hold on the restricted domain (" << x0
         << ", inf)^s; attraction of all non-negative non-trivial solutions is asserted, "
            "not certified, below that level";

    ModelBuild out{"bam_root",
                   DelaySystem(rates, f, delays, Box::positive_orthant(s), "bam_root"), z};
    std::vector<Interval> axes(s, Interval{x0, kInf});
    out.lipschitz = LipschitzData{L, z, Box(axes), {note.str()}};
    out.notes.push_back(note.str());
    return out;
}

ModelBuild build_nicholson(const NicholsonParams& params) {
    params.validate();
    const std::size_t s = params.dim();
    auto rates = default_rates(params.rates, s);
    std::vector<DelayDistribution> self = params.self_delay;
    if (self.empty()) self.assign(s, DelayDistribution::point_mass(Lag::constant(1.0)));

    const Matrix a = params.a;
    const Vector beta = params.beta;
    Nonlinearity f(
        s,
        [a, beta](std::size_t i, std::span<const double> x) {
            double v = beta[i] * x[i] * std::exp(-x[i]);
            for (std::size_t j = 0; j < x.size(); ++j) {
                if (j != i) v += a(i, j) * x[j];
            }
            return v;
        },
        patch_pattern(a));

    Vector guess(s);
    for (std::size_t i = 0; i < s; ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < s; ++j) row += j == i ? 0.0 : a(i, j);
        guess[i] = row < 1.0 && beta[i] / (1.0 - row) > 1.0 ? std::log(beta[i] / (1.0 - row)) : 1.0;
    }
    const Box domain = Box::positive_orthant(s);
    const Vector z = find_equilibrium(nicholson_map(params), domain, guess);

    NicholsonParams p = params;
    p.rates = rates;
    p.self_delay = self;
    ModelBuild out{"nicholson", DelaySystem(rates, f, patch_grid(s, self), domain, "nicholson"), z};
    out.nicholson = std::move(p);
    return out;
}

ModelBuild build_pair_example(const std::string& name, const DelayDistribution& d1,
                              const DelayDistribution& d2, std::vector<Rate> rates) {
    PlanarMaps maps;
    if (name == "sqrt_pair") {
        maps.f1 = [](double y) { return std::sqrt(y); };
        maps.f2 = [](double x) { return std::sqrt(x); };
    } else if (name == "power_pair") {
        maps.f1 = [](double y) { return y * y; };
        maps.f2 = [](double x) { return std::sqrt(std::sqrt(x)); };
    } else {
        throw UnsupportedModel("unknown pair example '" + name + "'");
    }
    rates = default_rates(std::move(rates), 2);
    Nonlinearity f(
        2,
        [maps](std::size_t i, std::span<const double> x) {
            return i == 0 ? maps.f1(x[1]) : maps.f2(x[0]);
        },
        {{false, true}, {true, false}});
    DelayGrid grid = uniform_grid(2, DelayDistribution::instantaneous());
    grid[0][1] = d1;
    grid[1][0] = d2;
    ModelBuild out{name, DelaySystem(rates, f, grid, Box::positive_orthant(2), name), {1.0, 1.0}};
    out.planar = maps;
    return out;
}

ModelBuild build_section5(const std::string& name, const PatchParams& p) {
    const std::size_t s = p.beta.size();
    if (s == 0) throw InvalidParameter(name + ": empty system");
    if (static_cast<std::size_t>(p.a.rows()) != s || static_cast<std::size_t>(p.a.cols()) != s) {
        throw InvalidParameter(name + ": coupling matrix must be s x s");
    }
    for (std::size_t i = 0; i < s; ++i) {
        if (!(p.beta[i] > 0.0)) throw InvalidParameter(name + ": beta must be positive");
        for (std::size_t j = 0; j < s; ++j) {
            if (!(p.a(i, j) >= 0.0)) throw InvalidParameter(name + ": coupling must be nonnegative");
        }
    }
    const bool needs_K = name == "logistic_patch" || name == "ricker_patch";
    if (needs_K) {
        if (p.K.size() != s) throw InvalidParameter(name + ": need one K per equation");
        for (double K : p.K) {
            if (!(K > 0.0)) throw InvalidParameter(name + ": K must be positive");
        }
    }
    if (name == "mackey_glass_patch" && !(p.n > 0.0)) {
        throw InvalidParameter("mackey_glass_patch: exponent must be positive");
    }
    auto rates = default_rates(p.rates, s);
    std::vector<DelayDistribution> self = p.self_delay;
    if (self.empty()) self.assign(s, DelayDistribution::point_mass(Lag::constant(1.0)));
    if (self.size() != s) throw InvalidParameter(name + ": need one self-delay per equation");

    const Matrix a = p.a;
    const Vector beta = p.beta;
    const Vector K = p.K;
    const double n = p.n;
    Nonlinearity::Component comp;
    std::vector<std::vector<bool>> dep = patch_pattern(a);
    DelayGrid grid = patch_grid(s, self);
    Vector guess(s);
    if (name == "logistic_patch") {
        comp = [a, beta, K](std::size_t i, std::span<const double> x) {
            double v = beta[i] * x[i] * (1.0 - x[i] / K[i]);
            for (std::size_t j = 0; j < x.size(); ++j) {
                if (j != i) v += a(i, j) * x[j];
            }
            return v;
        };
        for (std::size_t i = 0; i < s; ++i) guess[i] = K[i] * std::max(0.5, 1.0 - 1.0 / beta[i]);
    } else if (name == "mackey_glass_patch") {
        comp = [a, beta, n](std::size_t i, std::span<const double> x) {
            double v = beta[i] * x[i] / (1.0 + std::pow(x[i], n));
            for (std::size_t j = 0; j < x.size(); ++j) {
                if (j != i) v += a(i, j) * x[j];
            }
            return v;
        };
        for (std::size_t i = 0; i < s; ++i) guess[i] = std::pow(std::max(beta[i] - 1.0, 0.5), 1.0 / n);
    } else if (name == "ricker_patch") {
        // Every coordinate is read at the same delayed instant.
        comp = [a, beta, K](std::size_t i, std::span<const double> x) {
            double e = K[i] - x[i];
            for (std::size_t j = 0; j < x.size(); ++j) {
                if (j != i) e -= a(i, j) * x[j];
            }
            return beta[i] * x[i] * std::exp(e);
        };
        for (std::size_t i = 0; i < s; ++i) guess[i] = std::max(0.5, K[i] + std::log(beta[i]));
    } else {
        throw UnsupportedModel("unknown patch model '" + name + "'");
    }
    Nonlinearity f(s, comp, dep);
    DelaySystem sys(rates, f, grid, Box::positive_orthant(s), name);
    if (name == "ricker_patch") {
        for (std::size_t i = 0; i < s; ++i) sys.share_row(i, self[i]);
    }

    Vector z;
    const VectorMap F = [f](std::span<const double> x) { return f(x); };
    try {
        z = find_equilibrium(F, Box::positive_orthant(s), guess);
    } catch (const Error&) {
        z.clear();  // simulation does not need it
    }
    ModelBuild out{name, std::move(sys), z};
    out.certifiable = false;
    out.notes.push_back("global attractivity of this model is an open problem; simulation only");
    if (!z.empty() && fixed_point_defect(f, z) > 1e-12) out.equilibrium.clear();
    return out;
}

Certificate certify_model(const ModelBuild& build, const std::string& method,
                          const CertifyOptions& opts) {
    if (!build.certifiable) {
        throw UnsupportedModel(build.model + ": attractivity is an open problem; no criterion applies");
    }
    const bool want_auto = method == "auto";
    if (method == "nicholson" || (want_auto && build.nicholson)) {
        if (!build.nicholson) throw OutOfScope("the Nicholson criterion needs a Nicholson system");
        return certify_nicholson(*build.nicholson, opts);
    }
    if (method == "planar" || (want_auto && build.planar)) {
        if (!build.planar) throw OutOfScope("the planar criterion needs a planar monotone system");
        PlanarOptions po;
        po.x_star_hint = build.equilibrium.empty() ? 1.0 : build.equilibrium[0];
        return planar_certify(build.planar->f1, build.planar->f2, po);
    }
    if (method == "mmatrix" || want_auto) {
        if (!build.lipschitz) throw OutOfScope("no Lipschitz data available for the M-matrix criterion");
        return certify_m_matrix(build.system, *build.lipschitz, opts);
    }
    throw InvalidParameter("unknown certification method '" + method + "'");
}

}  // namespace attracta
