#include "attracta/config.hpp"

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "attracta/errors.hpp"
#include "attracta/expression.hpp"

namespace attracta {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& why) { throw InvalidConfig(why); }

const json& need(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) bad(std::string("missing field '") + key + "'");
    return j.at(key);
}

double number(const json& j, const std::string& what) {
    if (!j.is_number()) bad(what + " must be a number");
    return j.get<double>();
}

Vector vector_of(const json& j, const std::string& what) {
    if (!j.is_array()) bad(what + " must be an array of numbers");
    Vector v;
    for (const auto& x : j) v.push_back(number(x, what));
    return v;
}

Matrix matrix_of(const json& j, std::size_t s, const std::string& what) {
    if (!j.is_array() || j.size() != s) bad(what + " must be an s x s array");
    Matrix m(s, s);
    for (std::size_t i = 0; i < s; ++i) {
        const Vector row = vector_of(j[i], what);
        if (row.size() != s) bad(what + " must be an s x s array");
        for (std::size_t k = 0; k < s; ++k) m(i, k) = row[k];
    }
    return m;
}

double bound(const json& j) {
    if (j.is_null()) return kInf;
    return number(j, "domain bound");
}

Box parse_domain(const json& j, std::size_t s) {
    if (!j.is_array() || j.size() != s) bad("domain must list one [lo, hi] pair per coordinate");
    std::vector<Interval> axes;
    for (const auto& a : j) {
        if (!a.is_array() || a.size() != 2) bad("domain entries must be [lo, hi]");
        const double lo = a[0].is_null() ? -kInf : number(a[0], "domain bound");
        const double hi = bound(a[1]);
        if (!(lo < hi)) bad("domain entries need lo < hi");
        axes.push_back({lo, hi});
    }
    return Box(axes);
}

HistoryFunction parse_history(const json& j, std::size_t s) {
    const std::string kind = need(j, "kind").get<std::string>();
    if (kind == "constant") {
        Vector v = vector_of(need(j, "values"), "history values");
        if (v.size() != s) bad("history has the wrong dimension");
        const double t0 = j.contains("t0") ? number(j["t0"], "t0") : 0.0;
        return HistoryFunction::constant(std::move(v), t0);
    }
    if (kind == "table") {
        Vector times = vector_of(need(j, "times"), "history times");
        const json& vals = need(j, "values");
        if (!vals.is_array() || vals.size() != times.size()) bad("history table: one row per time");
        std::vector<Vector> rows;
        for (const auto& r : vals) {
            rows.push_back(vector_of(r, "history values"));
            if (rows.back().size() != s) bad("history has the wrong dimension");
        }
        return HistoryFunction::table(std::move(times), std::move(rows));
    }
    bad("unknown history kind '" + kind + "'");
}

std::vector<Rate> parse_rates(const json& j, std::size_t s) {
    if (j.is_object()) return std::vector<Rate>(s, parse_rate(j));
    if (!j.is_array() || j.size() != s) bad("rates must be one descriptor or one per equation");
    std::vector<Rate> r;
    for (const auto& x : j) r.push_back(parse_rate(x));
    return r;
}

std::vector<Activation> parse_activations(const json& p, std::size_t s) {
    if (!p.contains("activations")) return std::vector<Activation>(s, Activation::identity());
    const json& a = p["activations"];
    if (!a.is_array() || a.size() != s) bad("activations: one name per neuron");
    std::vector<Activation> out;
    for (const auto& name : a) {
        const auto n = name.get<std::string>();
        if (n == "identity") out.push_back(Activation::identity());
        else if (n == "tanh") out.push_back(Activation::tanh());
        else bad("unknown activation '" + n + "'");
    }
    return out;
}

/// Copies `sys` onto a different domain box.
DelaySystem with_domain(const DelaySystem& sys, const Box& domain) {
    const std::size_t s = sys.dim();
    std::vector<Rate> rates;
    DelayGrid grid(s);
    for (std::size_t i = 0; i < s; ++i) {
        rates.push_back(sys.rate(i));
        for (std::size_t k = 0; k < s; ++k) grid[i].push_back(sys.distribution(i, k));
    }
    DelaySystem out(rates, sys.nonlinearity(), grid, domain, sys.name());
    for (std::size_t i = 0; i < s; ++i) {
        if (sys.shared_row(i)) out.share_row(i, *sys.shared_row(i));
    }
    return out;
}

struct Delays {
    std::optional<DelayDistribution> tmpl;
    std::optional<DelayGrid> grid;

    DelayGrid full(std::size_t s) const {
        if (grid) return *grid;
        return uniform_grid(s, *tmpl);
    }
    std::vector<DelayDistribution> diagonal(std::size_t s) const {
        std::vector<DelayDistribution> d;
        for (std::size_t i = 0; i < s; ++i) d.push_back(grid ? (*grid)[i][i] : *tmpl);
        return d;
    }
    DelayDistribution at(std::size_t i, std::size_t k) const { return grid ? (*grid)[i][k] : *tmpl; }
};

Delays parse_delays(const json& j, std::size_t s, const std::optional<DelayDistribution>& override) {
    Delays d;
    if (override) {
        d.tmpl = *override;
        return d;
    }
    if (j.contains("distributions")) {
        const json& g = j["distributions"];
        if (!g.is_array() || g.size() != s) bad("distributions must be an s x s array");
        DelayGrid grid;
        for (const auto& row : g) {
            if (!row.is_array() || row.size() != s) bad("distributions must be an s x s array");
            std::vector<DelayDistribution> r;
            for (const auto& x : row) r.push_back(parse_distribution(x));
            grid.push_back(std::move(r));
        }
        d.grid = std::move(grid);
    } else if (j.contains("delay")) {
        d.tmpl = parse_distribution(j["delay"]);
    } else {
        bad("missing delay structure: give 'delay' or 'distributions'");
    }
    return d;
}

ModelBuild build_named(const std::string& model, const json& p, std::size_t s, const Delays& delays,
                       const std::optional<std::vector<Rate>>& rates) {
    auto rates_or_default = [&] { return rates ? *rates : std::vector<Rate>{}; };
    if (model == "hopfield") {
        return build_hopfield(vector_of(need(p, "b"), "b"), matrix_of(need(p, "C"), s, "C"),
                              parse_activations(p, s), delays.full(s));
    }
    if (model == "bam_root") {
        std::vector<int> k;
        for (const auto& x : need(p, "k")) k.push_back(x.get<int>());
        if (k.size() != s) bad("bam_root: need one k per equation");
        return build_bam_root(matrix_of(need(p, "alpha"), s, "alpha"), k, delays.full(s),
                              rates_or_default());
    }
    if (model == "nicholson") {
        NicholsonParams np;
        np.rates = rates_or_default();
        np.beta = vector_of(need(p, "beta"), "beta");
        if (np.beta.size() != s) bad("nicholson: need one beta per equation");
        np.a = p.contains("a") ? matrix_of(p["a"], s, "a") : Matrix::Zero(s, s);
        np.self_delay = delays.diagonal(s);
        return build_nicholson(np);
    }
    if (model == "sqrt_pair" || model == "power_pair") {
        if (s != 2) bad(model + " is two-dimensional");
        return build_pair_example(model, delays.at(0, 1), delays.at(1, 0), rates_or_default());
    }
    if (model == "logistic_patch" || model == "mackey_glass_patch" || model == "ricker_patch") {
        PatchParams pp;
        pp.rates = rates_or_default();
        pp.beta = vector_of(need(p, "beta"), "beta");
        if (pp.beta.size() != s) bad(model + ": need one beta per equation");
        pp.a = p.contains("a") ? matrix_of(p["a"], s, "a") : Matrix::Zero(s, s);
        if (p.contains("K")) pp.K = vector_of(p["K"], "K");
        if (p.contains("n")) pp.n = number(p["n"], "n");
        pp.self_delay = delays.diagonal(s);
        return build_section5(model, pp);
    }
    throw UnsupportedModel("unknown model '" + model + "'");
}

ModelBuild build_expr(const json& nl, const json& j, std::size_t s, const Delays& delays,
                      const std::optional<std::vector<Rate>>& rates, const std::optional<Box>& domain) {
    const json& bodies = need(nl, "expr");
    if (!bodies.is_array() || bodies.size() != s) bad("expr nonlinearity needs one body per equation");
    std::vector<std::string> vars;
    for (std::size_t i = 0; i < s; ++i) vars.push_back("x" + std::to_string(i + 1));
    std::vector<Expression> exprs;
    std::vector<std::vector<bool>> dep(s, std::vector<bool>(s));
    for (std::size_t i = 0; i < s; ++i) {
        exprs.push_back(Expression::parse(bodies[i].get<std::string>(), vars));
        for (std::size_t k = 0; k < s; ++k) dep[i][k] = exprs[i].uses(k);
    }
    Nonlinearity f(
        s, [exprs](std::size_t i, std::span<const double> x) { return exprs[i].eval(x); }, dep);
    const Box dom = domain ? *domain : Box::unbounded(s);
    std::vector<Rate> r = rates ? *rates : std::vector<Rate>(s, Rate::constant(1.0));
    ModelBuild out("expr", DelaySystem(r, f, delays.full(s), dom, "expr"), {});

    if (j.contains("lipschitz")) {
        const json& lj = j["lipschitz"];
        LipschitzData lip;
        lip.L = matrix_of(need(lj, "L"), s, "lipschitz.L");
        lip.equilibrium = vector_of(need(lj, "equilibrium"), "lipschitz.equilibrium");
        if (lip.equilibrium.size() != s) bad("lipschitz.equilibrium has the wrong dimension");
        lip.domain = lj.contains("domain") ? parse_domain(lj["domain"], s) : dom;
        out.equilibrium = lip.equilibrium;
        out.lipschitz = std::move(lip);
    } else if (j.contains("equilibrium")) {
        out.equilibrium = vector_of(j["equilibrium"], "equilibrium");
    }

    // Planar monotone structure: each equation reads only the other coordinate.
    if (s == 2 && !out.lipschitz && !dep[0][0] && dep[0][1] && dep[1][0] && !dep[1][1]) {
        out.planar = PlanarMaps{
            [e = exprs[0]](double y) { const double x[2] = {0.0, y}; return e.eval(x); },
            [e = exprs[1]](double x) { const double v[2] = {x, 0.0}; return e.eval(v); }};
    }
    return out;
}

}  // namespace

Lag parse_lag(const json& j) {
    if (j.contains("lag")) return parse_lag(j["lag"]);
    // A distribution descriptor carries its own "kind"; only lag kinds count here.
    std::string kind = j.contains("kind") ? j["kind"].get<std::string>() : "";
    if (kind != "constant" && kind != "proportional") kind.clear();
    if (j.contains("tau") && (kind.empty() || kind == "constant")) {
        return Lag::constant(number(j["tau"], "tau"));
    }
    if (j.contains("rho") && (kind.empty() || kind == "proportional")) {
        return Lag::proportional(number(j["rho"], "rho"));
    }
    bad("lag needs 'tau' (constant) or 'rho' (proportional)");
}

DelayDistribution parse_distribution(const json& j) {
    if (!j.is_object()) bad("distribution descriptor must be an object");
    const std::string kind = need(j, "kind").get<std::string>();
    auto atoms = [&](const char* key, const char* weight_key) {
        std::vector<Atom> out;
        const json& arr = need(j, key);
        if (!arr.is_array()) bad(std::string(key) + " must be an array");
        for (const auto& a : arr) {
            const char* wk = a.contains(weight_key) ? weight_key : "weight";
            out.push_back({number(need(a, wk), wk), parse_lag(a)});
        }
        return out;
    };
    if (kind == "point") return DelayDistribution::point_mass(parse_lag(j));
    if (kind == "instantaneous") return DelayDistribution::instantaneous();
    if (kind == "mixture") return DelayDistribution::mixture(atoms("atoms", "weight"));
    if (kind == "step_cdf") return DelayDistribution::step_cdf(atoms("jumps", "size"));
    if (kind == "uniform") return DelayDistribution::uniform(number(need(j, "width"), "width"));
    if (kind == "kernel") {
        const Expression density =
            Expression::parse(need(j, "density").get<std::string>(), {"t", "tau"});
        const Lag lower = parse_lag(need(j, "lower"));
        return DelayDistribution::kernel(
            [density](double t, double tau) {
                const double v[2] = {t, tau};
                return density.eval(v);
            },
            lower, "kernel(" + density.text() + ")");
    }
    bad("unknown distribution kind '" + kind + "'");
}

Rate parse_rate(const json& j) {
    const std::string kind = need(j, "kind").get<std::string>();
    if (kind == "constant") return Rate::constant(number(need(j, "value"), "rate value"));
    if (kind == "oscillatory") return Rate::oscillatory(number(need(j, "c"), "rate c"));
    if (kind == "expr") {
        const Expression g = Expression::parse(need(j, "body").get<std::string>(), {"t"});
        return Rate::function([g](double t) { return g.eval(std::span<const double>(&t, 1)); },
                              g.text());
    }
    bad("unknown rate kind '" + kind + "'");
}

std::string config_hash(const json& j) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

LoadedConfig load_config_json(const json& j, const std::optional<DelayDistribution>& delay) {
    try {
        if (!j.is_object()) bad("config must be a JSON object");
        const json& dim = need(j, "dimension");
        if (!dim.is_number_integer() || dim.get<long long>() < 1) bad("dimension must be a positive integer");
        const auto s = static_cast<std::size_t>(dim.get<long long>());

        std::optional<std::vector<Rate>> rates;
        if (j.contains("rates")) rates = parse_rates(j["rates"], s);
        std::optional<Box> domain;
        if (j.contains("domain")) domain = parse_domain(j["domain"], s);
        const Delays delays = parse_delays(j, s, delay);

        const json& nl = need(j, "nonlinearity");
        std::optional<ModelBuild> build;
        if (nl.contains("model")) {
            build = build_named(nl["model"].get<std::string>(),
                                nl.contains("params") ? nl["params"] : json::object(), s, delays, rates);
            if (build->system.dim() != s) bad("dimension does not match the model");
            if (domain) build->system = with_domain(build->system, *domain);
        } else {
            build = build_expr(nl, j, s, delays, rates, domain);
        }

        std::optional<HistoryFunction> history;
        if (j.contains("history")) history = parse_history(j["history"], s);

        if (build->equilibrium.empty() && history) {
            const VectorMap F = [f = build->system.nonlinearity()](std::span<const double> x) { return f(x); };
            const Vector guess = history->at(history->t0());
            try {
                if (build->system.domain().contains_open(guess)) {
                    build->equilibrium = find_equilibrium(F, build->system.domain(), guess);
                }
            } catch (const Error&) {
                // No equilibrium to report; convergence checks are skipped.
            }
        }
        return LoadedConfig{j, std::move(*build), std::move(history), config_hash(j)};
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string("config: ") + e.what());
    }
}

LoadedConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open config '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidConfig("malformed JSON in '" + path.string() + "': " + e.what());
    }
    return load_config_json(j);
}

}  // namespace attracta
