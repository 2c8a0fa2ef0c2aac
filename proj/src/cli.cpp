#include "attracta/cli.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "attracta/errors.hpp"
#include "attracta/integrator.hpp"

namespace attracta::cli {

using nlohmann::json;

namespace {

constexpr double kWindow = 5.0;

std::string num17(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
        if (c == '"') q += '"';
        q += c;
    }
    return q + '"';
}

void emit(const Options& opts, const std::string& content, std::ostream& out) {
    if (opts.out) {
        std::ofstream f(*opts.out, std::ios::binary);
        if (!f) throw InvalidConfig("cannot write '" + *opts.out + "'");
        f << content;
    } else {
        out << content;
    }
}

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

/// Loads a config, mapping every construction failure to InvalidConfig.
LoadedConfig load_checked(const json& j, const std::optional<DelayDistribution>& delay = std::nullopt) {
    try {
        return load_config_json(j, delay);
    } catch (const InvalidConfig&) {
        throw;
    } catch (const Error& e) {
        throw InvalidConfig(e.what());
    }
}

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open config '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidConfig("malformed JSON in '" + path + "': " + e.what());
    }
}

}  // namespace

double sweep_horizon(const DelaySystem& system) {
    double lag = 0.0;
    for (const auto& l : system.active_lags()) {
        switch (l.kind()) {
            case Lag::Kind::Constant:
                lag = std::max(lag, 40.0 * l.parameter());
                break;
            case Lag::Kind::Proportional:
                lag = std::max(lag, std::min(std::pow(1.0 / l.parameter(), 40.0), 2e6));
                break;
            case Lag::Kind::Custom:
                break;
        }
    }
    return std::max(200.0, lag);
}

DelayDistribution family_member(const std::string& family, double p) {
    if (family == "constant") return DelayDistribution::point_mass(Lag::constant(p));
    if (family == "proportional") return DelayDistribution::point_mass(Lag::proportional(p));
    if (family == "uniform") return DelayDistribution::uniform(p);
    throw InvalidConfig("unknown delay family '" + family + "' (constant, proportional, uniform)");
}

std::vector<double> parse_grid(const std::string& spec) {
    std::vector<double> out;
    auto to_num = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != s.size()) throw InvalidConfig("bad grid value '" + s + "'");
        return v;
    };
    if (spec.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(spec);
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() != 3) throw InvalidConfig("grid range must be lo:hi:n");
        const double lo = to_num(parts[0]);
        const double hi = to_num(parts[1]);
        const double n = to_num(parts[2]);
        if (!(n >= 1.0) || n != std::floor(n)) throw InvalidConfig("grid count must be a positive integer");
        const auto count = static_cast<int>(n);
        for (int k = 0; k < count; ++k) out.push_back(count == 1 ? lo : lo + (hi - lo) * k / (count - 1));
    } else {
        std::stringstream ss(spec);
        for (std::string p; std::getline(ss, p, ',');) out.push_back(to_num(p));
    }
    if (out.empty()) throw InvalidConfig("empty grid");
    return out;
}

Vector history_distance(const HistoryFunction& history, std::span<const double> z) {
    Vector d(history.dim(), 0.0);
    auto take = [&](double t) {
        for (std::size_t j = 0; j < d.size(); ++j) d[j] = std::max(d[j], std::abs(history.value(j, t) - z[j]));
    };
    const double a = history.t_min();
    const double b = history.t0();
    constexpr int kSamples = 512;
    for (int k = 0; k <= kSamples; ++k) take(a + (b - a) * k / kSamples);
    for (double k : history.knots()) take(k);
    return d;
}

RunOutcome run_to_horizon(const LoadedConfig& cfg, const std::string& label, std::span<const double> target,
                          double tol) {
    RunOutcome r;
    r.label = label;
    const auto start = std::chrono::steady_clock::now();
    try {
        r.horizon = sweep_horizon(cfg.build.system);
        if (!cfg.history) throw InvalidConfig("config has no history");
        if (target.size() != cfg.build.system.dim()) throw NotFound("no equilibrium to compare against");
        const double t_end = cfg.history->t0() + r.horizon;
        check_admissible(cfg.build.system, *cfg.history, t_end);
        const Trajectory traj = integrate(cfg.build.system, *cfg.history, t_end);
        r.final_error = final_error(traj, target, kWindow);
        r.converged = r.final_error <= tol;
        r.time_to_tolerance = time_to_tolerance(traj, target, tol);
        spdlog::debug("{}: {} steps to t={}, final error {}", label, traj.steps().size(), t_end, r.final_error);
    } catch (const Error& e) {
        r.status = e.what();
        spdlog::info("{}: {}", label, r.status);
    }
    r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return r;
}

RunOutcome run_to_horizon(const LoadedConfig& cfg, const std::string& label, double tol) {
    return run_to_horizon(cfg, label, cfg.build.equilibrium, tol);
}

// ------------------------------------------------------------------ simulate

int cmd_simulate(const Options& opts, std::ostream& out, std::ostream& err) {
    std::optional<LoadedConfig> cfg;
    double t_end = 0.0;
    try {
        cfg = load_checked(read_json(opts.config));
        if (!cfg->history) throw InvalidConfig("config has no history");
        if (opts.t_end) t_end = *opts.t_end;
        else if (cfg->raw.contains("t_end")) t_end = cfg->raw["t_end"].get<double>();
        else t_end = cfg->history->t0() + sweep_horizon(cfg->build.system);
        check_admissible(cfg->build.system, *cfg->history, t_end);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidConfig;
    } catch (const json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidConfig;
    }
    try {
        const Trajectory traj = integrate(cfg->build.system, *cfg->history, t_end);
        spdlog::info("integrated {} steps to t={}", traj.steps().size(), t_end);
        std::ostringstream csv;
        write_csv(csv, traj, opts.resample);
        emit(opts, csv.str(), out);
    } catch (const InvalidConfig& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidConfig;
    } catch (const InvalidParameter& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidConfig;
    } catch (const Error& e) {
        err << "integration failed: " << e.what() << '\n';
        return kIntegrationFailure;
    }
    return kOk;
}

// ------------------------------------------------------------------ certify

namespace {

int exit_for(Verdict v) {
    switch (v) {
        case Verdict::Certified:
            return kOk;
        case Verdict::NotCertified:
            return kNotCertified;
        case Verdict::Inconclusive:
            return kInconclusive;
    }
    return kInconclusive;
}

CertifyOptions certify_options(const Options& opts, const LoadedConfig& cfg) {
    CertifyOptions co;
    co.seed = opts.seed;
    if (cfg.history && cfg.build.equilibrium.size() == cfg.build.system.dim()) {
        co.history_anchor = history_distance(*cfg.history, cfg.build.equilibrium);
    }
    return co;
}

}  // namespace

int cmd_certify(const Options& opts, std::ostream& out, std::ostream& err) {
    std::optional<LoadedConfig> cfg;
    try {
        cfg = load_checked(read_json(opts.config));
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidConfig;
    }
    try {
        const Certificate cert = certify_model(cfg->build, opts.method, certify_options(opts, *cfg));
        emit(opts, to_json(cert).dump(2) + "\n", out);
        spdlog::info("verdict: {}", to_string(cert.verdict));
        return exit_for(cert.verdict);
    } catch (const UnsupportedModel& e) {
        err << "not certifiable: " << e.what() << '\n';
        return kInconclusive;
    } catch (const OutOfScope& e) {
        err << "out of scope: " << e.what() << '\n';
        return kInconclusive;
    } catch (const InvalidConfig& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidConfig;
    } catch (const Error& e) {
        err << "inconclusive: " << e.what() << '\n';
        return kInconclusive;
    }
}

// ------------------------------------------------------------------ reproduce

json example_config(const std::string& id) {
    const json unit_delay = {{"kind", "point"}, {"tau", 1.0}};
    if (id == "example1" || id == "example2") {
        return {{"dimension", 2},
                {"nonlinearity", {{"model", id == "example1" ? "sqrt_pair" : "power_pair"}}},
                {"delay", unit_delay},
                {"history", {{"kind", "constant"}, {"values", {0.2, 3.0}}}}};
    }
    if (id == "example3") {
        return {{"dimension", 2},
                {"nonlinearity",
                 {{"model", "bam_root"},
                  {"params", {{"alpha", {{0.5, 0.5}, {0.5, 0.5}}}, {"k", {1, 1}}}}}},
                {"delay", unit_delay},
                {"history", {{"kind", "constant"}, {"values", {0.6, 1.4}}}}};
    }
    if (id == "remark_L") {
        return {{"dimension", 2},
                {"nonlinearity",
                 {{"model", "hopfield"},
                  {"params", {{"b", {1.0, 1.0}}, {"C", {{0.5, 2.0}, {0.0625, 0.5}}}}}}},
                {"delay", unit_delay},
                {"history", {{"kind", "constant"}, {"values", {1.0, -1.0}}}}};
    }
    if (id == "example4") {
        return {{"dimension", 2},
                {"nonlinearity",
                 {{"model", "nicholson"},
                  {"params", {{"beta", {4.0, 5.0}}, {"a", {{0.0, 0.5}, {0.2, 0.0}}}}}}},
                {"delay", unit_delay},
                {"history", {{"kind", "constant"}, {"values", {0.5, 3.0}}}}};
    }
    throw InvalidConfig("unknown example '" + id + "' (example1, example2, example3, example4, remark_L)");
}

namespace {

struct Check {
    std::string name;
    bool pass = false;
    std::string detail;
};

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

std::vector<Check> example_checks(const std::string& id, const Certificate& cert) {
    std::vector<Check> c;
    c.push_back({"certificate", cert.verdict == Verdict::Certified,
                 to_string(cert.method) + " -> " + to_string(cert.verdict)});
    auto eq_is = [&](double a, double b) {
        return cert.equilibrium.size() == 2 && near(cert.equilibrium[0], a, 1e-9) &&
               near(cert.equilibrium[1], b, 1e-9);
    };
    std::ostringstream eq;
    eq << std::setprecision(12);
    for (double v : cert.equilibrium) eq << v << ' ';
    if (id == "example1" || id == "example2" || id == "example3") {
        c.push_back({"equilibrium (1,1)", eq_is(1.0, 1.0), eq.str()});
    } else if (id == "remark_L") {
        c.push_back({"equilibrium (0,0)", eq_is(0.0, 0.0), eq.str()});
        const bool alpha_ok = cert.alpha && near(*cert.alpha, 0.95, 1e-12);
        c.push_back({"alpha = 0.95", alpha_ok, cert.alpha ? num17(*cert.alpha) : "absent"});
        const bool xi_ok = cert.xi.size() == 2 && near(cert.xi[0], 20.0, 1e-10) && near(cert.xi[1], 4.5, 1e-10);
        c.push_back({"xi = (20, 4.5)", xi_ok, cert.xi.size() == 2 ? num17(cert.xi[0]) + ", " + num17(cert.xi[1]) : "absent"});
        c.push_back({"column-sum test fails", cert.comparison_flower && !*cert.comparison_flower,
                     "second column sums to 2.5"});
    } else if (id == "example4") {
        const auto& k = cert.corollary5;
        const bool ok = k && k->pass && near(k->lhs, 0.1, 1e-12) && near(k->rhs, 0.148295, 1e-5);
        c.push_back({"corollary5 holds", ok, k ? num17(k->lhs) + " < " + num17(k->rhs) : "absent"});
        const auto& a = cert.comparison_abs_nichol2;
        const bool fails = a && !a->pass && near(a->lhs, 0.5, 1e-12) && near(a->rhs, 0.458659, 1e-5);
        c.push_back({"abs_nichol2 fails", fails, a ? num17(a->lhs) + " > " + num17(a->rhs) : "absent"});
    }
    return c;
}

}  // namespace

int cmd_reproduce(const Options& opts, std::ostream& out, std::ostream& err) {
    json cfg_json;
    std::optional<LoadedConfig> cfg;
    try {
        cfg_json = example_config(opts.example);
        cfg = load_checked(cfg_json);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidConfig;
    }
    const auto start = std::chrono::steady_clock::now();
    Certificate cert;
    std::vector<Check> checks;
    try {
        cert = certify_model(cfg->build, "auto", certify_options(opts, *cfg));
        checks = example_checks(opts.example, cert);
    } catch (const Error& e) {
        checks.push_back({"certificate", false, e.what()});
    }

    const std::vector<std::pair<std::string, DelayDistribution>> delays = {
        {"constant lag 1", family_member("constant", 1.0)},
        {"proportional 0.7t", family_member("proportional", 0.7)},
        {"uniform on [t-2,t]", family_member("uniform", 2.0)}};
    std::vector<RunOutcome> runs(delays.size());
    const Vector target = cert.equilibrium;
    parallel_for(delays.size(), opts.jobs, [&](std::size_t i) {
        try {
            runs[i] = run_to_horizon(load_checked(cfg_json, delays[i].second), delays[i].first, target, opts.tol);
        } catch (const Error& e) {
            runs[i].label = delays[i].first;
            runs[i].status = e.what();
        }
    });
    for (const auto& r : runs) {
        std::ostringstream d;
        d << "final error " << std::setprecision(3) << r.final_error << " at t=" << r.horizon;
        if (r.status != "ok") d << " (" << r.status << ")";
        checks.push_back({"converges: " + r.label, r.converged && r.status == "ok", d.str()});
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    bool all = true;
    std::ostringstream table;
    table << opts.example << '\n';
    for (const auto& c : checks) {
        all = all && c.pass;
        table << "  " << (c.pass ? "PASS" : "FAIL") << "  " << std::left << std::setw(30) << c.name << c.detail
              << '\n';
    }
    table << (all ? "all checks passed" : "some checks failed") << '\n';
    out << table.str();

    if (opts.out) {
        json report;
        report["command"] = "reproduce " + opts.example;
        report["config_hash"] = cfg->hash;
        report["seed"] = opts.seed;
        report["certificate"] = to_json(cert);
        report["checks"] = json::array();
        for (const auto& c : checks) report["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
        report["runs"] = json::array();
        for (const auto& r : runs) {
            json row = {{"delay", r.label},
                        {"horizon", r.horizon},
                        {"converged", r.converged},
                        {"final_error", r.final_error},
                        {"status", r.status}};
            row["time_to_tolerance"] = r.time_to_tolerance ? json(*r.time_to_tolerance) : json(nullptr);
            if (opts.timing) row["wall_time"] = r.wall_time;
            report["runs"].push_back(std::move(row));
        }
        if (opts.timing) report["wall_time"] = wall;
        try {
            emit(opts, report.dump(2) + "\n", out);
        } catch (const Error& e) {
            err << "error: " << e.what() << '\n';
            return kInvalidConfig;
        }
    }
    if (!all) {
        for (const auto& c : checks) {
            if (!c.pass) err << "failed: " << c.name << ": " << c.detail << '\n';
        }
        return kNotCertified;
    }
    return kOk;
}

// ------------------------------------------------------------------ sweep

int cmd_sweep(const Options& opts, std::ostream& out, std::ostream& err) {
    json raw;
    std::vector<double> grid;
    try {
        raw = read_json(opts.config);
        const LoadedConfig base = load_checked(raw);
        if (!base.history) throw InvalidConfig("config has no history");
        grid = parse_grid(opts.grid);
        for (double p : grid) family_member(opts.family, p);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidConfig;
    }

    std::vector<RunOutcome> rows(grid.size());
    parallel_for(grid.size(), opts.jobs, [&](std::size_t i) {
        const std::string label = opts.family + " " + num17(grid[i]);
        try {
            const LoadedConfig cfg = load_checked(raw, family_member(opts.family, grid[i]));
            rows[i] = run_to_horizon(cfg, label, opts.tol);
        } catch (const Error& e) {
            rows[i].label = label;
            rows[i].status = e.what();
        }
    });

    std::ostringstream csv;
    csv << "index,family,parameter,horizon,converged,final_error,time_to_tolerance,status";
    if (opts.timing) csv << ",wall_time";
    csv << "\r\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        csv << i << ',' << opts.family << ',' << num17(grid[i]) << ',' << num17(r.horizon) << ','
            << (r.converged ? "true" : "false") << ',' << num17(r.final_error) << ','
            << (r.time_to_tolerance ? num17(*r.time_to_tolerance) : "") << ',' << csv_field(r.status);
        if (opts.timing) csv << ',' << num17(r.wall_time);
        csv << "\r\n";
    }
    try {
        emit(opts, csv.str(), out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidConfig;
    }
    return kOk;
}

}  // namespace attracta::cli
