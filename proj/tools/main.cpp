#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "attracta/cli.hpp"

namespace {

void configure_logging() {
    // Logs go to stderr so that stdout stays a clean CSV/JSON stream.
    spdlog::set_default_logger(spdlog::stderr_logger_mt("attracta"));
    spdlog::set_level(spdlog::level::err);
    if (const char* env = std::getenv("ATTRACTA_LOG")) {
        const std::string v = env;
        if (v == "info") spdlog::set_level(spdlog::level::info);
        else if (v == "debug") spdlog::set_level(spdlog::level::debug);
    }
}

}  // namespace

int main(int argc, char** argv) {
    configure_logging();
    attracta::cli::Options o;

    CLI::App app{"attracta: distributed-delay simulation and global attractivity certificates"};
    app.require_subcommand(1);

    auto out_flag = [&](CLI::App* c) { c->add_option("--out", o.out, "output file (default: stdout)"); };
    auto seed_flag = [&](CLI::App* c) { c->add_option("--seed", o.seed, "sampling seed")->capture_default_str(); };
    auto jobs_flag = [&](CLI::App* c) { c->add_option("--jobs", o.jobs, "parallel runs")->check(CLI::PositiveNumber); };

    auto* sim = app.add_subcommand("simulate", "integrate a system and write its trajectory as CSV");
    sim->add_option("--config", o.config, "system description (JSON)")->required();
    sim->add_option("--t-end", o.t_end, "final time");
    sim->add_option("--resample", o.resample, "also resample on a uniform grid with this step");
    out_flag(sim);

    auto* cert = app.add_subcommand("certify", "compute a global attractivity certificate (JSON)");
    cert->add_option("--config", o.config, "system description (JSON)")->required();
    cert->add_option("--method", o.method, "criterion")
        ->check(CLI::IsMember({"auto", "mmatrix", "planar", "nicholson"}))
        ->capture_default_str();
    seed_flag(cert);
    out_flag(cert);

    auto* rep = app.add_subcommand("reproduce", "certify a worked example and simulate it under three delays");
    rep->add_option("example", o.example, "example1, example2, example3, example4 or remark_L")->required();
    rep->add_option("--tol", o.tol, "convergence tolerance")->capture_default_str();
    rep->add_flag("--timing", o.timing, "record wall times in the report");
    seed_flag(rep);
    jobs_flag(rep);
    out_flag(rep);

    auto* sw = app.add_subcommand("sweep", "simulate over a grid of delay parameters (CSV report)");
    sw->add_option("--config", o.config, "system description (JSON)")->required();
    sw->add_option("--family", o.family, "constant, proportional or uniform")
        ->check(CLI::IsMember({"constant", "proportional", "uniform"}))
        ->capture_default_str();
    sw->add_option("--grid", o.grid, "parameters: a,b,c or lo:hi:n")->capture_default_str();
    sw->add_option("--tol", o.tol, "convergence tolerance")->capture_default_str();
    sw->add_flag("--timing", o.timing, "add a wall-time column");
    jobs_flag(sw);
    out_flag(sw);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : attracta::cli::kInvalidConfig;
    }

    if (*sim) return attracta::cli::cmd_simulate(o, std::cout, std::cerr);
    if (*cert) return attracta::cli::cmd_certify(o, std::cout, std::cerr);
    if (*rep) return attracta::cli::cmd_reproduce(o, std::cout, std::cerr);
    return attracta::cli::cmd_sweep(o, std::cout, std::cerr);
}
