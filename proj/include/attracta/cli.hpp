#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "attracta/certifier.hpp"
#include "attracta/config.hpp"

namespace attracta::cli {

enum ExitCode : int {
    kOk = 0,
    kNotCertified = 1,
    kIntegrationFailure = 2,
    kInvalidConfig = 3,
    kInconclusive = 4,
};

struct Options {
    std::string config;
    std::optional<double> t_end;
    std::optional<std::string> out;
    std::optional<double> resample;
    std::string method = "auto";
    std::uint64_t seed = kDefaultSeed;
    double tol = 1e-3;
    unsigned jobs = 1;
    /// Include wall-clock times in outputs (breaks byte-for-byte reproducibility).
    bool timing = false;
    /// Sweep: delay family and parameter grid ("0.5,1,2" or "lo:hi:n").
    std::string family = "constant";
    std::string grid = "1";
    /// Reproduce: example id.
    std::string example;
};

/// Horizon at which sweep convergence is judged: max(200, 40 x lag), where a
/// proportional lag rho*t counts as ln(1/rho) in the time variable ln t,
/// i.e. contributes (1/rho)^40, capped at 2e6.
double sweep_horizon(const DelaySystem& system);

/// Family member at parameter p: constant lag p, proportional lag p*t, or
/// uniform density on [t - p, t].
DelayDistribution family_member(const std::string& family, double p);

std::vector<double> parse_grid(const std::string& spec);

struct RunOutcome {
    std::string label;
    double horizon = 0.0;
    bool converged = false;
    double final_error = 0.0;
    std::optional<double> time_to_tolerance;
    std::string status = "ok";
    double wall_time = 0.0;
};

/// Integrates to the sweep horizon and judges convergence to `target` (the
/// build's equilibrium unless given)
/// (sup error <= tol over the final 5 time units). Errors land in `status`.
RunOutcome run_to_horizon(const LoadedConfig& cfg, const std::string& label, double tol);
RunOutcome run_to_horizon(const LoadedConfig& cfg, const std::string& label,
                          std::span<const double> target, double tol);

/// Sup over the history window of |Phi_i - z_i|, per component.
Vector history_distance(const HistoryFunction& history, std::span<const double> z);

int cmd_simulate(const Options& opts, std::ostream& out, std::ostream& err);
int cmd_certify(const Options& opts, std::ostream& out, std::ostream& err);
int cmd_reproduce(const Options& opts, std::ostream& out, std::ostream& err);
int cmd_sweep(const Options& opts, std::ostream& out, std::ostream& err);

/// Built-in configuration of a worked example ("example1".."example4", "remark_L").
nlohmann::json example_config(const std::string& id);

}  // namespace attracta::cli
