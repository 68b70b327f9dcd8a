#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dys/problems.hpp"
#include "dys/splitting.hpp"
#include "dys/tuning.hpp"

namespace dys {

/// Full experiment description. Every field has a default matching the
/// benchmark protocol (m=100, d=50, mu=0.5, nu=2/3, 1000 starts,
/// lambda=1, alpha at 0.9 of the escape bound, practical gamma,
/// relative tolerance 1e-6); a config file only overrides what it
/// names.
struct ExperimentConfig {
    // instance selection
    std::string instance = "elastic_net";  // elastic_net | saddle | lasso1d
    int m = 100;
    int d = 50;
    double mu = 0.5;
    double nu = 2.0 / 3.0;
    std::string penalty = "mcp";  // l1 | mcp | scad
    double theta = 0.0;           // 0 = kind default (MCP 3.0, SCAD 3.7)
    int sparsity = 10;
    int collinear_pairs = 5;
    double noise_sd = 0.1;
    std::uint64_t instance_seed = 7;
    double lasso_a = 4.0;
    double lasso_tau = 1.0;

    // solver parameters
    std::string gamma_mode = "practical";  // practical | certified | explicit
    double gamma = 0.0;                    // only read when gamma_mode == explicit
    double lambda = 1.0;
    std::string alpha_mode = "fraction";  // fraction | explicit
    double alpha_fraction = 0.9;          // fraction of the escape bound
    double alpha = 0.0;                   // only read when alpha_mode == explicit
    double rel_tol = 1e-6;
    long max_iter = 100000;

    // multi-start experiment
    int n_starts = 1000;
    double init_lo = 0.0;  // equal bounds = instance default box
    double init_hi = 0.0;
    std::uint64_t master_seed = 20240101;
    int jobs = 1;
    std::string out_dir = "out";

    // penalty plot
    double plot_range = 3.0;
    std::vector<std::string> plot_penalties = {"l1", "mcp", "scad"};

    double resolved_theta() const;
    /// Initialization box, falling back to the instance default.
    std::pair<double, double> init_box() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Instance + solver parameters after resolving gamma and alpha modes.
struct ResolvedSetup {
    Problem problem;
    Eigen::VectorXd x_true;   // reference vector (for saddle: the (0,+1) minimizer)
    double target_value = 0;  // objective at the reference vector
    SolverConfig solver;
    double alpha_max = 0.0;  // escape bound at the resolved gamma
    std::optional<DescentCertificate> descent;
    EscapeCertificate escape;
    std::vector<std::string> warnings;
    nlohmann::json metadata;  // instance parameters and resolved solver values
};

ResolvedSetup resolve_setup(const ExperimentConfig& cfg);

struct StartRow {
    int start_id = 0;
    std::uint64_t seed = 0;
    long iters = 0;
    std::string status;  // converged | max_iter | failed
    double final_objective = 0;
    double final_envelope = 0;
    double final_residual = 0;
    double dist_to_true = 0;
};

struct ExperimentReport {
    std::vector<StartRow> rows;
    double target_value = 0;
    double pct_leq_target = 0;      // percent of completed runs at or below target
    double pct_leq_1p1_target = 0;  // percent at or below 1.1 * target
    double median_iters = 0;
    Eigen::VectorXd best_x;
};

/// n_starts independent runs, deterministic per (master_seed, start_id)
/// and independent of the execution schedule.
ExperimentReport run_multistart(const ResolvedSetup& setup, const ExperimentConfig& cfg);

struct EscapeReport {
    int to_min_plus = 0;
    int to_min_minus = 0;
    int to_saddle = 0;
    int unresolved = 0;
    std::vector<Eigen::Vector2d> endpoints;
};

EscapeReport run_escape(const ResolvedSetup& setup, const SaddleToy& toy,
                        const ExperimentConfig& cfg);

// CLI entry points. Each writes its files under cfg.out_dir and echoes
// the effective config; the returned value is the process exit code
// (solve: 0 converged, 2 max-iter reached, 1 invalid configuration).
int cmd_solve(const ExperimentConfig& cfg, std::ostream& log);
int cmd_multistart(const ExperimentConfig& cfg, std::ostream& log);
int cmd_certify(const ExperimentConfig& cfg, std::ostream& log);
int cmd_escape(const ExperimentConfig& cfg, std::ostream& log);
int cmd_penalty_plot(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace dys
