#include "dys/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>
#include <thread>

#include "dys/rng.hpp"
#include "dys/svg.hpp"

namespace dys {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

PenaltyKind parse_penalty(const std::string& name) {
    if (name == "l1") return PenaltyKind::L1;
    if (name == "mcp") return PenaltyKind::Mcp;
    if (name == "scad") return PenaltyKind::Scad;
    throw ParameterOutOfRange("unknown penalty: " + name);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string());
    os << content;
}

std::filesystem::path prepare_out_dir(const ExperimentConfig& cfg) {
    std::filesystem::path dir(cfg.out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "config.json", config_to_json(cfg).dump(2) + "\n");
    return dir;
}

}  // namespace

double ExperimentConfig::resolved_theta() const {
    if (theta > 0.0) return theta;
    return penalty == "scad" ? 3.7 : 3.0;
}

std::pair<double, double> ExperimentConfig::init_box() const {
    if (init_hi > init_lo) return {init_lo, init_hi};
    if (instance == "saddle") return {-2.0, 2.0};
    return {-3.0, 3.0};
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("instance", c.instance);
    get("m", c.m);
    get("d", c.d);
    get("mu", c.mu);
    get("nu", c.nu);
    get("penalty", c.penalty);
    get("theta", c.theta);
    get("sparsity", c.sparsity);
    get("collinear_pairs", c.collinear_pairs);
    get("noise_sd", c.noise_sd);
    get("instance_seed", c.instance_seed);
    get("lasso_a", c.lasso_a);
    get("lasso_tau", c.lasso_tau);
    get("gamma_mode", c.gamma_mode);
    get("gamma", c.gamma);
    get("lambda", c.lambda);
    get("alpha_mode", c.alpha_mode);
    get("alpha_fraction", c.alpha_fraction);
    get("alpha", c.alpha);
    get("rel_tol", c.rel_tol);
    get("max_iter", c.max_iter);
    get("n_starts", c.n_starts);
    get("init_lo", c.init_lo);
    get("init_hi", c.init_hi);
    get("master_seed", c.master_seed);
    get("jobs", c.jobs);
    get("out_dir", c.out_dir);
    get("plot_range", c.plot_range);
    get("plot_penalties", c.plot_penalties);
    return c;
}

nlohmann::json config_to_json(const ExperimentConfig& c) {
    return nlohmann::json{{"instance", c.instance},
                          {"m", c.m},
                          {"d", c.d},
                          {"mu", c.mu},
                          {"nu", c.nu},
                          {"penalty", c.penalty},
                          {"theta", c.resolved_theta()},
                          {"sparsity", c.sparsity},
                          {"collinear_pairs", c.collinear_pairs},
                          {"noise_sd", c.noise_sd},
                          {"instance_seed", c.instance_seed},
                          {"lasso_a", c.lasso_a},
                          {"lasso_tau", c.lasso_tau},
                          {"gamma_mode", c.gamma_mode},
                          {"gamma", c.gamma},
                          {"lambda", c.lambda},
                          {"alpha_mode", c.alpha_mode},
                          {"alpha_fraction", c.alpha_fraction},
                          {"alpha", c.alpha},
                          {"rel_tol", c.rel_tol},
                          {"max_iter", c.max_iter},
                          {"n_starts", c.n_starts},
                          {"init_lo", c.init_box().first},
                          {"init_hi", c.init_box().second},
                          {"master_seed", c.master_seed},
                          {"jobs", c.jobs},
                          {"out_dir", c.out_dir},
                          {"plot_range", c.plot_range},
                          {"plot_penalties", c.plot_penalties}};
}

ResolvedSetup resolve_setup(const ExperimentConfig& cfg) {
    nlohmann::json meta;
    Eigen::VectorXd x_true;
    std::optional<Problem> built;

    if (cfg.instance == "elastic_net") {
        const auto inst =
            gen_elastic_net(cfg.m, cfg.d, cfg.mu, cfg.nu, parse_penalty(cfg.penalty),
                            cfg.resolved_theta(), cfg.sparsity, cfg.collinear_pairs, cfg.noise_sd,
                            cfg.instance_seed);
        built.emplace(as_problem(inst));
        x_true = inst.x_true;
        meta["instance"] = {{"type", "elastic_net"},
                            {"m", cfg.m},
                            {"d", cfg.d},
                            {"mu", cfg.mu},
                            {"nu", cfg.nu},
                            {"penalty", cfg.penalty},
                            {"theta", cfg.resolved_theta()},
                            {"sparsity", cfg.sparsity},
                            {"collinear_pairs", cfg.collinear_pairs},
                            {"noise_sd", cfg.noise_sd},
                            {"seed", cfg.instance_seed}};
    } else if (cfg.instance == "saddle") {
        auto toy = gen_saddle_toy();
        built.emplace(toy.problem);
        x_true = toy.min_plus;
        meta["instance"] = {{"type", "saddle"}, {"box_radius", toy.box_radius}};
    } else if (cfg.instance == "lasso1d") {
        auto lasso = known_lasso_1d(cfg.lasso_a, cfg.lasso_tau);
        built.emplace(lasso.problem);
        x_true = Eigen::VectorXd::Constant(1, lasso.x_star);
        meta["instance"] = {{"type", "lasso1d"}, {"a", cfg.lasso_a}, {"tau", cfg.lasso_tau}};
    } else {
        throw ParameterOutOfRange("unknown instance: " + cfg.instance);
    }

    ResolvedSetup setup{std::move(*built), std::move(x_true), 0.0, SolverConfig{}, 0.0,
                        std::nullopt, EscapeCertificate{}, {}, {}};
    const Problem& p = setup.problem;
    setup.target_value = p.value(setup.x_true);

    // Resolve gamma, then alpha from the escape bound at that gamma.
    // "certified" with fractional alpha is circular (the descent bound
    // depends on alpha), so it is run as a short fixed-point iteration
    // and validated at the final pair.
    double alpha = (cfg.alpha_mode == "explicit") ? cfg.alpha : 0.5;
    double gamma = 0.0;
    for (int pass = 0; pass < 3; ++pass) {
        if (cfg.gamma_mode == "practical") {
            gamma = practical_gamma(p.lf(), p.lh(), p.rho_g());
        } else if (cfg.gamma_mode == "certified") {
            const auto cert = descent_bounds(make_constants(p, cfg.lambda, alpha));
            gamma = 0.9 * std::min(cert.gamma_max, p.max_gamma_operators());
        } else if (cfg.gamma_mode == "explicit") {
            gamma = cfg.gamma;
        } else {
            throw ParameterOutOfRange("unknown gamma_mode: " + cfg.gamma_mode);
        }
        if (cfg.alpha_mode == "explicit") {
            alpha = cfg.alpha;
        } else if (cfg.alpha_mode == "fraction") {
            const auto ec = escape_bounds(make_constants(p, cfg.lambda, 0.5), gamma);
            alpha = cfg.alpha_fraction * ec.alpha_max;
        } else {
            throw ParameterOutOfRange("unknown alpha_mode: " + cfg.alpha_mode);
        }
        if (cfg.gamma_mode != "certified") break;
    }

    setup.solver.gamma = gamma;
    setup.solver.lambda = cfg.lambda;
    setup.solver.alpha = alpha;
    setup.solver.rel_tol = cfg.rel_tol;
    setup.solver.max_iter = cfg.max_iter;
    setup.solver.validate(p);

    setup.escape = escape_bounds(make_constants(p, cfg.lambda, std::min(alpha, 0.999)), gamma);
    setup.alpha_max = setup.escape.alpha_max;
    if (alpha >= setup.alpha_max)
        setup.warnings.push_back("alpha exceeds the escape bound 1/L2; saddle avoidance is not "
                                 "guaranteed for this run");
    try {
        setup.descent = descent_bounds(make_constants(p, cfg.lambda, std::min(alpha, 1.0)));
    } catch (const std::exception&) {
        setup.descent.reset();
    }

    meta["constants"] = {{"lf", p.lf()}, {"lh", p.lh()}, {"rho_f", p.rho_f()},
                         {"rho_g", p.rho_g()}};
    meta["solver"] = {{"gamma", gamma},       {"lambda", cfg.lambda}, {"alpha", alpha},
                      {"alpha_max", setup.alpha_max}, {"rel_tol", cfg.rel_tol},
                      {"max_iter", cfg.max_iter}};
    meta["target_value"] = setup.target_value;
    setup.metadata = std::move(meta);
    return setup;
}

namespace {

StartRow evaluate_run(const ResolvedSetup& setup, int start_id, std::uint64_t seed,
                      const IterateTrace& trace) {
    StartRow row;
    row.start_id = start_id;
    row.seed = seed;
    row.iters = trace.iters;
    row.status = trace.status == RunStatus::Converged ? "converged" : "max_iter";
    row.final_objective = setup.problem.value(trace.x_final);
    row.final_envelope = dy_envelope(setup.problem, setup.solver.gamma, trace.x_final);
    row.final_residual = stationarity_residual(setup.problem, setup.solver.gamma, trace.x_final);
    row.dist_to_true = (trace.x_final - setup.x_true).norm();
    return row;
}

Eigen::VectorXd draw_start(const ResolvedSetup& setup, const ExperimentConfig& cfg,
                           std::uint64_t seed) {
    const auto [lo, hi] = cfg.init_box();
    Rng rng(seed);
    Eigen::VectorXd x0(setup.problem.dim());
    for (Eigen::Index i = 0; i < x0.size(); ++i) x0[i] = rng.uniform(lo, hi);
    return x0;
}

/// Runs body(i) for i in [0, n) on cfg.jobs threads.
void parallel_for(int n, int jobs, const std::function<void(int)>& body) {
    jobs = std::max(1, jobs);
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (int w = 0; w < jobs; ++w) {
        workers.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    }
    for (auto& t : workers) t.join();
}

std::string rows_csv(const std::vector<StartRow>& rows) {
    std::string out = "start_id,seed,iters,status,final_objective,final_envelope,final_residual,"
                      "dist_to_true\n";
    for (const auto& r : rows) {
        out += std::to_string(r.start_id) + "," + std::to_string(r.seed) + "," +
               std::to_string(r.iters) + "," + r.status + "," + fmt(r.final_objective) + "," +
               fmt(r.final_envelope) + "," + fmt(r.final_residual) + "," + fmt(r.dist_to_true) +
               "\n";
    }
    return out;
}

}  // namespace

ExperimentReport run_multistart(const ResolvedSetup& setup, const ExperimentConfig& cfg) {
    if (cfg.n_starts < 1) throw ParameterOutOfRange("multistart: n_starts must be >= 1");
    ExperimentReport report;
    report.rows.resize(cfg.n_starts);
    report.target_value = setup.target_value;
    std::vector<Eigen::VectorXd> finals(cfg.n_starts);

    SolverConfig solver = setup.solver;
    solver.record_envelope = false;  // envelope evaluated once per run at the end

    // Warm the prox factorization before the threads race for it.
    setup.problem.f->prox(solver.gamma, Eigen::VectorXd::Zero(setup.problem.dim()));

    parallel_for(cfg.n_starts, cfg.jobs, [&](int i) {
        const std::uint64_t seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(i));
        try {
            const auto trace = run(setup.problem, solver, draw_start(setup, cfg, seed));
            report.rows[i] = evaluate_run(setup, i, seed, trace);
            finals[i] = trace.x_final;
        } catch (const std::exception&) {
            report.rows[i] = StartRow{};
            report.rows[i].start_id = i;
            report.rows[i].seed = seed;
            report.rows[i].status = "failed";
        }
    });

    long completed = 0, leq_target = 0, leq_1p1 = 0;
    std::vector<long> iter_counts;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < cfg.n_starts; ++i) {
        const auto& r = report.rows[i];
        if (r.status == "failed") continue;
        ++completed;
        iter_counts.push_back(r.iters);
        if (r.final_objective <= report.target_value) ++leq_target;
        if (r.final_objective <= 1.1 * report.target_value) ++leq_1p1;
        if (r.final_objective < best) {
            best = r.final_objective;
            report.best_x = finals[i];
        }
    }
    if (completed > 0) {
        report.pct_leq_target = 100.0 * static_cast<double>(leq_target) / completed;
        report.pct_leq_1p1_target = 100.0 * static_cast<double>(leq_1p1) / completed;
        std::sort(iter_counts.begin(), iter_counts.end());
        const std::size_t n = iter_counts.size();
        report.median_iters = (n % 2 == 1)
                                  ? static_cast<double>(iter_counts[n / 2])
                                  : 0.5 * (iter_counts[n / 2 - 1] + iter_counts[n / 2]);
    }
    return report;
}

EscapeReport run_escape(const ResolvedSetup& setup, const SaddleToy& toy,
                        const ExperimentConfig& cfg) {
    EscapeReport report;
    report.endpoints.resize(cfg.n_starts);
    std::vector<int> kind(cfg.n_starts, 3);

    parallel_for(cfg.n_starts, cfg.jobs, [&](int i) {
        const std::uint64_t seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(i));
        SolverConfig solver = setup.solver;
        solver.record_envelope = false;
        try {
            const auto trace = run(setup.problem, solver, draw_start(setup, cfg, seed));
            const Eigen::Vector2d end = trace.x_final;
            report.endpoints[i] = end;
            const double tol = 1e-3;
            if ((end - toy.min_plus).norm() <= tol)
                kind[i] = 0;
            else if ((end - toy.min_minus).norm() <= tol)
                kind[i] = 1;
            else if ((end - toy.saddle).norm() <= tol)
                kind[i] = 2;
            else
                kind[i] = 3;
        } catch (const std::exception&) {
            report.endpoints[i].setZero();
            kind[i] = 3;
        }
    });

    for (int k : kind) {
        if (k == 0) ++report.to_min_plus;
        else if (k == 1) ++report.to_min_minus;
        else if (k == 2) ++report.to_saddle;
        else ++report.unresolved;
    }
    return report;
}

int cmd_solve(const ExperimentConfig& cfg, std::ostream& log) {
    const auto setup = resolve_setup(cfg);
    const auto dir = prepare_out_dir(cfg);
    write_file(dir / "instance.json", setup.metadata.dump(2) + "\n");
    for (const auto& w : setup.warnings) log << "warning: " << w << "\n";

    const std::uint64_t seed = derive_seed(cfg.master_seed, 0);
    const auto trace = run(setup.problem, setup.solver, draw_start(setup, cfg, seed));

    std::ofstream trace_os(dir / "trace.csv", std::ios::binary);
    trace.write_csv(trace_os);
    trace_os.close();

    std::string sol = "i,x\n";
    for (Eigen::Index i = 0; i < trace.x_final.size(); ++i)
        sol += std::to_string(i) + "," + fmt(trace.x_final[i]) + "\n";
    write_file(dir / "solution.csv", sol);

    const auto row = evaluate_run(setup, 0, seed, trace);
    nlohmann::json summary{{"status", row.status},
                           {"iters", row.iters},
                           {"final_objective", row.final_objective},
                           {"final_envelope", row.final_envelope},
                           {"final_residual", row.final_residual},
                           {"dist_to_true", row.dist_to_true},
                           {"target_value", setup.target_value},
                           {"warnings", setup.warnings}};
    write_file(dir / "summary.json", summary.dump(2) + "\n");

    log << "solve: " << row.status << " after " << row.iters
        << " iterations, objective " << row.final_objective << "\n";
    return trace.status == RunStatus::Converged ? 0 : 2;
}

int cmd_multistart(const ExperimentConfig& cfg, std::ostream& log) {
    const auto setup = resolve_setup(cfg);
    const auto dir = prepare_out_dir(cfg);
    write_file(dir / "instance.json", setup.metadata.dump(2) + "\n");
    for (const auto& w : setup.warnings) log << "warning: " << w << "\n";

    const auto report = run_multistart(setup, cfg);
    write_file(dir / "rows.csv", rows_csv(report.rows));

    nlohmann::json agg{{"target_value", report.target_value},
                       {"pct_leq_target", report.pct_leq_target},
                       {"pct_leq_1p1_target", report.pct_leq_1p1_target},
                       {"median_iters", report.median_iters}};
    write_file(dir / "aggregates.json", agg.dump(2) + "\n");

    // Final objectives per start with the target value as a horizontal rule.
    {
        double lo = report.target_value, hi = report.target_value;
        std::vector<double> xs, ys;
        for (const auto& r : report.rows) {
            if (r.status == "failed") continue;
            xs.push_back(r.start_id);
            ys.push_back(r.final_objective);
            lo = std::min(lo, r.final_objective);
            hi = std::max(hi, r.final_objective);
        }
        const double pad = 0.05 * (hi - lo);
        SvgPlot plot(0.0, static_cast<double>(cfg.n_starts), lo - pad, hi + pad, "start",
                     "final objective");
        plot.points(xs, ys, "steelblue", 2.0);
        plot.hline(report.target_value, "orange", 2.0);
        write_file(dir / "objectives.svg", plot.str());
    }

    // Best recovered vector against the reference vector.
    if (report.best_x.size() > 0) {
        double lo = 0.0, hi = 0.0;
        for (Eigen::Index i = 0; i < report.best_x.size(); ++i) {
            lo = std::min({lo, report.best_x[i], setup.x_true[i]});
            hi = std::max({hi, report.best_x[i], setup.x_true[i]});
        }
        SvgPlot plot(-1.0, static_cast<double>(report.best_x.size()), lo - 0.2, hi + 0.2,
                     "coordinate", "value");
        plot.hline(0.0, "gray", 1.0);
        std::vector<double> xs, true_ys, best_ys;
        for (Eigen::Index i = 0; i < report.best_x.size(); ++i) {
            xs.push_back(static_cast<double>(i));
            true_ys.push_back(setup.x_true[i]);
            best_ys.push_back(report.best_x[i]);
            plot.stem(static_cast<double>(i), report.best_x[i], "firebrick", 1.0);
        }
        plot.points(xs, true_ys, "steelblue", 3.0);
        plot.points(xs, best_ys, "firebrick", 2.0);
        write_file(dir / "best_solution.svg", plot.str());
    }

    log << "multistart: " << report.rows.size() << " starts, "
        << report.pct_leq_target << "% <= target, " << report.pct_leq_1p1_target
        << "% <= 1.1*target (target " << report.target_value << ")\n";
    return 0;
}

int cmd_certify(const ExperimentConfig& cfg, std::ostream& log) {
    const auto setup = resolve_setup(cfg);
    const auto dir = prepare_out_dir(cfg);
    write_file(dir / "instance.json", setup.metadata.dump(2) + "\n");
    if (!setup.descent) throw NoCertificate("certify: descent certificate unavailable");

    const auto report =
        certificate_report(*setup.descent, setup.escape, setup.solver.gamma);
    write_file(dir / "certificate.json", report.dump(2) + "\n");

    const Problem& p = setup.problem;
    const double pg = practical_gamma(p.lf(), p.lh(), p.rho_g());
    log << "certified gamma_max = " << setup.descent->gamma_max << " ("
        << (setup.descent->case_used == DescentCertificate::Case::One ? "case one" : "case two")
        << "), practical gamma = " << pg << ", ratio practical/certified = "
        << pg / setup.descent->gamma_max << "\n";
    log << "escape bound: alpha_max = " << setup.alpha_max << " at gamma = "
        << setup.solver.gamma << "\n";
    return 0;
}

int cmd_escape(const ExperimentConfig& cfg, std::ostream& log) {
    if (cfg.instance != "saddle")
        throw ParameterOutOfRange("escape: requires the saddle toy instance");
    const auto setup = resolve_setup(cfg);
    if (setup.solver.alpha >= setup.alpha_max)
        throw ParameterOutOfRange("escape: alpha must be strictly below the escape bound");
    const auto dir = prepare_out_dir(cfg);
    write_file(dir / "instance.json", setup.metadata.dump(2) + "\n");

    const auto toy = gen_saddle_toy();
    const auto report = run_escape(setup, toy, cfg);

    nlohmann::json j{{"to_min_plus", report.to_min_plus},
                     {"to_min_minus", report.to_min_minus},
                     {"to_saddle", report.to_saddle},
                     {"unresolved", report.unresolved},
                     {"n_starts", cfg.n_starts}};
    write_file(dir / "escape.json", j.dump(2) + "\n");

    SvgPlot plot(-toy.box_radius, toy.box_radius, -toy.box_radius, toy.box_radius, "x1", "x2");
    std::vector<double> xs, ys;
    for (const auto& e : report.endpoints) {
        xs.push_back(e.x());
        ys.push_back(e.y());
    }
    plot.points(xs, ys, "steelblue", 2.0);
    write_file(dir / "endpoints.svg", plot.str());

    log << "escape: " << report.to_min_plus << " -> (0,+1), " << report.to_min_minus
        << " -> (0,-1), " << report.to_saddle << " -> saddle, " << report.unresolved
        << " unresolved\n";
    return 0;
}

int cmd_penalty_plot(const ExperimentConfig& cfg, std::ostream& log) {
    const auto dir = prepare_out_dir(cfg);
    const double r = cfg.plot_range;
    const int n = 401;

    double ymax = 0.0;
    std::vector<std::pair<std::string, ProxTerm>> curves;
    for (const auto& name : cfg.plot_penalties) {
        if (name == "l1") curves.emplace_back("black", ProxTerm::l1(1.0));
        else if (name == "mcp") curves.emplace_back("firebrick", ProxTerm::mcp(1.0, 3.0));
        else if (name == "scad") curves.emplace_back("steelblue", ProxTerm::scad(1.0, 3.7));
        else throw ParameterOutOfRange("penalty-plot: unknown penalty " + name);
    }
    std::vector<double> ts(n);
    for (int i = 0; i < n; ++i) ts[i] = -r + 2.0 * r * i / (n - 1);
    std::vector<std::vector<double>> values;
    for (const auto& [color, term] : curves) {
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i) {
            v[i] = penalty_value(term, ts[i]);
            ymax = std::max(ymax, v[i]);
        }
        values.push_back(std::move(v));
    }

    SvgPlot plot(-r, r, 0.0, ymax * 1.05, "t", "penalty");
    for (std::size_t c = 0; c < curves.size(); ++c)
        plot.polyline(ts, values[c], curves[c].first);
    write_file(dir / "penalties.svg", plot.str());
    log << "penalty-plot: wrote " << (dir / "penalties.svg").string() << "\n";
    return 0;
}

}  // namespace dys
