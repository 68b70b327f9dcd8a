#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "dys/experiments.hpp"

namespace {

dys::ExperimentConfig load_config(const std::string& path) {
    dys::ExperimentConfig cfg;
    if (!path.empty()) {
        std::ifstream is(path);
        if (!is) throw std::runtime_error("cannot read config file: " + path);
        nlohmann::json j;
        is >> j;
        cfg = dys::config_from_json(j);
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Damped shadow Davis-Yin splitting: solver and benchmark harness"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 0;
    double plot_range = 0.0;
    std::string plot_penalties;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file (defaults cover every field)");
        sub->add_option("--seed", seed, "master seed override")
            ->each([&seed_set](const std::string&) { seed_set = true; });
        sub->add_option("--jobs", jobs, "number of concurrent runs");
        sub->add_option("--out", out_dir, "output directory");
        return sub;
    };

    auto* solve = add_common(app.add_subcommand("solve", "run a single solve"));
    auto* multistart =
        add_common(app.add_subcommand("multistart", "run a multi-start experiment"));
    auto* certify =
        add_common(app.add_subcommand("certify", "report stepsize and damping certificates"));
    auto* escape =
        add_common(app.add_subcommand("escape", "saddle-avoidance Monte Carlo on the 2-D toy"));
    auto* penalty_plot =
        add_common(app.add_subcommand("penalty-plot", "plot the penalty catalog"));
    penalty_plot->add_option("--range", plot_range, "half-width of the plotted interval");
    penalty_plot->add_option("--penalties", plot_penalties,
                             "comma-separated subset of l1,mcp,scad");

    CLI11_PARSE(app, argc, argv);

    try {
        auto cfg = load_config(config_path);
        if (seed_set) cfg.master_seed = seed;
        if (jobs > 0) cfg.jobs = jobs;
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (penalty_plot->parsed()) {
            if (plot_range > 0.0) cfg.plot_range = plot_range;
            if (!plot_penalties.empty()) {
                cfg.plot_penalties.clear();
                std::size_t pos = 0;
                while (pos <= plot_penalties.size()) {
                    const auto comma = plot_penalties.find(',', pos);
                    cfg.plot_penalties.push_back(plot_penalties.substr(
                        pos, comma == std::string::npos ? std::string::npos : comma - pos));
                    if (comma == std::string::npos) break;
                    pos = comma + 1;
                }
            }
        }

        if (solve->parsed()) return dys::cmd_solve(cfg, std::cout);
        if (multistart->parsed()) return dys::cmd_multistart(cfg, std::cout);
        if (certify->parsed()) return dys::cmd_certify(cfg, std::cout);
        if (escape->parsed()) return dys::cmd_escape(cfg, std::cout);
        if (penalty_plot->parsed()) return dys::cmd_penalty_plot(cfg, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
