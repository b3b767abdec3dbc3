#include <CLI11.hpp>
#include <iostream>
#include <sstream>

#include "airfl/experiment.hpp"
#include "airfl/flcore.hpp"

namespace {

std::vector<std::uint64_t> parse_seed_list(const std::string& s) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) seeds.push_back(std::stoull(tok));
    return seeds;
}

// metrics.csv -> metrics_seed7.csv
std::string with_seed_suffix(const std::string& path, std::uint64_t seed) {
    const auto dot = path.rfind('.');
    const std::string suffix = "_seed" + std::to_string(seed);
    if (dot == std::string::npos) return path + suffix;
    return path.substr(0, dot) + suffix + path.substr(dot);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Over-the-air federated learning simulator"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run an FL-over-AirComp experiment");
    std::string config_path, policy, out_path = "metrics.csv";
    std::string geometry_out, checkpoint_out, seeds_arg;
    std::uint64_t seed = 0;
    bool seed_given = false, desk = false;
    run->add_option("--config", config_path, "key = value config file");
    run->add_option("--policy", policy,
                    "channel | update | hybrid | random_channel | random_update");
    run->add_option("--seed", seed, "master seed")->each([&](const std::string&) {
        seed_given = true;
    });
    run->add_option("--seeds", seeds_arg, "comma-separated seeds, one CSV per seed");
    run->add_option("--out", out_path, "metrics CSV path");
    run->add_flag("--desk", desk, "desk-scale preset (M=50, K=5, W=10, T=30)");
    run->add_option("--geometry-out", geometry_out, "user geometry CSV path");
    run->add_option("--checkpoint-out", checkpoint_out, "final model checkpoint path");

    CLI11_PARSE(app, argc, argv);

    airfl::SimConfig cfg;
    try {
        if (!config_path.empty()) cfg = airfl::parse_config_file(config_path);
        if (desk) cfg.apply_desk_preset();
        if (!policy.empty()) cfg.policy = policy;  // flags override the file
        if (seed_given) cfg.seed = seed;
        cfg.validate();
    } catch (const airfl::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    std::vector<std::uint64_t> seeds = {cfg.seed};
    bool multi = false;
    if (!seeds_arg.empty()) {
        seeds = parse_seed_list(seeds_arg);
        multi = seeds.size() > 1;
    }

    try {
        for (std::uint64_t s : seeds) {
            airfl::SimConfig run_cfg = cfg;
            run_cfg.seed = s;
            const airfl::ExperimentData data = airfl::prepare_data(run_cfg);
            const airfl::ExperimentResult result = airfl::run_experiment(run_cfg, data);
            const std::string out = multi ? with_seed_suffix(out_path, s) : out_path;
            airfl::emit_metrics(result.metrics, out);
            if (!geometry_out.empty()) airfl::emit_geometry(result.geometry, geometry_out);
            if (!checkpoint_out.empty()) {
                airfl::save_checkpoint(result.final_model,
                                       multi ? with_seed_suffix(checkpoint_out, s)
                                             : checkpoint_out);
            }
            if (!result.metrics.empty()) {
                const auto& last = result.metrics.back();
                std::cout << "seed " << s << ": " << last.round + 1 << " rounds, final accuracy "
                          << last.test_accuracy << ", wrote " << out << "\n";
            } else {
                std::cout << "seed " << s << ": 0 rounds, wrote " << out << "\n";
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
