#include "airfl/experiment.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "airfl/aircomp.hpp"
#include "airfl/beamforming.hpp"

namespace airfl {

namespace {

constexpr double kNormCap = 1e8;  // log when the beamformer norm exceeds this

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

Dataset truncate(const Dataset& d, int n) {
    if (n <= 0 || n >= d.size()) return d;
    Dataset out;
    out.features = d.features.leftCols(n);
    out.labels.assign(d.labels.begin(), d.labels.begin() + n);
    return out;
}

}  // namespace

ExperimentData prepare_data(const SimConfig& cfg) {
    ExperimentData data;
    Dataset full;
    if (!cfg.train_images.empty()) {
        full = load_idx(cfg.train_images, cfg.train_labels);
    } else {
        Rng rng = derive_stream(cfg.seed, 0, "data");
        full = cfg.input_dim == 64 ? synthetic_two_class_8x8(cfg.synthetic_samples, rng)
                                   : synthetic_digits_28x28(cfg.synthetic_samples, rng);
    }
    Rng split_rng = derive_stream(cfg.seed, 0, "split");
    auto [train, test] = split(full, cfg.train_fraction, split_rng);
    data.train = truncate(train, cfg.max_train_samples);
    data.test = test;
    Rng part_rng = derive_stream(cfg.seed, 0, "partition");
    data.partition = partition_noniid(data.train, cfg.num_users, cfg.classes_per_user,
                                      cfg.size_spread, part_rng);
    return data;
}

ExperimentResult run_experiment(const SimConfig& cfg, const ExperimentData& data) {
    cfg.validate();
    if (static_cast<int>(data.partition.user_indices.size()) != cfg.num_users) {
        throw std::invalid_argument("partition size does not match M");
    }
    if (data.train.dim() != cfg.input_dim) {
        throw std::invalid_argument("dimension-mismatch: dataset vs input_dim");
    }
    const Policy policy = parse_policy(cfg.policy);
    const Architecture arch = cfg.architecture();
    const Eigen::Index dim = arch.dim();
    const double sigma2 = cfg.sigma2();

    ExperimentResult result;
    {
        Rng geo_rng = derive_stream(cfg.seed, 0, "geometry");
        result.geometry =
            place_users(cfg.num_users, cfg.cell_radius, cfg.min_distance, geo_rng);
    }
    {
        Rng init_rng = derive_stream(cfg.seed, 0, "init");
        result.final_model = init_model(arch, init_rng);
    }
    ModelState& model = result.final_model;

    for (int t = 0; t < cfg.rounds; ++t) {
        const auto t0 = std::chrono::steady_clock::now();
        try {
            Rng chan_rng = derive_stream(cfg.seed, t, "channel");
            const ChannelSet channels =
                draw_channels(result.geometry, cfg.antennas, cfg.alpha, chan_rng, t);
            std::vector<double> gains(cfg.num_users);
            for (int u = 0; u < cfg.num_users; ++u) gains[u] = channel_gain(channels.vectors[u]);

            // Local training on demand; updates cached per user.
            std::vector<UpdateVector> updates(cfg.num_users);
            std::vector<bool> trained(cfg.num_users, false);
            auto train_user = [&](int u) -> const UpdateVector& {
                if (!trained[u]) {
                    Rng rng = derive_stream(cfg.seed, t, "train:" + std::to_string(u));
                    updates[u] = local_train(model, data.train,
                                             data.partition.user_indices[u], cfg.train, rng);
                    trained[u] = true;
                }
                return updates[u];
            };

            ScheduleDecision decision;
            switch (policy) {
                case Policy::Channel:
                    decision = schedule_channel(gains, cfg.num_selected);
                    break;
                case Policy::Update: {
                    std::vector<double> norms(cfg.num_users);
                    for (int u = 0; u < cfg.num_users; ++u) norms[u] = train_user(u).norm;
                    decision = schedule_update(norms, cfg.num_selected);
                    break;
                }
                case Policy::Hybrid:
                    decision = schedule_hybrid(
                        gains, cfg.num_selected, cfg.num_candidates,
                        [&](int u) { return train_user(u).norm; });
                    break;
                case Policy::RandomChannel: {
                    Rng sel = derive_stream(cfg.seed, t, "select");
                    decision = schedule_random(cfg.num_users, cfg.num_selected, sel,
                                               Policy::RandomChannel);
                    break;
                }
                case Policy::RandomUpdate: {
                    for (int u = 0; u < cfg.num_users; ++u) train_user(u);
                    Rng sel = derive_stream(cfg.seed, t, "select");
                    decision = schedule_random(cfg.num_users, cfg.num_selected, sel,
                                               Policy::RandomUpdate);
                    break;
                }
            }
            for (int u : decision.selected) train_user(u);

            // Normalize updates; degenerate users keep their shift term only.
            double total_weight = 0.0;
            double shift_sum = 0.0;
            std::vector<int> air_users;
            std::vector<Eigen::VectorXcd> air_channels;
            std::vector<double> air_phis;
            std::vector<Eigen::VectorXd> air_symbols;
            for (int u : decision.selected) {
                const double weight = cfg.weighting == Weighting::DataSize
                                          ? static_cast<double>(updates[u].data_size)
                                          : 1.0;
                NormalizedUpdate nu = normalize_update(updates[u], weight);
                total_weight += weight;
                shift_sum += nu.shift;
                if (nu.transmits) {
                    air_users.push_back(u);
                    air_channels.push_back(channels.vectors[u]);
                    air_phis.push_back(nu.phi);
                    air_symbols.push_back(std::move(nu.symbols));
                } else {
                    std::cerr << "round " << t << ": user " << u
                              << " has a degenerate update, shift term only\n";
                }
            }

            RoundMetrics rm;
            rm.round = t;
            rm.policy = policy_name(policy);
            rm.selected = decision.selected;
            rm.costs = decision.costs;

            Eigen::VectorXd estimate = Eigen::VectorXd::Zero(dim);
            if (!air_users.empty()) {
                BeamformingInstance inst{air_channels, air_phis};
                const BeamformerSolution sol = solve_receiver(inst);
                if (sol.objective > kNormCap) {
                    std::cerr << "round " << t << ": beamformer norm " << sol.objective
                              << " above cap, constraint " << sol.limiting_constraint
                              << " binds\n";
                }
                const AirCompLink link =
                    build_link(sol.a, air_channels, air_phis, cfg.max_power, sigma2);
                Rng noise_rng = derive_stream(cfg.seed, t, "noise");
                const AggregationResult agg =
                    synthesize_round(link, air_channels, air_symbols, noise_rng);
                estimate = agg.estimate;
                rm.mse_closed_form = agg.closed_form_mse;
                rm.tau = link.tau;
            }
            global_update(model, estimate, shift_sum, total_weight);

            const EvalResult ev = evaluate(model, data.test);
            rm.test_accuracy = ev.accuracy;
            rm.test_loss = ev.loss;
            rm.wall_ms = std::chrono::duration<double, std::milli>(
                             std::chrono::steady_clock::now() - t0)
                             .count();
            result.metrics.push_back(std::move(rm));
        } catch (const std::exception& e) {
            throw std::runtime_error("round " + std::to_string(t) + ": " + e.what());
        }
    }
    return result;
}

void emit_metrics(const std::vector<RoundMetrics>& metrics, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("io-error: cannot open " + path);
    out << "round,policy,test_accuracy,test_loss,mse_closed_form,tau,num_selected,"
           "probe_count,upload_count,compute_count,wall_ms\n";
    for (const auto& m : metrics) {
        out << m.round << ',' << m.policy << ',' << fmt9(m.test_accuracy) << ','
            << fmt9(m.test_loss) << ',' << fmt9(m.mse_closed_form) << ',' << fmt9(m.tau)
            << ',' << m.selected.size() << ',' << m.costs.channel_probe_count << ','
            << m.costs.upload_count << ',' << m.costs.local_compute_count << ','
            << fmt9(m.wall_ms) << '\n';
    }
    if (!out) throw std::runtime_error("io-error: write failed for " + path);
}

std::vector<RoundMetrics> parse_metrics(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("io-error: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("io-error: empty file " + path);
    std::vector<RoundMetrics> out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        RoundMetrics m;
        auto next = [&]() {
            if (!std::getline(ss, tok, ',')) throw std::runtime_error("bad metrics row");
            return tok;
        };
        m.round = std::stoi(next());
        m.policy = next();
        m.test_accuracy = std::stod(next());
        m.test_loss = std::stod(next());
        m.mse_closed_form = std::stod(next());
        m.tau = std::stod(next());
        m.selected.resize(std::stoi(next()));
        m.costs.channel_probe_count = std::stol(next());
        m.costs.upload_count = std::stol(next());
        m.costs.local_compute_count = std::stol(next());
        m.wall_ms = std::stod(next());
        out.push_back(std::move(m));
    }
    return out;
}

void emit_geometry(const UserGeometry& geometry, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("io-error: cannot open " + path);
    out << "user_id,x_m,y_m,distance_m\n";
    for (std::size_t i = 0; i < geometry.positions.size(); ++i) {
        const auto& p = geometry.positions[i];
        out << i << ',' << fmt9(p.x()) << ',' << fmt9(p.y()) << ',' << fmt9(p.norm())
            << '\n';
    }
}

}  // namespace airfl
