#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "airfl/experiment.hpp"

using namespace airfl;

namespace {

SimConfig tiny_config(const std::string& policy) {
    SimConfig cfg;
    cfg.num_users = 4;
    cfg.num_selected = 2;
    cfg.num_candidates = 3;
    cfg.antennas = 2;
    cfg.rounds = 2;
    cfg.policy = policy;
    cfg.input_dim = 64;
    cfg.num_classes = 2;
    cfg.hidden = {8};
    cfg.classes_per_user = 2;
    cfg.size_spread = 2.0;
    cfg.synthetic_samples = 200;
    cfg.seed = 42;
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("config defaults match the operating point") {
    SimConfig cfg;
    CHECK(cfg.num_users == 1000);
    CHECK(cfg.num_selected == 10);
    CHECK(cfg.num_candidates == 20);
    CHECK(cfg.antennas == 4);
    CHECK(cfg.snr_db == 42.0);
    CHECK(cfg.alpha == 3.0);
    CHECK(cfg.cell_radius == 500.0);
    CHECK(cfg.rounds == 60);
    CHECK(cfg.train.learning_rate == 0.01);
    CHECK(cfg.train.batch_size == 10);
    CHECK(cfg.train_fraction == 0.9);
    CHECK(cfg.sigma2() == doctest::Approx(std::pow(10.0, -4.2)));
    cfg.validate();
}

TEST_CASE("desk preset") {
    SimConfig cfg;
    cfg.apply_desk_preset();
    CHECK(cfg.num_users == 50);
    CHECK(cfg.num_selected == 5);
    CHECK(cfg.num_candidates == 10);
    CHECK(cfg.rounds == 30);
    CHECK(cfg.max_train_samples == 10000);
    cfg.validate();
}

TEST_CASE("config file parsing, overrides, and errors") {
    const std::string path = "/tmp/airfl_test_cfg.txt";
    {
        std::ofstream out(path);
        out << "# comment line\n";
        out << "M = 50\n";
        out << "K = 5\n";
        out << "W = 10\n";
        out << "seed = 3\n";
        out << "policy = channel\n";
    }
    SimConfig cfg = parse_config_file(path);
    CHECK(cfg.num_users == 50);
    CHECK(cfg.seed == 3);
    CHECK(cfg.policy == "channel");
    // flag-style override wins
    apply_config_line(cfg, "seed", "7");
    CHECK(cfg.seed == 7);

    {
        std::ofstream out(path);
        out << "qqq = 1\n";
    }
    CHECK_THROWS_WITH_AS(parse_config_file(path), doctest::Contains("unknown-key"),
                         ConfigError);
    {
        std::ofstream out(path);
        out << "M = fifty\n";
    }
    CHECK_THROWS_WITH_AS(parse_config_file(path), doctest::Contains("type-error"),
                         ConfigError);

    SimConfig bad;
    bad.num_selected = 30;
    bad.num_candidates = 20;
    CHECK_THROWS_WITH_AS(bad.validate(), doctest::Contains("constraint-violation"),
                         ConfigError);
    std::remove(path.c_str());
}

TEST_CASE("derive_seeds is stable, tag-sensitive, and decorrelated") {
    CHECK(derive_seed(1, 2, "noise") == derive_seed(1, 2, "noise"));
    CHECK(derive_seed(1, 2, "noise") != derive_seed(1, 2, "channel"));
    CHECK(derive_seed(1, 2, "noise") != derive_seed(1, 3, "noise"));

    Rng a(derive_seed(9, 0, "noise")), b(derive_seed(9, 0, "train"));
    const int n = 100000;
    double sxy = 0, sx = 0, sy = 0, sxx = 0, syy = 0;
    for (int i = 0; i < n; ++i) {
        const double x = a.gaussian(), y = b.gaussian();
        sxy += x * y;
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
    }
    const double corr =
        (sxy / n - sx / n * sy / n) /
        std::sqrt((sxx / n - sx * sx / double(n) / n) * (syy / n - sy * sy / double(n) / n));
    CHECK(std::abs(corr) < 0.01);
}

TEST_CASE("T = 0 leaves the model at its initialization") {
    SimConfig cfg = tiny_config("random_channel");
    cfg.rounds = 0;
    const auto data = prepare_data(cfg);
    const auto result = run_experiment(cfg, data);
    CHECK(result.metrics.empty());
    Rng init_rng = derive_stream(cfg.seed, 0, "init");
    const ModelState fresh = init_model(cfg.architecture(), init_rng);
    CHECK(result.final_model.theta == fresh.theta);
}

TEST_CASE("paired channel fairness: policies see identical channels") {
    SimConfig cfg = tiny_config("channel");
    const auto data = prepare_data(cfg);
    // the channel stream depends only on (seed, round)
    for (int t = 0; t < cfg.rounds; ++t) {
        Rng ra = derive_stream(cfg.seed, t, "channel");
        Rng rb = derive_stream(cfg.seed, t, "channel");
        Rng geo_a = derive_stream(cfg.seed, 0, "geometry");
        Rng geo_b = derive_stream(cfg.seed, 0, "geometry");
        const auto ga = place_users(cfg.num_users, cfg.cell_radius, cfg.min_distance, geo_a);
        const auto gb = place_users(cfg.num_users, cfg.cell_radius, cfg.min_distance, geo_b);
        const auto ha = draw_channels(ga, cfg.antennas, cfg.alpha, ra, t);
        const auto hb = draw_channels(gb, cfg.antennas, cfg.alpha, rb, t);
        for (int u = 0; u < cfg.num_users; ++u) CHECK(ha.vectors[u] == hb.vectors[u]);
    }
}

TEST_CASE("cost ledgers reconcile over all rounds for every policy") {
    for (const std::string policy :
         {"channel", "update", "hybrid", "random_channel", "random_update"}) {
        SimConfig cfg = tiny_config(policy);
        cfg.rounds = 3;
        const auto data = prepare_data(cfg);
        const auto result = run_experiment(cfg, data);
        CostLedger total;
        for (const auto& m : result.metrics) total += m.costs;
        const long M = cfg.num_users, K = cfg.num_selected, W = cfg.num_candidates,
                   T = cfg.rounds;
        CostLedger expected;
        if (policy == "channel") expected = {T * M, T * K, T * K};
        else if (policy == "update") expected = {T * K, T * K, T * M};
        else if (policy == "hybrid") expected = {T * M, T * K, T * W};
        else if (policy == "random_channel") expected = {T * M, T * K, T * K};
        else expected = {T * K, T * K, T * M};
        CHECK(total == expected);
    }
}

TEST_CASE("metric sanity across a short run") {
    SimConfig cfg = tiny_config("hybrid");
    cfg.rounds = 3;
    const auto data = prepare_data(cfg);
    const auto result = run_experiment(cfg, data);
    REQUIRE(result.metrics.size() == 3);
    for (const auto& m : result.metrics) {
        CHECK(m.test_accuracy >= 0.0);
        CHECK(m.test_accuracy <= 1.0);
        CHECK(m.mse_closed_form > 0.0);  // sigma^2 > 0 and users transmit
        CHECK(m.tau > 0.0);
        CHECK(m.selected.size() == 2);
    }
}

TEST_CASE("emit_metrics format and round trip") {
    RoundMetrics m;
    m.round = 0;
    m.policy = "channel";
    m.test_accuracy = 0.5;
    m.test_loss = 1.25;
    m.mse_closed_form = 0.001953125;
    m.tau = 2.0;
    m.selected = {1, 2, 3};
    m.costs = {50, 5, 5};
    m.wall_ms = 12.5;
    const std::string path = "/tmp/airfl_test_metrics.csv";

    emit_metrics({}, path);
    CHECK(slurp(path) ==
          "round,policy,test_accuracy,test_loss,mse_closed_form,tau,num_selected,"
          "probe_count,upload_count,compute_count,wall_ms\n");

    emit_metrics({m}, path);
    CHECK(slurp(path) ==
          "round,policy,test_accuracy,test_loss,mse_closed_form,tau,num_selected,"
          "probe_count,upload_count,compute_count,wall_ms\n"
          "0,channel,0.5,1.25,0.001953125,2,3,50,5,5,12.5\n");

    const auto back = parse_metrics(path);
    REQUIRE(back.size() == 1);
    CHECK(back[0].round == m.round);
    CHECK(back[0].policy == m.policy);
    CHECK(back[0].test_accuracy == m.test_accuracy);
    CHECK(back[0].test_loss == m.test_loss);
    CHECK(back[0].mse_closed_form == m.mse_closed_form);
    CHECK(back[0].tau == m.tau);
    CHECK(back[0].selected.size() == m.selected.size());
    CHECK(back[0].costs == m.costs);
    CHECK(back[0].wall_ms == m.wall_ms);
    std::remove(path.c_str());
}

TEST_CASE("same master seed reproduces the run exactly") {
    SimConfig cfg = tiny_config("update");
    const auto data_a = prepare_data(cfg);
    const auto data_b = prepare_data(cfg);
    const auto ra = run_experiment(cfg, data_a);
    const auto rb = run_experiment(cfg, data_b);
    REQUIRE(ra.metrics.size() == rb.metrics.size());
    CHECK(ra.final_model.theta == rb.final_model.theta);
    for (std::size_t i = 0; i < ra.metrics.size(); ++i) {
        CHECK(ra.metrics[i].test_accuracy == rb.metrics[i].test_accuracy);
        CHECK(ra.metrics[i].mse_closed_form == rb.metrics[i].mse_closed_form);
        CHECK(ra.metrics[i].selected == rb.metrics[i].selected);
    }
}

TEST_CASE("geometry dump has one row per user") {
    SimConfig cfg = tiny_config("channel");
    const auto data = prepare_data(cfg);
    const auto result = run_experiment(cfg, data);
    const std::string path = "/tmp/airfl_test_geo.csv";
    emit_geometry(result.geometry, path);
    const std::string text = slurp(path);
    CHECK(text.starts_with("user_id,x_m,y_m,distance_m\n"));
    CHECK(std::count(text.begin(), text.end(), '\n') == cfg.num_users + 1);
    std::remove(path.c_str());
}
