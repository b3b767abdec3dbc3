#include "airfl/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "airfl/scheduling.hpp"

namespace airfl {

void SimConfig::validate() const {
    if (num_users < 1) throw ConfigError("constraint-violation: M >= 1 required");
    if (num_selected < 1 || num_selected > num_candidates || num_candidates > num_users) {
        throw ConfigError("constraint-violation: require K <= W <= M");
    }
    if (antennas < 1) throw ConfigError("constraint-violation: N >= 1 required");
    if (rounds < 0) throw ConfigError("constraint-violation: T >= 0 required");
    if (!(min_distance > 0.0) || min_distance >= cell_radius) {
        throw ConfigError("constraint-violation: 0 < min_distance < cell_radius");
    }
    if (!(train.learning_rate > 0.0) || train.batch_size < 1 || train.local_epochs < 1) {
        throw ConfigError("constraint-violation: bad training hyperparameters");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("constraint-violation: train_fraction in (0, 1)");
    }
    if (noise_variance >= 0.0 && snr_db_set) {
        const double implied = max_power * std::pow(10.0, -snr_db / 10.0);
        if (std::abs(noise_variance - implied) > 1e-9) {
            throw ConfigError("constraint-violation: sigma2 inconsistent with snr_db");
        }
    }
    try {
        (void)parse_policy(policy);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

void SimConfig::apply_desk_preset() {
    num_users = 50;
    num_selected = 5;
    num_candidates = 10;
    rounds = 30;
    max_train_samples = 10000;
    synthetic_samples = 12000;
}

namespace {

int to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const int x = std::stoi(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("type-error: integer expected for " + key);
    }
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ConfigError("type-error: number expected for " + key);
    }
}

std::vector<int> to_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(to_int(key, tok));
    return out;
}

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

}  // namespace

void apply_config_line(SimConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "M") cfg.num_users = to_int(key, value);
    else if (key == "K") cfg.num_selected = to_int(key, value);
    else if (key == "W") cfg.num_candidates = to_int(key, value);
    else if (key == "N") cfg.antennas = to_int(key, value);
    else if (key == "T") cfg.rounds = to_int(key, value);
    else if (key == "snr_db") {
        cfg.snr_db = to_double(key, value);
        cfg.snr_db_set = true;
    }
    else if (key == "P0") cfg.max_power = to_double(key, value);
    else if (key == "sigma2") cfg.noise_variance = to_double(key, value);
    else if (key == "alpha") cfg.alpha = to_double(key, value);
    else if (key == "cell_radius") cfg.cell_radius = to_double(key, value);
    else if (key == "min_distance") cfg.min_distance = to_double(key, value);
    else if (key == "policy") cfg.policy = value;
    else if (key == "weighting") {
        if (value == "data_size") cfg.weighting = Weighting::DataSize;
        else if (value == "uniform") cfg.weighting = Weighting::Uniform;
        else throw ConfigError("type-error: weighting must be data_size or uniform");
    }
    else if (key == "eta" || key == "learning_rate") cfg.train.learning_rate = to_double(key, value);
    else if (key == "B" || key == "batch_size") cfg.train.batch_size = to_int(key, value);
    else if (key == "local_epochs") cfg.train.local_epochs = to_int(key, value);
    else if (key == "hidden") cfg.hidden = to_int_list(key, value);
    else if (key == "input_dim") cfg.input_dim = to_int(key, value);
    else if (key == "num_classes") cfg.num_classes = to_int(key, value);
    else if (key == "train_images") cfg.train_images = value;
    else if (key == "train_labels") cfg.train_labels = value;
    else if (key == "train_fraction") cfg.train_fraction = to_double(key, value);
    else if (key == "classes_per_user") cfg.classes_per_user = to_int(key, value);
    else if (key == "size_spread") cfg.size_spread = to_double(key, value);
    else if (key == "max_train_samples") cfg.max_train_samples = to_int(key, value);
    else if (key == "synthetic_samples") cfg.synthetic_samples = to_int(key, value);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
    else throw ConfigError("unknown-key: " + key);
}

SimConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    SimConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("bad config line " + std::to_string(lineno) + ": " + line);
        }
        apply_config_line(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

}  // namespace airfl
