#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "airfl/flcore.hpp"

namespace airfl {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Weighting { DataSize, Uniform };

struct SimConfig {
    // population / scheduling
    int num_users = 1000;       // M
    int num_selected = 10;      // K
    int num_candidates = 20;    // W
    std::string policy = "hybrid";

    // link
    int antennas = 4;           // N
    double snr_db = 42.0;
    bool snr_db_set = false;    // explicitly configured (vs default)
    double max_power = 1.0;     // P0
    double noise_variance = -1.0;  // derived from SNR when < 0
    double alpha = 3.0;
    double cell_radius = 500.0;
    double min_distance = 10.0;

    // learning
    int rounds = 60;            // T
    TrainConfig train;
    Weighting weighting = Weighting::Uniform;
    std::vector<int> hidden = {300, 100};
    int input_dim = 784;
    int num_classes = 10;

    // data
    std::string train_images;
    std::string train_labels;
    double train_fraction = 0.9;
    int classes_per_user = 2;
    double size_spread = 10.0;
    int max_train_samples = 0;  // 0 = no cap
    int synthetic_samples = 12000;  // fallback set size when no IDX files given

    std::uint64_t seed = 1;

    Architecture architecture() const {
        Architecture a;
        a.sizes.push_back(input_dim);
        for (int h : hidden) a.sizes.push_back(h);
        a.sizes.push_back(num_classes);
        return a;
    }

    double sigma2() const {
        return noise_variance >= 0.0 ? noise_variance
                                     : max_power * std::pow(10.0, -snr_db / 10.0);
    }

    void validate() const;
    void apply_desk_preset();
};

// Line-based `key = value` file; '#' starts a comment. Unknown keys are errors.
SimConfig parse_config_file(const std::string& path);
void apply_config_line(SimConfig& cfg, const std::string& key, const std::string& value);

}  // namespace airfl
