#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "airfl/data.hpp"
#include "airfl/rng.hpp"

namespace airfl {

// Fully-connected architecture; sizes = {input, hidden..., classes}.
struct Architecture {
    std::vector<int> sizes;

    Eigen::Index dim() const {
        Eigen::Index d = 0;
        for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
            d += Eigen::Index(sizes[l + 1]) * sizes[l] + sizes[l + 1];
        }
        return d;
    }
    bool operator==(const Architecture&) const = default;
};

// Flat parameter vector; layout is per layer, column-major weight matrix
// (out x in) then bias.
struct ModelState {
    Architecture arch;
    Eigen::VectorXd theta;
};

struct TrainConfig {
    double learning_rate = 0.01;
    int batch_size = 10;
    int local_epochs = 1;
};

struct UpdateVector {
    Eigen::VectorXd delta;  // theta_after - theta_before
    double mean = 0.0;      // mu_k over entries
    double stddev = 0.0;    // sigma_k over entries (population)
    long data_size = 0;     // |D_k|
    double norm = 0.0;      // ||delta||_2, the scheduling score
};

// Per-user transmission package after z-normalization.
struct NormalizedUpdate {
    Eigen::VectorXd symbols;  // s_k, zero vector when degenerate
    double phi = 0.0;         // weight * sigma_k; 0 when the user does not transmit
    double shift = 0.0;       // weight * mu_k, delivered out-of-band
    bool transmits = false;
};

struct EvalResult {
    double accuracy = 0.0;
    double loss = 0.0;
};

ModelState init_model(const Architecture& arch, Rng& rng);

// Mean softmax cross-entropy over the given samples.
double forward_loss(const ModelState& model, const Dataset& data,
                    const std::vector<int>& indices);

// Mini-batch SGD over the user's samples; returns the model delta.
UpdateVector local_train(const ModelState& model, const Dataset& data,
                         const std::vector<int>& indices, const TrainConfig& cfg,
                         Rng& rng);

// weight is |D_k| under data-size weighting and 1 under uniform weighting.
NormalizedUpdate normalize_update(const UpdateVector& update, double weight);

// theta(t+1) = theta(t) + (estimate_j + shift_sum) / total_weight.
void global_update(ModelState& model, const Eigen::VectorXd& estimate,
                   double shift_sum, double total_weight);

EvalResult evaluate(const ModelState& model, const Dataset& test_set);

// Flat little-endian float64 checkpoint with a 16-byte (magic, d) header.
void save_checkpoint(const ModelState& model, const std::string& path);
Eigen::VectorXd load_checkpoint(const std::string& path);

}  // namespace airfl
