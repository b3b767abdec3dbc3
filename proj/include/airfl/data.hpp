#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "airfl/rng.hpp"

namespace airfl {

// Samples stored column-wise: features (dim x n), entries in [0, 1].
struct Dataset {
    Eigen::MatrixXd features;
    std::vector<int> labels;

    int size() const { return static_cast<int>(labels.size()); }
    int dim() const { return static_cast<int>(features.rows()); }
};

// Per-user index lists into a training set. Lists are disjoint; their union
// may be a strict subset when sizes are subsampled.
struct Partition {
    std::vector<std::vector<int>> user_indices;
};

// IDX (MNIST) readers/writers. Big-endian magic 0x803 for images, 0x801 for
// labels.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);
void write_idx(const Dataset& data, const std::string& images_path,
               const std::string& labels_path, int rows, int cols);

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction, Rng& rng);

// Label-pure shard partition: users*classes_per_user shards allotted to
// labels proportionally, dealt classes_per_user per user, then each user's
// set subsampled by a log-uniform fraction in [1/size_spread, 1].
Partition partition_noniid(const Dataset& train, int users, int classes_per_user,
                           double size_spread, Rng& rng);

// Offline fixtures: a 2-class 8x8 blob set, and a 10-class 28x28 rendered
// digit set in MNIST layout for end-to-end runs without the real files.
Dataset synthetic_two_class_8x8(int n, Rng& rng);
Dataset synthetic_digits_28x28(int n, Rng& rng);

}  // namespace airfl
