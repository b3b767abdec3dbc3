#pragma once

#include <string>
#include <vector>

#include "airfl/channel.hpp"
#include "airfl/config.hpp"
#include "airfl/data.hpp"
#include "airfl/flcore.hpp"
#include "airfl/scheduling.hpp"

namespace airfl {

struct RoundMetrics {
    int round = 0;
    std::string policy;
    double test_accuracy = 0.0;
    double test_loss = 0.0;
    double mse_closed_form = 0.0;
    double tau = 0.0;
    std::vector<int> selected;
    CostLedger costs;
    double wall_ms = 0.0;
};

struct ExperimentResult {
    std::vector<RoundMetrics> metrics;
    ModelState final_model;
    UserGeometry geometry;
};

// Pre-built inputs so tests can inject tiny datasets; the CLI fills these
// from IDX files or the synthetic fallback.
struct ExperimentData {
    Dataset train;
    Dataset test;
    Partition partition;
};

ExperimentData prepare_data(const SimConfig& cfg);

ExperimentResult run_experiment(const SimConfig& cfg, const ExperimentData& data);

void emit_metrics(const std::vector<RoundMetrics>& metrics, const std::string& path);
std::vector<RoundMetrics> parse_metrics(const std::string& path);

void emit_geometry(const UserGeometry& geometry, const std::string& path);

}  // namespace airfl
