#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "airfl/rng.hpp"

namespace airfl {

enum class Policy { Channel, Update, Hybrid, RandomChannel, RandomUpdate };

Policy parse_policy(const std::string& name);
std::string policy_name(Policy p);

// Per-round cost counters in units of t_o (channel probe), t_u (upload)
// and t_p (local compute).
struct CostLedger {
    long channel_probe_count = 0;
    long upload_count = 0;
    long local_compute_count = 0;

    CostLedger& operator+=(const CostLedger& o) {
        channel_probe_count += o.channel_probe_count;
        upload_count += o.upload_count;
        local_compute_count += o.local_compute_count;
        return *this;
    }
    bool operator==(const CostLedger&) const = default;
};

struct ScheduleDecision {
    std::vector<int> selected;  // descending score, ties ascending index
    Policy policy = Policy::Channel;
    CostLedger costs;
};

// Top-k by channel gain; probes all M users.
ScheduleDecision schedule_channel(const std::vector<double>& gains, int k);

// Top-k by update norm; every user pays local compute.
ScheduleDecision schedule_update(const std::vector<double>& update_norms, int k);

// Stage 1: top-w by gain. Stage 2: local training for those w only, then
// top-k by update norm among them.
ScheduleDecision schedule_hybrid(const std::vector<double>& gains, int k, int w,
                                 const std::function<double(int)>& local_train_norm);

// Uniform sample without replacement. The ledger mirrors the named policy's
// shape (channel-style or update-style costs).
ScheduleDecision schedule_random(int m, int k, Rng& rng,
                                 Policy variant = Policy::RandomChannel);

}  // namespace airfl
