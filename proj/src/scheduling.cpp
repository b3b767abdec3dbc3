#include "airfl/scheduling.hpp"

#include <algorithm>
#include <numeric>

namespace airfl {

namespace {

// Indices of the k largest scores, descending score then ascending index.
std::vector<int> top_k(const std::vector<double>& scores, int k) {
    std::vector<int> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return a < b;
    });
    const int n = std::min<int>(k, static_cast<int>(idx.size()));
    idx.resize(n);
    return idx;
}

}  // namespace

Policy parse_policy(const std::string& name) {
    if (name == "channel") return Policy::Channel;
    if (name == "update") return Policy::Update;
    if (name == "hybrid") return Policy::Hybrid;
    if (name == "random_channel") return Policy::RandomChannel;
    if (name == "random_update") return Policy::RandomUpdate;
    throw std::invalid_argument("unknown policy: " + name);
}

std::string policy_name(Policy p) {
    switch (p) {
        case Policy::Channel: return "channel";
        case Policy::Update: return "update";
        case Policy::Hybrid: return "hybrid";
        case Policy::RandomChannel: return "random_channel";
        case Policy::RandomUpdate: return "random_update";
    }
    return "?";
}

ScheduleDecision schedule_channel(const std::vector<double>& gains, int k) {
    if (k < 1) throw std::invalid_argument("schedule_channel: k must be >= 1");
    ScheduleDecision d;
    d.policy = Policy::Channel;
    d.selected = top_k(gains, k);
    const long m = static_cast<long>(gains.size());
    const long sel = static_cast<long>(d.selected.size());
    d.costs = {m, sel, sel};
    return d;
}

ScheduleDecision schedule_update(const std::vector<double>& update_norms, int k) {
    if (k < 1) throw std::invalid_argument("schedule_update: k must be >= 1");
    ScheduleDecision d;
    d.policy = Policy::Update;
    d.selected = top_k(update_norms, k);
    const long m = static_cast<long>(update_norms.size());
    const long sel = static_cast<long>(d.selected.size());
    d.costs = {sel, sel, m};
    return d;
}

ScheduleDecision schedule_hybrid(const std::vector<double>& gains, int k, int w,
                                 const std::function<double(int)>& local_train_norm) {
    if (k > w) throw std::invalid_argument("invalid-config: k > w");
    if (k < 1) throw std::invalid_argument("schedule_hybrid: k must be >= 1");
    const auto stage1 = top_k(gains, w);
    std::vector<double> norms(gains.size(), 0.0);
    // Ascending index order so callback side effects are deterministic.
    std::vector<int> candidates = stage1;
    std::sort(candidates.begin(), candidates.end());
    for (int u : candidates) norms[u] = local_train_norm(u);

    // Restrict top-k to stage-1 candidates.
    std::vector<int> idx = candidates;
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (norms[a] != norms[b]) return norms[a] > norms[b];
        return a < b;
    });
    idx.resize(std::min<int>(k, static_cast<int>(idx.size())));

    ScheduleDecision d;
    d.policy = Policy::Hybrid;
    d.selected = std::move(idx);
    d.costs = {static_cast<long>(gains.size()), static_cast<long>(d.selected.size()),
               static_cast<long>(candidates.size())};
    return d;
}

ScheduleDecision schedule_random(int m, int k, Rng& rng, Policy variant) {
    if (k > m) throw std::invalid_argument("schedule_random: k > m");
    std::vector<int> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    // Partial Fisher-Yates: first k entries are a uniform sample.
    for (int i = 0; i < k; ++i) {
        const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(m - i)));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    std::sort(idx.begin(), idx.end());

    ScheduleDecision d;
    d.policy = variant;
    d.selected = std::move(idx);
    const long lk = k;
    if (variant == Policy::RandomUpdate) {
        d.costs = {lk, lk, static_cast<long>(m)};
    } else {
        d.costs = {static_cast<long>(m), lk, lk};
    }
    return d;
}

}  // namespace airfl
