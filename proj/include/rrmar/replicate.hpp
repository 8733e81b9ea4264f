#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rrmar/estimator.hpp"
#include "rrmar/model.hpp"
#include "rrmar/selection.hpp"

namespace rrmar {

// One Monte Carlo scenario: R seeded replications of simulate -> rank-lag
// selection, summarized per criterion as in the simulation-study tables.
struct ScenarioSpec {
    Index n1 = 0, n2 = 0;
    std::array<Index, 4> true_ranks{};
    Index p = 1;
    Index T = 0;
    Index reps = 0;
    std::uint64_t seed = 0;  // replication r uses seed + r
    Index max_lag = 1;
    double snr = 0.7;
    double noise = 1.0;
    Index burn_in = 50;
};

struct RepOutcome {
    std::uint64_t seed = 0;
    std::array<Index, 4> aic_ranks{};
    std::array<Index, 4> bic_ranks{};
    Index aic_p = 1, bic_p = 1;
    bool ok = false;
    std::string note;
};

struct CriterionSummary {
    std::array<double, 4> avg_rank{};
    std::array<double, 4> std_rank{};
    std::array<double, 4> freq_correct{};
    double avg_p = 0.0;
    double freq_p = 0.0;
};

struct ReplicationResult {
    std::vector<RepOutcome> reps;
    CriterionSummary aic, bic;
    Index failures = 0;
};

// Summaries from a replication list (merging lists from split runs and
// re-summarizing reproduces a single run's statistics).
CriterionSummary summarize(const std::vector<RepOutcome>& reps,
                           const std::array<Index, 4>& true_ranks, Index true_p, Criterion kind);

ReplicationResult replicate_sim(const ScenarioSpec& spec, const FitConfig& config,
                                int threads = 1);

void write_replication_summary_csv(const std::string& path, const ReplicationResult& result);
void write_replication_summary_json(const std::string& path, const ReplicationResult& result);
void write_replication_detail_csv(const std::string& path, const ReplicationResult& result);

}  // namespace rrmar
