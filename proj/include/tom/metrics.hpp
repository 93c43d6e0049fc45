#pragma once

#include <cstddef>
#include <vector>

#include "tom/sim.hpp"

namespace tom {

struct EnsembleStats {
    std::vector<double> u_items;     // cross-world share dispersion per item
    double u_market = 0.0;           // mean of u_items
    std::vector<double> u_per_world; // per-world dispersion; averages to u_market
    std::vector<std::vector<double>> final_shares;  // [world][item]
    std::vector<double> mean_downloads_curve;       // pointwise mean cumulative downloads
};

// Mean absolute pairwise difference of an item's final share across worlds,
// averaged over all C(W,2) unordered world pairs.  Requires W >= 2.
std::vector<double> unpredictability_per_item(
    const std::vector<std::vector<double>>& final_shares);

// Per-world dispersion: for world w, mean over items of the mean absolute
// share difference to each other world.  Averaging over worlds recovers the
// market-level figure, so these serve as per-observation samples.
std::vector<double> unpredictability_per_world(
    const std::vector<std::vector<double>>& final_shares);

enum class MwAlternative { a_less, a_greater, two_sided };

struct MwResult {
    double u_a = 0.0;   // rank-sum statistic for sample a, midranks for ties
    double p = 1.0;
    bool exact = false; // full enumeration rather than normal approximation
};

// Mann-Whitney U test.  Exact enumeration when both samples have at most 8
// observations (ties handled by permuting the pooled values); otherwise the
// normal approximation with tie and continuity corrections.
MwResult mann_whitney_u(const std::vector<double>& a,
                        const std::vector<double>& b, MwAlternative alt);

// Pointwise mean of cumulative downloads across an ensemble.  All records
// must share the same horizon and use arrival periods, otherwise the curves
// measure different things and the call is rejected.
std::vector<double> efficiency_curve(const std::vector<RunRecord>& records);

EnsembleStats compute_ensemble_stats(const std::vector<RunRecord>& records);

}  // namespace tom
