#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "tom/model.hpp"
#include "tom/rng.hpp"

namespace tom {

// What one tick of simulated time means.  PurchasePeriod advances the clock
// only on a sale and draws the buyer directly from the purchase distribution;
// ArrivalPeriod advances on every consumer, who tries one item and buys it
// with probability q_i.
enum class TimeConvention { PurchasePeriod, ArrivalPeriod };

// How the market is seeded.  AppealSeeded starts the weights at the appeals
// and reports them as-is; MuProcess starts reported downloads at zero and
// folds the appeals into the sampling weights only.  The two produce the
// same law for the share process.
enum class InitMode { AppealSeeded, MuProcess };

struct StaticQuality {};            // rank by quality once, keep it
struct StaticGiven { Ranking ranking; };
struct Popularity { std::size_t rerank_every = 1; };  // rank by reported downloads

using RankingPolicy = std::variant<StaticQuality, StaticGiven, Popularity>;

struct RunConfig {
    std::size_t horizon = 1;        // periods to simulate (L >= 1; 0 echoes the seed state)
    TimeConvention convention = TimeConvention::ArrivalPeriod;
    InitMode init = InitMode::AppealSeeded;
    RankingPolicy policy = StaticQuality{};
    SignalSpec signal = SignalSpec::power(1.0);
    std::size_t sample_stride = 1;  // record every k-th period
    std::uint64_t seed = 0;
};

struct TrajectorySample {
    std::size_t period = 0;
    std::vector<double> shares;
};

struct RunRecord {
    std::vector<TrajectorySample> trajectory;
    std::vector<double> final_d;              // reported downloads per item
    std::vector<std::uint64_t> downloads;     // realized purchases per item
    // Cumulative purchases at each recorded sample, aligned with trajectory.
    std::vector<std::uint64_t> downloads_over_time;
    std::uint64_t seed = 0;
    RunConfig config;
};

// One purchase-period step: draws the buyer from the purchase distribution
// at the current shares and credits it.  Returns the purchased item.
std::size_t step_purchase(const MarketSpec& spec, const Ranking& rank,
                          const SignalSpec& sig, MarketState& state,
                          rng::Xoshiro256pp& gen);

struct ArrivalOutcome {
    std::size_t tried = 0;
    bool purchased = false;
};

// One arrival-period step: the consumer samples an item from the try
// distribution, then buys it with probability q_i.
ArrivalOutcome step_arrival(const MarketSpec& spec, const Ranking& rank,
                            const SignalSpec& sig, MarketState& state,
                            rng::Xoshiro256pp& gen);

RunRecord run_world(const MarketSpec& spec, const RunConfig& config);

// Independent worlds with per-world seeds derived from config.seed.  Results
// are indexed by world, so they do not depend on thread count or schedule.
std::vector<RunRecord> run_ensemble(const MarketSpec& spec,
                                    const RunConfig& config,
                                    std::size_t worlds,
                                    std::size_t threads = 0);

// Writes "period,item,share" rows for every recorded sample.
void write_run_csv(const RunRecord& record, const std::string& path,
                   const std::string& header_comment = "");

// JSON summary: final shares, downloads per item, and the seed.
void write_run_summary_json(const RunRecord& record, const std::string& path);

}  // namespace tom
