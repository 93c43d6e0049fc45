#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tom/dataset.hpp"
#include "tom/equilibrium.hpp"
#include "tom/sim.hpp"

namespace tom {

enum class ExperimentKind {
    Convergence,            // share trajectories against the closed-form rest point
    ShareBars,              // equilibrium shares per item across the r grid
    Predictability,         // per-world downloads by quality
    UnpredictabilityTable,  // dispersion per r plus rank-test p-values
    Efficiency,             // mean cumulative downloads, quality vs popularity
    EquilibriumReport,      // support, trace, classification, expected purchases
    RankingSearch,          // best static ranking for each r
};

struct MarketSource {
    std::string name;            // builtin key, or empty when files are given
    std::string products_csv;
    std::string visibility_csv;
    AppealSetting setting = AppealSetting::Independent;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::EquilibriumReport;
    MarketSource market;
    std::vector<double> r_grid;  // signal exponents, all positive
    RankingPolicy policy = StaticQuality{};
    std::size_t worlds = 1;
    std::size_t horizon = 1;
    TimeConvention convention = TimeConvention::ArrivalPeriod;
    InitMode init = InitMode::AppealSeeded;
    std::size_t sample_stride = 1;
    std::uint64_t seed = 0;
    std::size_t threads = 0;     // 0 lets the runner pick
    SearchMethod search_method = SearchMethod::LocalSearchSwap;  // RankingSearch only
    std::string output_dir = ".";
};

ExperimentConfig load_experiment_config(const std::string& path);

// Every problem found, not just the first; empty means the config is usable.
std::vector<std::string> validate_config(const ExperimentConfig& config);

// Hash of the canonical JSON encoding, stamped on every output so files can
// be traced back to the exact configuration that produced them.
std::string config_hash(const ExperimentConfig& config);

// Runs the experiment and writes its outputs under config.output_dir.
// Returns the paths written.  Outputs are deterministic given (config, seed).
std::vector<std::string> run_experiment(const ExperimentConfig& config);

}  // namespace tom
