// Command-line front end: runs experiment configs, validates them, and
// answers one-off equilibrium and ranking-search queries as JSON on stdout.

#include <cstdint>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tom/dataset.hpp"
#include "tom/equilibrium.hpp"
#include "tom/experiment.hpp"

namespace {

using nlohmann::json;

struct MarketArgs {
    std::string market;
    std::string visibility;
    std::string setting = "independent";
};

void add_market_options(CLI::App* cmd, MarketArgs& args) {
    cmd->add_option("--market", args.market,
                    "builtin name (five_song, six_song, example_7_1, example_7_2) "
                    "or a products CSV path")
        ->required();
    cmd->add_option("--visibility", args.visibility,
                    "visibility CSV for a path-based market");
    cmd->add_option("--setting", args.setting, "independent or anti_correlated")
        ->check(CLI::IsMember({"independent", "anti_correlated"}));
}

tom::MarketSpec resolve(const MarketArgs& args) {
    const tom::AppealSetting setting = args.setting == "anti_correlated"
                                           ? tom::AppealSetting::AntiCorrelated
                                           : tom::AppealSetting::Independent;
    return tom::resolve_market(args.market, setting, args.visibility);
}

std::vector<std::size_t> to_internal_support(const std::vector<std::size_t>& given,
                                             std::size_t n) {
    std::vector<std::size_t> support;
    if (given.empty()) {
        support.resize(n);
        std::iota(support.begin(), support.end(), std::size_t{0});
        return support;
    }
    for (std::size_t s : given) {
        if (s < 1) throw std::invalid_argument("--support items are 1-based");
        support.push_back(s - 1);
    }
    return support;
}

int cmd_equilibrium(const MarketArgs& margs, double r,
                    const std::vector<std::size_t>& support_arg) {
    const tom::MarketSpec spec = resolve(margs);
    const tom::Ranking rank = tom::quality_ranking(spec);
    const tom::Equilibrium eq = tom::equilibrium_for_support(
        spec, rank, r, to_internal_support(support_arg, spec.n()));

    json out;
    out["r"] = r;
    std::vector<std::size_t> support;
    for (std::size_t i : eq.support) support.push_back(i + 1);
    out["support"] = support;
    out["shares"] = eq.shares;
    out["trace"] = eq.trace;
    out["classification"] = tom::to_string(eq.classification);
    out["expected_purchases"] = tom::expected_purchases_at(
        spec, rank, tom::SignalSpec::power(r), eq.shares);
    const std::vector<double> uniform(spec.n(), 1.0 / static_cast<double>(spec.n()));
    out["expected_purchases_no_signal"] = tom::expected_purchases_at(
        spec, rank, tom::SignalSpec::affine(1.0, 0.0), uniform);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int cmd_rank_search(const MarketArgs& margs, double r, const std::string& method) {
    const tom::MarketSpec spec = resolve(margs);
    const tom::SearchMethod m = method == "exhaustive"
                                    ? tom::SearchMethod::Exhaustive
                                    : tom::SearchMethod::LocalSearchSwap;
    const tom::RankingSearchResult res = tom::optimal_static_ranking(spec, r, m);

    json out;
    out["r"] = r;
    out["method"] = method;
    std::vector<std::size_t> positions;
    for (std::size_t p : res.ranking.position_of) positions.push_back(p + 1);
    out["positions"] = positions;
    out["expected_purchases"] = res.value;
    std::cout << out.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"trial-offer market simulator and equilibrium toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    std::size_t worlds = 0, horizon = 0, threads = 0;
    std::string output_dir;

    CLI::App* run = app.add_subcommand("run", "run an experiment config");
    run->add_option("config", config_path, "experiment config JSON")->required();
    CLI::Option* run_seed = run->add_option("--seed", seed, "override the config seed");
    CLI::Option* run_worlds = run->add_option("--worlds", worlds, "override world count");
    CLI::Option* run_horizon =
        run->add_option("--horizon", horizon, "override the period count");
    CLI::Option* run_threads =
        run->add_option("--threads", threads, "override the thread count");
    CLI::Option* run_outdir =
        run->add_option("--output-dir", output_dir, "override the output directory");

    CLI::App* validate = app.add_subcommand("validate", "check an experiment config");
    validate->add_option("config", config_path, "experiment config JSON")->required();

    MarketArgs eq_market;
    double eq_r = 0.5;
    std::vector<std::size_t> eq_support;
    CLI::App* equilibrium =
        app.add_subcommand("equilibrium", "closed-form rest point for a market");
    add_market_options(equilibrium, eq_market);
    equilibrium->add_option("--r", eq_r, "signal exponent (not 1)")->required();
    equilibrium->add_option("--support", eq_support, "1-based item subset")
        ->delimiter(',');

    MarketArgs rs_market;
    double rs_r = 0.5;
    std::string rs_method = "exhaustive";
    CLI::App* rank_search =
        app.add_subcommand("rank-search", "best static ranking for a market");
    add_market_options(rank_search, rs_market);
    rank_search->add_option("--r", rs_r, "signal exponent in (0,1)")->required();
    rank_search->add_option("--method", rs_method, "exhaustive or local")
        ->check(CLI::IsMember({"exhaustive", "local"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) {
            tom::ExperimentConfig config = tom::load_experiment_config(config_path);
            if (*run_seed) config.seed = seed;
            if (*run_worlds) config.worlds = worlds;
            if (*run_horizon) config.horizon = horizon;
            if (*run_threads) config.threads = threads;
            if (*run_outdir) config.output_dir = output_dir;

            const std::vector<std::string> errors = tom::validate_config(config);
            if (!errors.empty()) {
                for (const std::string& e : errors) std::cerr << "error: " << e << "\n";
                return 1;
            }
            const std::vector<std::string> written = tom::run_experiment(config);
            for (const std::string& path : written) std::cout << path << "\n";
            return 0;
        }
        if (validate->parsed()) {
            const tom::ExperimentConfig config = tom::load_experiment_config(config_path);
            const std::vector<std::string> errors = tom::validate_config(config);
            if (errors.empty()) {
                std::cout << "ok\n";
                return 0;
            }
            for (const std::string& e : errors) std::cerr << "error: " << e << "\n";
            return 1;
        }
        if (equilibrium->parsed()) return cmd_equilibrium(eq_market, eq_r, eq_support);
        if (rank_search->parsed()) return cmd_rank_search(rs_market, rs_r, rs_method);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
