#include "tom/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <stdexcept>

#include "json.hpp"
#include "tom/metrics.hpp"
#include "tom/ode.hpp"

namespace tom {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

const char* kind_name(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::Convergence: return "convergence";
        case ExperimentKind::ShareBars: return "share_bars";
        case ExperimentKind::Predictability: return "predictability";
        case ExperimentKind::UnpredictabilityTable: return "unpredictability_table";
        case ExperimentKind::Efficiency: return "efficiency";
        case ExperimentKind::EquilibriumReport: return "equilibrium_report";
        case ExperimentKind::RankingSearch: return "ranking_search";
    }
    return "equilibrium_report";
}

ExperimentKind parse_kind(const std::string& s) {
    for (ExperimentKind k :
         {ExperimentKind::Convergence, ExperimentKind::ShareBars,
          ExperimentKind::Predictability, ExperimentKind::UnpredictabilityTable,
          ExperimentKind::Efficiency, ExperimentKind::EquilibriumReport,
          ExperimentKind::RankingSearch})
        if (s == kind_name(k)) return k;
    throw std::runtime_error("unknown experiment kind '" + s + "'");
}

std::string r_tag(double r) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", r);
    return buf;
}

json policy_json(const RankingPolicy& policy) {
    json j;
    if (std::holds_alternative<StaticQuality>(policy)) {
        j["type"] = "quality";
    } else if (const auto* given = std::get_if<StaticGiven>(&policy)) {
        j["type"] = "given";
        std::vector<std::size_t> positions;
        for (std::size_t p : given->ranking.position_of) positions.push_back(p + 1);
        j["positions"] = positions;
    } else {
        j["type"] = "popularity";
        j["rerank_every"] = std::get<Popularity>(policy).rerank_every;
    }
    return j;
}

RankingPolicy parse_policy(const json& j) {
    const std::string type = j.value("type", "quality");
    if (type == "quality") return StaticQuality{};
    if (type == "given") {
        StaticGiven given;
        for (const auto& p : j.at("positions")) {
            const auto pos = p.get<std::int64_t>();
            if (pos < 1) throw std::runtime_error("policy positions are 1-based");
            given.ranking.position_of.push_back(static_cast<std::size_t>(pos - 1));
        }
        return given;
    }
    if (type == "popularity") {
        Popularity pop;
        pop.rerank_every = j.value("rerank_every", std::size_t{1});
        return pop;
    }
    throw std::runtime_error("unknown ranking policy '" + type + "'");
}

// Canonical encoding of everything that determines the numbers in the
// outputs. Where files land and how many threads crunch them do not belong
// here, or reruns of the same experiment would stop hashing alike.
json canonical_json(const ExperimentConfig& c) {
    json j;
    j["kind"] = kind_name(c.kind);
    j["market"] = {{"name", c.market.name},
                   {"products", c.market.products_csv},
                   {"visibility", c.market.visibility_csv},
                   {"setting", c.market.setting == AppealSetting::AntiCorrelated
                                   ? "anti_correlated"
                                   : "independent"}};
    j["r_grid"] = c.r_grid;
    j["policy"] = policy_json(c.policy);
    j["worlds"] = c.worlds;
    j["horizon"] = c.horizon;
    j["convention"] =
        c.convention == TimeConvention::ArrivalPeriod ? "arrival" : "purchase";
    j["init"] = c.init == InitMode::AppealSeeded ? "appeal_seeded" : "mu_process";
    j["sample_stride"] = c.sample_stride;
    j["seed"] = c.seed;
    j["search_method"] =
        c.search_method == SearchMethod::Exhaustive ? "exhaustive" : "local";
    return j;
}

struct Writer {
    const ExperimentConfig& config;
    std::string hash;
    std::vector<std::string> written;

    std::string path_of(const std::string& file) const {
        return (fs::path(config.output_dir) / file).string();
    }

    std::ofstream open_csv(const std::string& file) {
        const std::string full = path_of(file);
        std::ofstream out(full);
        if (!out) throw std::runtime_error("cannot open " + full);
        out << std::setprecision(17);
        out << "# config_hash=" << hash << " seed=" << config.seed << "\n";
        written.push_back(full);
        return out;
    }

    void dump_json(json j, const std::string& file) {
        j["meta"] = {{"config_hash", hash}, {"seed", config.seed}};
        const std::string full = path_of(file);
        std::ofstream out(full);
        if (!out) throw std::runtime_error("cannot open " + full);
        out << j.dump(2) << "\n";
        if (!out) throw std::runtime_error("write failed for " + full);
        written.push_back(full);
    }
};

RunConfig base_run_config(const ExperimentConfig& c, double r) {
    RunConfig rc;
    rc.horizon = c.horizon;
    rc.convention = c.convention;
    rc.init = c.init;
    rc.policy = c.policy;
    rc.signal = SignalSpec::power(r);
    rc.sample_stride = c.sample_stride;
    rc.seed = c.seed;
    return rc;
}

std::vector<std::size_t> all_items(std::size_t n) {
    std::vector<std::size_t> s(n);
    std::iota(s.begin(), s.end(), std::size_t{0});
    return s;
}

json equilibrium_json(const Equilibrium& eq) {
    json j;
    j["r"] = eq.r;
    std::vector<std::size_t> support;
    for (std::size_t i : eq.support) support.push_back(i + 1);
    j["support"] = support;
    j["shares"] = eq.shares;
    j["trace"] = eq.trace;
    j["classification"] = to_string(eq.classification);
    return j;
}

double no_signal_expected_purchases(const MarketSpec& spec, const Ranking& rank) {
    // With no purchase feedback the try weights reduce to v_{sigma(i)} a_i.
    const SignalSpec flat = SignalSpec::affine(1.0, 0.0);
    const std::vector<double> uniform(spec.n(), 1.0 / static_cast<double>(spec.n()));
    return expected_purchases_at(spec, rank, flat, uniform);
}

void run_convergence(const ExperimentConfig& c, const MarketSpec& spec, Writer& w) {
    const Ranking rank = quality_ranking(spec);
    json eqs = json::array();
    for (double r : c.r_grid) {
        eqs.push_back(equilibrium_json(
            equilibrium_for_support(spec, rank, r, all_items(spec.n()))));
        const std::vector<RunRecord> records =
            run_ensemble(spec, base_run_config(c, r), c.worlds, c.threads);
        for (std::size_t world = 0; world < records.size(); ++world) {
            auto out = w.open_csv("trajectory_r" + r_tag(r) + "_w" +
                                  std::to_string(world) + ".csv");
            out << "period,item,share\n";
            for (const TrajectorySample& s : records[world].trajectory)
                for (std::size_t i = 0; i < s.shares.size(); ++i)
                    out << s.period << "," << i + 1 << "," << s.shares[i] << "\n";
        }
    }
    w.dump_json(json{{"equilibria", eqs}}, "equilibria.json");
}

void run_share_bars(const ExperimentConfig& c, const MarketSpec& spec, Writer& w) {
    const Ranking rank = quality_ranking(spec);
    auto out = w.open_csv("shares.csv");
    out << "r,item,quality,share\n";
    for (double r : c.r_grid) {
        const Equilibrium eq =
            equilibrium_for_support(spec, rank, r, all_items(spec.n()));
        for (std::size_t i = 0; i < spec.n(); ++i)
            out << r << "," << i + 1 << "," << spec.quality[i] << "," << eq.shares[i]
                << "\n";
    }
}

void run_predictability(const ExperimentConfig& c, const MarketSpec& spec, Writer& w) {
    for (double r : c.r_grid) {
        const std::vector<RunRecord> records =
            run_ensemble(spec, base_run_config(c, r), c.worlds, c.threads);
        auto out = w.open_csv("downloads_r" + r_tag(r) + ".csv");
        out << "world,item,quality,downloads\n";
        for (std::size_t world = 0; world < records.size(); ++world)
            for (std::size_t i = 0; i < spec.n(); ++i)
                out << world + 1 << "," << i + 1 << "," << spec.quality[i] << ","
                    << records[world].downloads[i] << "\n";
    }
}

void run_unpredictability(const ExperimentConfig& c, const MarketSpec& spec,
                          Writer& w) {
    std::vector<std::vector<double>> per_world_u;
    auto table = w.open_csv("unpredictability.csv");
    table << "r,U,u_std_items\n";
    for (double r : c.r_grid) {
        const std::vector<RunRecord> records =
            run_ensemble(spec, base_run_config(c, r), c.worlds, c.threads);
        const EnsembleStats stats = compute_ensemble_stats(records);
        double var = 0.0;
        for (double u : stats.u_items) {
            const double d = u - stats.u_market;
            var += d * d;
        }
        var /= static_cast<double>(stats.u_items.size());
        table << r << "," << stats.u_market << "," << std::sqrt(var) << "\n";
        per_world_u.push_back(stats.u_per_world);
    }

    auto pv = w.open_csv("pvalues.csv");
    pv << "r_low,r_high,p\n";
    for (std::size_t k = 0; k + 1 < c.r_grid.size(); ++k) {
        const MwResult mw = mann_whitney_u(per_world_u[k], per_world_u[k + 1],
                                           MwAlternative::a_less);
        pv << c.r_grid[k] << "," << c.r_grid[k + 1] << "," << mw.p << "\n";
    }
}

void run_efficiency(const ExperimentConfig& c, const MarketSpec& spec, Writer& w) {
    std::size_t rerank_every = 1;
    if (const auto* pop = std::get_if<Popularity>(&c.policy))
        rerank_every = pop->rerank_every;

    const std::vector<std::pair<std::string, RankingPolicy>> policies = {
        {"quality", StaticQuality{}},
        {"popularity", Popularity{rerank_every}},
    };
    for (double r : c.r_grid) {
        for (const auto& [name, policy] : policies) {
            RunConfig rc = base_run_config(c, r);
            rc.policy = policy;
            const std::vector<RunRecord> records =
                run_ensemble(spec, rc, c.worlds, c.threads);
            const std::vector<double> curve = efficiency_curve(records);
            auto out = w.open_csv("curve_" + name + "_r" + r_tag(r) + ".csv");
            out << "period,mean_downloads\n";
            for (std::size_t k = 0; k < curve.size(); ++k)
                out << records.front().trajectory[k].period << "," << curve[k] << "\n";
        }
    }
}

void run_equilibrium_report(const ExperimentConfig& c, const MarketSpec& spec,
                            Writer& w) {
    const Ranking rank = quality_ranking(spec);
    json results = json::array();
    for (double r : c.r_grid) {
        const Equilibrium eq =
            equilibrium_for_support(spec, rank, r, all_items(spec.n()));
        json entry = equilibrium_json(eq);
        entry["expected_purchases"] =
            expected_purchases_at(spec, rank, SignalSpec::power(r), eq.shares);
        entry["expected_purchases_no_signal"] = no_signal_expected_purchases(spec, rank);
        results.push_back(std::move(entry));
    }
    w.dump_json(json{{"n", spec.n()}, {"results", results}}, "report.json");
}

void run_ranking_search(const ExperimentConfig& c, const MarketSpec& spec,
                        Writer& w) {
    json results = json::array();
    for (double r : c.r_grid) {
        const RankingSearchResult res =
            optimal_static_ranking(spec, r, c.search_method);
        json entry;
        entry["r"] = r;
        entry["method"] =
            c.search_method == SearchMethod::Exhaustive ? "exhaustive" : "local";
        std::vector<std::size_t> positions;
        for (std::size_t p : res.ranking.position_of) positions.push_back(p + 1);
        entry["positions"] = positions;
        entry["expected_purchases"] = res.value;
        const Ranking qrank = quality_ranking(spec);
        entry["quality_ranking_value"] = expected_purchases_at(
            spec, qrank, SignalSpec::power(r),
            equilibrium_for_support(spec, qrank, r, all_items(spec.n())).shares);
        results.push_back(std::move(entry));
    }
    w.dump_json(json{{"results", results}}, "ranking.json");
}

}  // namespace

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }

    try {
        ExperimentConfig c;
        c.kind = parse_kind(j.at("kind").get<std::string>());

        const json& m = j.at("market");
        c.market.name = m.value("name", "");
        c.market.products_csv = m.value("products", "");
        c.market.visibility_csv = m.value("visibility", "");
        const std::string setting = m.value("setting", "independent");
        if (setting == "independent") c.market.setting = AppealSetting::Independent;
        else if (setting == "anti_correlated")
            c.market.setting = AppealSetting::AntiCorrelated;
        else throw std::runtime_error("unknown appeal setting '" + setting + "'");

        c.r_grid = j.at("r_grid").get<std::vector<double>>();
        if (j.contains("policy")) c.policy = parse_policy(j.at("policy"));
        c.worlds = j.value("worlds", std::size_t{1});
        c.horizon = j.value("horizon", std::size_t{1});
        const std::string conv = j.value("convention", "arrival");
        if (conv == "arrival") c.convention = TimeConvention::ArrivalPeriod;
        else if (conv == "purchase") c.convention = TimeConvention::PurchasePeriod;
        else throw std::runtime_error("unknown time convention '" + conv + "'");
        const std::string init = j.value("init", "appeal_seeded");
        if (init == "appeal_seeded") c.init = InitMode::AppealSeeded;
        else if (init == "mu_process") c.init = InitMode::MuProcess;
        else throw std::runtime_error("unknown init mode '" + init + "'");
        c.sample_stride = j.value("sample_stride", std::size_t{1});
        c.seed = j.value("seed", std::uint64_t{0});
        c.threads = j.value("threads", std::size_t{0});
        const std::string method = j.value("search_method", "local");
        if (method == "local") c.search_method = SearchMethod::LocalSearchSwap;
        else if (method == "exhaustive") c.search_method = SearchMethod::Exhaustive;
        else throw std::runtime_error("unknown search method '" + method + "'");
        c.output_dir = j.value("output_dir", ".");
        return c;
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

std::vector<std::string> validate_config(const ExperimentConfig& config) {
    std::vector<std::string> errors;

    if (config.r_grid.empty()) errors.push_back("r grid is empty");
    for (double r : config.r_grid) {
        if (!(r > 0.0)) {
            errors.push_back("signal exponent must be positive");
            break;
        }
    }
    const bool closed_form = config.kind == ExperimentKind::Convergence ||
                             config.kind == ExperimentKind::ShareBars ||
                             config.kind == ExperimentKind::EquilibriumReport ||
                             config.kind == ExperimentKind::RankingSearch;
    if (closed_form &&
        std::any_of(config.r_grid.begin(), config.r_grid.end(),
                    [](double r) { return r == 1.0; }))
        errors.push_back("exponent 1 has no isolated rest point to report");
    const bool needs_contraction = config.kind == ExperimentKind::ShareBars ||
                                   config.kind == ExperimentKind::RankingSearch;
    if (needs_contraction &&
        std::any_of(config.r_grid.begin(), config.r_grid.end(),
                    [](double r) { return r >= 1.0; }))
        errors.push_back(std::string(kind_name(config.kind)) +
                         " requires exponents below 1");

    const bool named = !config.market.name.empty();
    const bool from_files = !config.market.products_csv.empty();
    if (!named && !from_files) errors.push_back("no market given");
    if (named && from_files)
        errors.push_back("market needs either a builtin name or files, not both");
    if (named) {
        const bool builtin = config.market.name == "five_song" ||
                             config.market.name == "six_song" ||
                             config.market.name == "example_7_1" ||
                             config.market.name == "example_7_2";
        if (!builtin && !fs::exists(config.market.name))
            errors.push_back("unknown market '" + config.market.name + "'");
    }
    if (from_files && config.market.visibility_csv.empty())
        errors.push_back("market files need a visibility csv");

    if (config.worlds == 0) errors.push_back("worlds must be at least 1");
    if (config.horizon == 0) errors.push_back("horizon must be at least 1");
    if (config.sample_stride == 0) errors.push_back("sample stride must be at least 1");
    if (config.kind == ExperimentKind::UnpredictabilityTable && config.worlds < 2)
        errors.push_back("unpredictability needs at least two worlds");
    if (config.kind == ExperimentKind::Efficiency &&
        config.convention != TimeConvention::ArrivalPeriod)
        errors.push_back("efficiency curves need arrival periods");

    if (const auto* pop = std::get_if<Popularity>(&config.policy)) {
        if (pop->rerank_every == 0) errors.push_back("rerank interval must be at least 1");
    } else if (const auto* given = std::get_if<StaticGiven>(&config.policy)) {
        if (!given->ranking.is_permutation())
            errors.push_back("given ranking is not a permutation");
    }
    if (config.output_dir.empty()) errors.push_back("output directory is empty");
    return errors;
}

std::string config_hash(const ExperimentConfig& config) {
    const std::string canon = canonical_json(config).dump();
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char byte : canon) {
        h ^= byte;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<std::string> run_experiment(const ExperimentConfig& config) {
    const std::vector<std::string> errors = validate_config(config);
    if (!errors.empty()) {
        std::string msg = "invalid experiment config:";
        for (const std::string& e : errors) msg += "\n  - " + e;
        throw std::invalid_argument(msg);
    }

    MarketSpec spec =
        config.market.name.empty()
            ? load_dataset(config.market.products_csv, config.market.visibility_csv,
                           config.market.setting)
                  .spec
            : resolve_market(config.market.name, config.market.setting);

    fs::create_directories(config.output_dir);
    Writer writer{config, config_hash(config), {}};

    switch (config.kind) {
        case ExperimentKind::Convergence: run_convergence(config, spec, writer); break;
        case ExperimentKind::ShareBars: run_share_bars(config, spec, writer); break;
        case ExperimentKind::Predictability:
            run_predictability(config, spec, writer);
            break;
        case ExperimentKind::UnpredictabilityTable:
            run_unpredictability(config, spec, writer);
            break;
        case ExperimentKind::Efficiency: run_efficiency(config, spec, writer); break;
        case ExperimentKind::EquilibriumReport:
            run_equilibrium_report(config, spec, writer);
            break;
        case ExperimentKind::RankingSearch:
            run_ranking_search(config, spec, writer);
            break;
    }
    return writer.written;
}

}  // namespace tom
