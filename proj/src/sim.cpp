#include "tom/sim.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "tom/signals.hpp"

namespace tom {
namespace {

// Unnormalized try weights v_{sigma(i)} f(phi_i) written into `w`; returns
// their sum. Power signals are evaluated on raw counts: scale invariance
// makes f(d_i/D) proportional to f(d_i), and skipping the division keeps the
// hot loop cheap.
double fill_try_weights(const MarketSpec& spec, const std::vector<double>& ivis,
                        const SignalSpec& sig, const std::vector<double>& d,
                        double mass, std::vector<double>& w) {
    const std::size_t n = spec.n();
    double total = 0.0;
    if (sig.kind == SignalSpec::Kind::Power) {
        for (std::size_t i = 0; i < n; ++i) {
            const double f = d[i] > 0.0 ? std::pow(d[i], sig.r) : 0.0;
            w[i] = ivis[i] * f;
            total += w[i];
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            w[i] = ivis[i] * (sig.beta * (d[i] / mass) + sig.alpha * spec.appeal[i]);
            total += w[i];
        }
    }
    if (!(total > 0.0))
        throw std::domain_error("trial weights vanish on every item");
    return total;
}

double fill_purchase_weights(const MarketSpec& spec, const std::vector<double>& ivis,
                             const SignalSpec& sig, const std::vector<double>& d,
                             double mass, std::vector<double>& w) {
    fill_try_weights(spec, ivis, sig, d, mass, w);
    double qtotal = 0.0;
    for (std::size_t i = 0; i < spec.n(); ++i) {
        w[i] *= spec.quality[i];
        qtotal += w[i];
    }
    if (!(qtotal > 0.0))
        throw std::domain_error("purchase weights vanish on every item");
    return qtotal;
}

struct PolicyView {
    bool popularity = false;
    std::size_t rerank_every = 1;
    Ranking fixed;  // used when popularity is false
};

PolicyView resolve_policy(const MarketSpec& spec, const RankingPolicy& policy) {
    PolicyView view;
    if (std::holds_alternative<StaticQuality>(policy)) {
        view.fixed = quality_ranking(spec);
    } else if (const auto* given = std::get_if<StaticGiven>(&policy)) {
        if (given->ranking.position_of.size() != spec.n() ||
            !given->ranking.is_permutation())
            throw std::invalid_argument("run_world: given ranking is not a permutation");
        view.fixed = given->ranking;
    } else {
        const auto& pop = std::get<Popularity>(policy);
        if (pop.rerank_every == 0)
            throw std::invalid_argument("run_world: rerank interval must be at least 1");
        view.popularity = true;
        view.rerank_every = pop.rerank_every;
    }
    return view;
}

}  // namespace

std::size_t step_purchase(const MarketSpec& spec, const Ranking& rank,
                          const SignalSpec& sig, MarketState& state,
                          rng::Xoshiro256pp& gen) {
    const std::vector<double> ivis = item_visibility(spec, rank);
    std::vector<double> w(spec.n());
    const double total = fill_purchase_weights(spec, ivis, sig, state.d,
                                               state.total_mass(), w);
    const std::size_t bought = rng::sample_categorical(w, total, gen.uniform());
    state.d[bought] += 1.0;
    state.purchases += 1;
    return bought;
}

ArrivalOutcome step_arrival(const MarketSpec& spec, const Ranking& rank,
                            const SignalSpec& sig, MarketState& state,
                            rng::Xoshiro256pp& gen) {
    const std::vector<double> ivis = item_visibility(spec, rank);
    std::vector<double> w(spec.n());
    const double total =
        fill_try_weights(spec, ivis, sig, state.d, state.total_mass(), w);
    ArrivalOutcome out;
    out.tried = rng::sample_categorical(w, total, gen.uniform());
    state.arrivals += 1;
    if (gen.uniform() < spec.quality[out.tried]) {
        state.d[out.tried] += 1.0;
        state.purchases += 1;
        out.purchased = true;
    }
    return out;
}

RunRecord run_world(const MarketSpec& spec, const RunConfig& config) {
    spec.validate();
    config.signal.validate();
    if (config.sample_stride == 0)
        throw std::invalid_argument("run_world: sample stride must be at least 1");

    const std::size_t n = spec.n();
    const std::size_t L = config.horizon;
    PolicyView policy = resolve_policy(spec, config.policy);

    // The sampling weights are always appeal plus accumulated purchases; the
    // init mode only decides what gets *reported* as downloads. Seeding the
    // reported counts with the appeals and folding them into the weights of
    // an unseeded process yield the same share dynamics.
    MarketState state = MarketState::seeded(spec.appeal);
    std::vector<std::uint64_t> downloads(n, 0);
    rng::Xoshiro256pp gen(config.seed, 0);

    const auto reported = [&]() {
        if (config.init == InitMode::AppealSeeded) return state.d;
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<double>(downloads[i]);
        return out;
    };

    Ranking rank = policy.popularity ? rank_by_score(reported(), spec.visibility)
                                     : policy.fixed;
    std::vector<double> ivis = item_visibility(spec, rank);
    std::vector<double> w(n);

    // Power signals only ever change one item's f(d_i) per purchase, so the
    // powers are cached and the single pow call lands on the purchased item.
    // This matches the generic path bit for bit: same inputs, same order.
    const bool power = config.signal.kind == SignalSpec::Kind::Power;
    std::vector<double> pow_d(n);
    if (power)
        for (std::size_t i = 0; i < n; ++i)
            pow_d[i] = state.d[i] > 0.0 ? std::pow(state.d[i], config.signal.r) : 0.0;

    RunRecord rec;
    rec.seed = config.seed;
    rec.config = config;
    rec.trajectory.push_back({0, state.shares()});
    rec.downloads_over_time.push_back(0);

    const bool buy_periods = config.convention == TimeConvention::PurchasePeriod;
    for (std::size_t k = 1; k <= L; ++k) {
        if (policy.popularity && (k - 1) % policy.rerank_every == 0) {
            rank = rank_by_score(reported(), spec.visibility);
            ivis = item_visibility(spec, rank);
        }

        double total = 0.0;
        if (power) {
            if (buy_periods) {
                for (std::size_t i = 0; i < n; ++i) {
                    w[i] = ivis[i] * pow_d[i] * spec.quality[i];
                    total += w[i];
                }
            } else {
                for (std::size_t i = 0; i < n; ++i) {
                    w[i] = ivis[i] * pow_d[i];
                    total += w[i];
                }
            }
            if (!(total > 0.0))
                throw std::domain_error("trial weights vanish on every item");
        } else {
            total = buy_periods
                        ? fill_purchase_weights(spec, ivis, config.signal, state.d,
                                                state.total_mass(), w)
                        : fill_try_weights(spec, ivis, config.signal, state.d,
                                           state.total_mass(), w);
        }

        const std::size_t picked = rng::sample_categorical(w, total, gen.uniform());
        bool bought = buy_periods;
        if (!buy_periods) {
            state.arrivals += 1;
            bought = gen.uniform() < spec.quality[picked];
        }
        if (bought) {
            state.d[picked] += 1.0;
            state.purchases += 1;
            downloads[picked] += 1;
            if (power) pow_d[picked] = std::pow(state.d[picked], config.signal.r);
        }

        if (k % config.sample_stride == 0 || k == L) {
            rec.trajectory.push_back({k, state.shares()});
            rec.downloads_over_time.push_back(state.purchases);
        }
    }

    rec.final_d = reported();  // reads `downloads`, so fill it before the move
    rec.downloads = std::move(downloads);
    return rec;
}

std::vector<RunRecord> run_ensemble(const MarketSpec& spec, const RunConfig& config,
                                    std::size_t worlds, std::size_t threads) {
    if (worlds == 0) throw std::invalid_argument("run_ensemble: no worlds requested");

    std::vector<RunRecord> results(worlds);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    const auto worker = [&]() {
        for (;;) {
            const std::size_t w = next.fetch_add(1);
            if (w >= worlds) return;
            try {
                RunConfig cfg = config;
                cfg.seed = rng::derive_stream_seed(config.seed, w);
                results[w] = run_world(spec, cfg);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    std::size_t pool = threads;
    if (pool == 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        pool = hw == 0 ? 1 : hw;
    }
    pool = std::min(pool, worlds);

    if (pool <= 1) {
        worker();
    } else {
        std::vector<std::thread> crew;
        crew.reserve(pool);
        for (std::size_t t = 0; t < pool; ++t) crew.emplace_back(worker);
        for (auto& th : crew) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return results;
}

void write_run_csv(const RunRecord& record, const std::string& path,
                   const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_run_csv: cannot open " + path);
    out << std::setprecision(17);
    if (!header_comment.empty()) out << "# " << header_comment << "\n";
    out << "period,item,share\n";
    for (const TrajectorySample& s : record.trajectory)
        for (std::size_t i = 0; i < s.shares.size(); ++i)
            out << s.period << "," << i + 1 << "," << s.shares[i] << "\n";
    if (!out) throw std::runtime_error("write_run_csv: write failed for " + path);
}

void write_run_summary_json(const RunRecord& record, const std::string& path) {
    nlohmann::json j;
    j["seed"] = record.seed;
    j["periods"] = record.config.horizon;
    j["final_shares"] = record.trajectory.empty() ? std::vector<double>{}
                                                  : record.trajectory.back().shares;
    j["final_d"] = record.final_d;
    j["downloads"] = record.downloads;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_run_summary_json: cannot open " + path);
    out << j.dump(2) << "\n";
    if (!out)
        throw std::runtime_error("write_run_summary_json: write failed for " + path);
}

}  // namespace tom
