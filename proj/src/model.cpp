#include "tom/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tom/signals.hpp"

namespace tom {
namespace {

// Shares arrive from integrators and renormalized counters, so values a hair
// outside [0,1] are roundoff, not data errors. Anything worse is rejected.
constexpr double kShareSlack = 1e-12;

double clean_share(double s, const char* who) {
    if (s < -kShareSlack || s > 1.0 + kShareSlack)
        throw std::domain_error(std::string(who) + ": share outside [0,1]");
    return std::clamp(s, 0.0, 1.0);
}

std::vector<double> normalize_weights(std::vector<double> w, const char* who) {
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(total > 0.0))
        throw std::domain_error(std::string(who) + ": signal vanishes on every item");
    for (double& x : w) x /= total;
    return w;
}

void check_shapes(const MarketSpec& spec, const Ranking& rank, std::size_t m,
                  const char* who) {
    if (rank.position_of.size() != spec.n() || m != spec.n())
        throw std::invalid_argument(std::string(who) + ": size mismatch");
}

}  // namespace

void MarketSpec::validate() const {
    const std::size_t m = quality.size();
    if (m == 0) throw std::invalid_argument("MarketSpec: empty market");
    if (appeal.size() != m || visibility.size() != m)
        throw std::invalid_argument("MarketSpec: quality/appeal/visibility lengths differ");
    for (std::size_t i = 0; i < m; ++i) {
        if (!(quality[i] > 0.0) || quality[i] > 1.0)
            throw std::invalid_argument("MarketSpec: quality must lie in (0,1]");
        if (!(appeal[i] > 0.0))
            throw std::invalid_argument("MarketSpec: appeal must be positive");
        if (!(visibility[i] > 0.0))
            throw std::invalid_argument("MarketSpec: visibility must be positive");
    }
}

Ranking Ranking::identity(std::size_t n) {
    Ranking r;
    r.position_of.resize(n);
    std::iota(r.position_of.begin(), r.position_of.end(), std::size_t{0});
    return r;
}

bool Ranking::is_permutation() const {
    std::vector<bool> seen(position_of.size(), false);
    for (std::size_t p : position_of) {
        if (p >= position_of.size() || seen[p]) return false;
        seen[p] = true;
    }
    return true;
}

Ranking rank_by_score(const std::vector<double>& score,
                      const std::vector<double>& visibility) {
    const std::size_t n = score.size();
    if (visibility.size() != n)
        throw std::invalid_argument("rank_by_score: size mismatch");

    std::vector<std::size_t> items(n), positions(n);
    std::iota(items.begin(), items.end(), std::size_t{0});
    std::iota(positions.begin(), positions.end(), std::size_t{0});
    std::stable_sort(items.begin(), items.end(),
                     [&](std::size_t a, std::size_t b) { return score[a] > score[b]; });
    std::stable_sort(positions.begin(), positions.end(), [&](std::size_t a, std::size_t b) {
        return visibility[a] > visibility[b];
    });

    Ranking out;
    out.position_of.resize(n);
    for (std::size_t k = 0; k < n; ++k) out.position_of[items[k]] = positions[k];
    return out;
}

Ranking quality_ranking(const MarketSpec& spec) {
    return rank_by_score(spec.quality, spec.visibility);
}

SignalSpec SignalSpec::power(double r) {
    SignalSpec s;
    s.kind = Kind::Power;
    s.r = r;
    s.validate();
    return s;
}

SignalSpec SignalSpec::affine(double alpha, double beta) {
    SignalSpec s;
    s.kind = Kind::Affine;
    s.alpha = alpha;
    s.beta = beta;
    s.validate();
    return s;
}

void SignalSpec::validate() const {
    if (kind == Kind::Power) {
        if (!(r > 0.0)) throw std::invalid_argument("SignalSpec: exponent must be positive");
    } else {
        if (alpha < 0.0 || beta < 0.0)
            throw std::invalid_argument("SignalSpec: affine coefficients must be nonnegative");
        if (alpha == 0.0 && beta == 0.0)
            throw std::invalid_argument("SignalSpec: affine signal is identically zero");
    }
}

MarketState MarketState::seeded(std::vector<double> initial_d) {
    MarketState st;
    st.seed_mass = std::accumulate(initial_d.begin(), initial_d.end(), 0.0);
    st.d = std::move(initial_d);
    return st;
}

std::vector<double> MarketState::shares() const {
    const double mass = total_mass();
    if (!(mass > 0.0))
        throw std::domain_error("MarketState: shares undefined at zero mass");
    std::vector<double> out(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) out[i] = d[i] / mass;
    return out;
}

std::vector<double> item_visibility(const MarketSpec& spec, const Ranking& rank) {
    check_shapes(spec, rank, spec.n(), "item_visibility");
    std::vector<double> out(spec.n());
    for (std::size_t i = 0; i < spec.n(); ++i)
        out[i] = spec.visibility[rank.position_of[i]];
    return out;
}

std::vector<double> try_probabilities(const MarketSpec& spec, const Ranking& rank,
                                      const SignalSpec& sig,
                                      const std::vector<double>& shares) {
    check_shapes(spec, rank, shares.size(), "try_probabilities");
    std::vector<double> w(spec.n());
    for (std::size_t i = 0; i < spec.n(); ++i) {
        const double phi = clean_share(shares[i], "try_probabilities");
        w[i] = spec.visibility[rank.position_of[i]] *
               eval_signal(sig, spec.appeal[i], phi).value;
    }
    return normalize_weights(std::move(w), "try_probabilities");
}

std::vector<double> purchase_probabilities(const MarketSpec& spec, const Ranking& rank,
                                           const SignalSpec& sig,
                                           const std::vector<double>& shares) {
    check_shapes(spec, rank, shares.size(), "purchase_probabilities");
    std::vector<double> w(spec.n());
    for (std::size_t i = 0; i < spec.n(); ++i) {
        const double phi = clean_share(shares[i], "purchase_probabilities");
        w[i] = spec.visibility[rank.position_of[i]] * spec.quality[i] *
               eval_signal(sig, spec.appeal[i], phi).value;
    }
    return normalize_weights(std::move(w), "purchase_probabilities");
}

std::vector<double> purchase_probabilities_from_counts(const MarketSpec& spec,
                                                       const Ranking& rank,
                                                       const SignalSpec& sig,
                                                       const std::vector<double>& d) {
    check_shapes(spec, rank, d.size(), "purchase_probabilities_from_counts");
    if (sig.kind != SignalSpec::Kind::Power)
        throw std::invalid_argument(
            "purchase_probabilities_from_counts: only power signals are scale invariant");
    std::vector<double> w(spec.n());
    bool any_positive = false;
    for (std::size_t i = 0; i < spec.n(); ++i) {
        if (d[i] < 0.0)
            throw std::invalid_argument("purchase_probabilities_from_counts: negative count");
        if (d[i] > 0.0) any_positive = true;
        const double f = d[i] > 0.0 ? std::pow(d[i], sig.r) : 0.0;
        w[i] = spec.visibility[rank.position_of[i]] * spec.quality[i] * f;
    }
    if (!any_positive)
        throw std::invalid_argument("purchase_probabilities_from_counts: all counts zero");
    return normalize_weights(std::move(w), "purchase_probabilities_from_counts");
}

}  // namespace tom
