#include "tom/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "tom/signals.hpp"

namespace tom {
namespace {

constexpr double kRestPointTol = 1e-10;

std::vector<double> weighted_quality(const MarketSpec& spec, const Ranking& rank) {
    std::vector<double> qbar(spec.n());
    for (std::size_t i = 0; i < spec.n(); ++i)
        qbar[i] = spec.visibility[rank.position_of[i]] * spec.quality[i];
    return qbar;
}

std::vector<std::size_t> full_support(std::size_t n) {
    std::vector<std::size_t> s(n);
    std::iota(s.begin(), s.end(), std::size_t{0});
    return s;
}

double ranking_value(const MarketSpec& spec, const Ranking& rank, double r) {
    const Equilibrium eq =
        equilibrium_for_support(spec, rank, r, full_support(spec.n()));
    return expected_purchases_at(spec, rank, SignalSpec::power(r), eq.shares);
}

}  // namespace

std::string to_string(StabilityClass c) {
    switch (c) {
        case StabilityClass::InnerUnique: return "InnerUnique";
        case StabilityClass::UnstableByTrace: return "UnstableByTrace";
        case StabilityClass::MonopolyVertex: return "MonopolyVertex";
        case StabilityClass::Indeterminate: return "Indeterminate";
    }
    return "Indeterminate";
}

Equilibrium equilibrium_for_support(const MarketSpec& spec, const Ranking& rank,
                                    double r,
                                    const std::vector<std::size_t>& support) {
    spec.validate();
    if (rank.position_of.size() != spec.n() || !rank.is_permutation())
        throw std::invalid_argument("equilibrium_for_support: invalid ranking");
    if (!(r > 0.0))
        throw std::invalid_argument("equilibrium_for_support: exponent must be positive");
    if (r == 1.0)
        throw std::invalid_argument(
            "equilibrium_for_support: exponent 1 has a continuum of rest points");
    if (support.empty())
        throw std::invalid_argument("equilibrium_for_support: empty support");

    std::vector<std::size_t> q = support;
    std::sort(q.begin(), q.end());
    if (q.back() >= spec.n() || std::adjacent_find(q.begin(), q.end()) != q.end())
        throw std::invalid_argument("equilibrium_for_support: bad support indices");

    // Shares on the support solve phi_i^(1-r)/qbar_i = const, so they are
    // proportional to qbar_i^(1/(1-r)). The exponent can be large for r near
    // 1, so the powers are taken in log space.
    const std::vector<double> qbar = weighted_quality(spec, rank);
    const double s = 1.0 / (1.0 - r);
    std::vector<double> logw(q.size());
    for (std::size_t k = 0; k < q.size(); ++k) logw[k] = s * std::log(qbar[q[k]]);
    const double m = *std::max_element(logw.begin(), logw.end());
    double z = 0.0;
    for (double lw : logw) z += std::exp(lw - m);
    const double lse = m + std::log(z);

    Equilibrium eq;
    eq.support = std::move(q);
    eq.shares.assign(spec.n(), 0.0);
    for (std::size_t k = 0; k < eq.support.size(); ++k)
        eq.shares[eq.support[k]] = std::exp(logw[k] - lse);
    eq.r = r;
    return trace_and_classify(std::move(eq), spec.n());
}

std::vector<double> jacobian_diagonal(const MarketSpec& spec, const Ranking& rank,
                                      const SignalSpec& sig,
                                      const std::vector<double>& phi) {
    const std::vector<double> p = purchase_probabilities(spec, rank, sig, phi);
    for (std::size_t i = 0; i < spec.n(); ++i)
        if (std::abs(p[i] - phi[i]) > kRestPointTol)
            throw std::invalid_argument("jacobian_diagonal: state is not a rest point");

    const std::size_t n = spec.n();
    const std::vector<double> qbar = weighted_quality(spec, rank);
    std::vector<double> f(n), fp(n);
    for (std::size_t i = 0; i < n; ++i) {
        const SignalEval ev = eval_signal(sig, spec.appeal[i], phi[i]);
        if (ev.singular)
            throw std::domain_error(
                "jacobian_diagonal: signal slope is singular at a zero share");
        f[i] = ev.value;
        fp[i] = ev.derivative;
    }

    double denom = 0.0, slope_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        denom += qbar[i] * f[i];
        slope_sum += qbar[i] * fp[i];
    }

    // d/dphi_i of p_i(phi) - phi_i along the simplex, where raising phi_i
    // lowers every other coordinate in equal measure.
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double own = (1.0 - phi[i]) * qbar[i] * fp[i];
        const double others = phi[i] * (slope_sum - qbar[i] * fp[i]);
        diag[i] = (own + others) / denom - 1.0;
    }
    return diag;
}

Equilibrium trace_and_classify(Equilibrium eq, std::size_t n) {
    const double size_q = static_cast<double>(eq.support.size());
    eq.trace = 2.0 * eq.r * (size_q - 1.0) - static_cast<double>(n);

    if (eq.support.size() == 1) {
        eq.classification = StabilityClass::MonopolyVertex;
    } else if (eq.r < 1.0 && eq.support.size() == n) {
        eq.classification = StabilityClass::InnerUnique;
    } else if (eq.trace > 0.0) {
        eq.classification = StabilityClass::UnstableByTrace;
    } else {
        eq.classification = StabilityClass::Indeterminate;
    }
    return eq;
}

double expected_purchases_at(const MarketSpec& spec, const Ranking& rank,
                             const SignalSpec& sig,
                             const std::vector<double>& shares) {
    const std::vector<double> tries = try_probabilities(spec, rank, sig, shares);
    double total = 0.0;
    for (std::size_t i = 0; i < spec.n(); ++i) total += tries[i] * spec.quality[i];
    return total;
}

RankingSearchResult optimal_static_ranking(const MarketSpec& spec, double r,
                                           SearchMethod method) {
    spec.validate();
    if (!(r > 0.0) || r >= 1.0)
        throw std::invalid_argument(
            "optimal_static_ranking: needs exponent in (0,1) so the interior rest "
            "point is the long-run outcome");

    const std::size_t n = spec.n();
    RankingSearchResult best;

    if (method == SearchMethod::Exhaustive) {
        if (n > 10)
            throw std::invalid_argument(
                "optimal_static_ranking: exhaustive search capped at 10 items");
        Ranking cand = Ranking::identity(n);
        std::sort(cand.position_of.begin(), cand.position_of.end());
        best.ranking = cand;
        best.value = ranking_value(spec, cand, r);
        while (std::next_permutation(cand.position_of.begin(), cand.position_of.end())) {
            const double v = ranking_value(spec, cand, r);
            if (v > best.value) {
                best.value = v;
                best.ranking = cand;
            }
        }
        return best;
    }

    // Best-improvement hill climbing over pairwise position swaps, seeded
    // with the quality ranking.
    best.ranking = quality_ranking(spec);
    best.value = ranking_value(spec, best.ranking, r);
    bool improved = true;
    while (improved) {
        improved = false;
        Ranking next = best.ranking;
        double next_value = best.value;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                Ranking cand = best.ranking;
                std::swap(cand.position_of[i], cand.position_of[j]);
                const double v = ranking_value(spec, cand, r);
                if (v > next_value) {
                    next_value = v;
                    next = cand;
                }
            }
        }
        if (next_value > best.value) {
            best.value = next_value;
            best.ranking = next;
            improved = true;
        }
    }
    return best;
}

}  // namespace tom
