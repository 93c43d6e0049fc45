#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace tom {

// A market of n products. quality[i] is the probability a consumer who tries
// product i buys it; appeal[i] shapes behaviour before any purchases exist;
// visibility[j] is the propensity to try whatever sits in display position j.
struct MarketSpec {
    std::vector<double> quality;     // q_i in (0,1]
    std::vector<double> appeal;      // a_i > 0
    std::vector<double> visibility;  // v_j > 0, indexed by position

    std::size_t n() const { return quality.size(); }
    void validate() const;  // throws std::invalid_argument on any violation
};

// Assignment of products to display positions: position_of[i] is the 0-based
// position showing product i.
struct Ranking {
    std::vector<std::size_t> position_of;

    static Ranking identity(std::size_t n);
    bool is_permutation() const;
};

// Rank by descending score, most attractive position first: the item with the
// k-th highest score lands in the position with the k-th highest visibility.
// Ties broken by index, ascending, on both sides.
Ranking rank_by_score(const std::vector<double>& score, const std::vector<double>& visibility);
Ranking quality_ranking(const MarketSpec& spec);

struct SignalSpec {
    enum class Kind { Power, Affine };

    Kind kind = Kind::Power;
    double r = 1.0;      // Power: f(x) = x^r, r > 0
    double alpha = 0.0;  // Affine: f_i(x) = beta*x + alpha*a_i
    double beta = 0.0;

    static SignalSpec power(double r);
    static SignalSpec affine(double alpha, double beta);
    void validate() const;
};

// Cumulative purchase mass. Counts are real-valued so the process can start
// from d = appeals; purchases add integer increments on top. The share
// denominator is kept as seed_mass + purchase count so the step gain at
// purchase k is exactly 1/(seed_mass + k + 1).
struct MarketState {
    std::vector<double> d;
    double seed_mass = 0.0;
    std::uint64_t arrivals = 0;
    std::uint64_t purchases = 0;

    static MarketState seeded(std::vector<double> initial_d);
    double total_mass() const { return seed_mass + static_cast<double>(purchases); }
    std::vector<double> shares() const;  // recomputed from d, never drifted
};

// Per-item visibility under a ranking: v_{sigma(i)}.
std::vector<double> item_visibility(const MarketSpec& spec, const Ranking& rank);

// Probability that the next arrival tries item i:
//   P_i = v_{sigma(i)} f(phi_i) / sum_j v_{sigma(j)} f(phi_j).
std::vector<double> try_probabilities(const MarketSpec& spec, const Ranking& rank,
                                      const SignalSpec& sig, const std::vector<double>& shares);

// Probability that the next *purchase* is item i (tries that fail to convert
// are integrated out): p_i = v_{sigma(i)} q_i f(phi_i) / sum_j v_{sigma(j)} q_j f(phi_j).
std::vector<double> purchase_probabilities(const MarketSpec& spec, const Ranking& rank,
                                           const SignalSpec& sig, const std::vector<double>& shares);

// Same distribution computed from raw counts; valid for power signals only,
// where f(d_i/D)/f(d_j/D) = f(d_i)/f(d_j).
std::vector<double> purchase_probabilities_from_counts(const MarketSpec& spec, const Ranking& rank,
                                                       const SignalSpec& sig, const std::vector<double>& d);

}  // namespace tom
