#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tom/model.hpp"

namespace tom {

// Stability of a rest point of the share dynamics, judged by the trace of
// the Jacobian restricted to the simplex.
enum class StabilityClass {
    InnerUnique,      // full support, exponent < 1: the unique attractor
    UnstableByTrace,  // positive trace rules out a sink
    MonopolyVertex,   // single-item support (a simplex vertex)
    Indeterminate,    // trace alone does not decide
};

std::string to_string(StabilityClass c);

struct Equilibrium {
    std::vector<std::size_t> support;  // item indices with positive share, ascending
    std::vector<double> shares;        // full length-n vector, zero off support
    double r = 0.0;                    // signal exponent the point was computed for
    double trace = 0.0;                // trace of the constrained Jacobian
    StabilityClass classification = StabilityClass::Indeterminate;
};

// Rest point of the mean-field dynamics with all mass on `support`, under a
// power signal with exponent r (r != 1).  Shares on the support are
// proportional to (v_{sigma(i)} q_i)^{1/(1-r)}; off-support shares are zero.
Equilibrium equilibrium_for_support(const MarketSpec& spec, const Ranking& rank,
                                    double r,
                                    const std::vector<std::size_t>& support);

// Diagonal entries of the Jacobian of F(phi) = p(phi) - phi at a rest point,
// with off-diagonal perturbations absorbed into the simplex constraint.
// Requires p(phi) = phi to within 1e-10; a zero share with exponent < 1 puts
// the derivative on its singularity and is rejected.
std::vector<double> jacobian_diagonal(const MarketSpec& spec,
                                      const Ranking& rank,
                                      const SignalSpec& sig,
                                      const std::vector<double>& phi);

// Fills in trace and classification for a rest point of an n-item market.
Equilibrium trace_and_classify(Equilibrium eq, std::size_t n);

// Expected purchases per arriving consumer when shares sit at `shares`:
// sum_i P_i(shares) q_i.
double expected_purchases_at(const MarketSpec& spec, const Ranking& rank,
                             const SignalSpec& sig,
                             const std::vector<double>& shares);

enum class SearchMethod {
    Exhaustive,       // all n! rankings; n <= 10
    LocalSearchSwap,  // pairwise-swap hill climbing from the quality ranking
};

struct RankingSearchResult {
    Ranking ranking;
    double value = 0.0;  // expected purchases at the interior rest point
};

// Static ranking maximizing long-run expected purchases under a power signal
// with exponent r < 1 (so the interior rest point is the attractor).
RankingSearchResult optimal_static_ranking(const MarketSpec& spec, double r,
                                           SearchMethod method);

}  // namespace tom
