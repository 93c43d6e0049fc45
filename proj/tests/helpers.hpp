#pragma once

#include <vector>

#include "tom/model.hpp"
#include "tom/rng.hpp"

namespace tom::testing {

// Market with qualities and visibilities bounded away from zero so that
// share ratios at rest points stay moderate.
inline MarketSpec random_market(rng::Xoshiro256pp& gen, std::size_t n) {
    MarketSpec spec;
    for (std::size_t i = 0; i < n; ++i) {
        spec.quality.push_back(0.2 + 0.8 * gen.uniform());
        spec.appeal.push_back(0.1 + 0.9 * gen.uniform());
        spec.visibility.push_back(0.2 + 0.8 * gen.uniform());
    }
    return spec;
}

inline std::vector<double> random_shares(rng::Xoshiro256pp& gen, std::size_t n) {
    std::vector<double> s(n);
    double total = 0.0;
    for (double& v : s) {
        v = 0.05 + gen.uniform();
        total += v;
    }
    for (double& v : s) v /= total;
    return s;
}

}  // namespace tom::testing
