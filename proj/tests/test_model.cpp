#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "tom/model.hpp"
#include "tom/rng.hpp"

using namespace tom;

TEST_CASE("market validation rejects malformed specs") {
    MarketSpec ok;
    ok.quality = {0.5, 1.0};
    ok.appeal = {1.0, 0.3};
    ok.visibility = {1.0, 0.8};
    CHECK_NOTHROW(ok.validate());

    MarketSpec bad = ok;
    bad.quality.clear();
    bad.appeal.clear();
    bad.visibility.clear();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = ok;
    bad.appeal.pop_back();
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = ok;
    bad.quality[0] = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad.quality[0] = 1.2;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = ok;
    bad.appeal[1] = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    bad = ok;
    bad.visibility[1] = -0.1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("rankings know whether they are permutations") {
    CHECK(Ranking::identity(4).is_permutation());
    CHECK_FALSE(Ranking{{0, 0, 1}}.is_permutation());
    CHECK_FALSE(Ranking{{0, 3}}.is_permutation());
}

TEST_CASE("rank_by_score pairs high scores with high visibility") {
    // scores: item2 best, then item0, then item1; visibility peaks at slot 1
    const Ranking r = rank_by_score({0.5, 0.1, 0.9}, {0.6, 0.9, 0.3});
    CHECK(r.position_of[2] == 1);
    CHECK(r.position_of[0] == 0);
    CHECK(r.position_of[1] == 2);

    // ties go to the lower index on both sides
    const Ranking t = rank_by_score({0.5, 0.5}, {0.7, 0.7});
    CHECK(t.position_of[0] == 0);
    CHECK(t.position_of[1] == 1);
}

TEST_CASE("try probabilities follow visibility-weighted signals") {
    MarketSpec spec;
    spec.quality = {1.0, 0.4};
    spec.appeal = {1.0, 0.3};
    spec.visibility = {1.0, 1.0};

    // sqrt(0.8)/sqrt(0.2) = 2, so the split is exactly 2:1
    const auto p = try_probabilities(spec, Ranking::identity(2),
                                     SignalSpec::power(0.5), {0.8, 0.2});
    CHECK(p[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("probabilities normalize and respect scale invariance") {
    rng::Xoshiro256pp gen(101, 0);
    for (int trial = 0; trial < 10000; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(gen.next() % 6);
        const MarketSpec spec = testing::random_market(gen, n);
        const std::vector<double> shares = testing::random_shares(gen, n);
        double r = 0.1 + 2.9 * gen.uniform();
        if (r == 1.0) r = 1.1;
        const SignalSpec sig = SignalSpec::power(r);
        const Ranking rank = Ranking::identity(n);

        const auto tries = try_probabilities(spec, rank, sig, shares);
        const auto buys = purchase_probabilities(spec, rank, sig, shares);
        CHECK(std::abs(std::accumulate(tries.begin(), tries.end(), 0.0) - 1.0) <= 1e-12);
        CHECK(std::abs(std::accumulate(buys.begin(), buys.end(), 0.0) - 1.0) <= 1e-12);

        // counts form: any positive rescaling of the counts leaves it alone
        std::vector<double> counts(n), scaled(n);
        const double c = 0.01 + 100.0 * gen.uniform();
        for (std::size_t i = 0; i < n; ++i) {
            counts[i] = shares[i];
            scaled[i] = c * shares[i];
        }
        const auto from_counts = purchase_probabilities_from_counts(spec, rank, sig, counts);
        const auto from_scaled = purchase_probabilities_from_counts(spec, rank, sig, scaled);
        for (std::size_t i = 0; i < n; ++i) {
            CHECK(std::abs(from_counts[i] - from_scaled[i]) <= 1e-12);
            CHECK(std::abs(from_counts[i] - buys[i]) <= 1e-12);
        }
    }
}

TEST_CASE("counts form is power-only and needs a positive count") {
    MarketSpec spec;
    spec.quality = {0.5, 0.5};
    spec.appeal = {1.0, 1.0};
    spec.visibility = {1.0, 1.0};
    const Ranking rank = Ranking::identity(2);

    CHECK_THROWS_AS(purchase_probabilities_from_counts(spec, rank,
                                                       SignalSpec::affine(1.0, 1.0),
                                                       {1.0, 2.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(purchase_probabilities_from_counts(spec, rank,
                                                       SignalSpec::power(0.5),
                                                       {0.0, 0.0}),
                    std::invalid_argument);
    CHECK_THROWS_AS(purchase_probabilities_from_counts(spec, rank,
                                                       SignalSpec::power(0.5),
                                                       {1.0, -0.5}),
                    std::invalid_argument);
}

TEST_CASE("purchase distribution matches the trial-until-purchase series") {
    // Oracle: sum over rounds of (no purchase)^k * P_i * q_i, truncated once
    // the geometric tail drops below 1e-12.
    rng::Xoshiro256pp gen(202, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + static_cast<std::size_t>(gen.next() % 4);
        const MarketSpec spec = testing::random_market(gen, n);
        const std::vector<double> shares = testing::random_shares(gen, n);
        const SignalSpec sig = (trial % 2 == 0)
                                   ? SignalSpec::power(0.2 + 2.0 * gen.uniform())
                                   : SignalSpec::affine(gen.uniform(), 0.5 + gen.uniform());
        const Ranking rank = Ranking::identity(n);

        const auto tries = try_probabilities(spec, rank, sig, shares);
        double stay = 0.0;
        for (std::size_t i = 0; i < n; ++i) stay += tries[i] * (1.0 - spec.quality[i]);

        std::vector<double> series(n, 0.0);
        double weight = 1.0;
        while (weight > 1e-12) {
            for (std::size_t i = 0; i < n; ++i)
                series[i] += weight * tries[i] * spec.quality[i];
            weight *= stay;
        }

        const auto direct = purchase_probabilities(spec, rank, sig, shares);
        for (std::size_t i = 0; i < n; ++i)
            CHECK(std::abs(series[i] - direct[i]) <= 1e-10);
    }
}

TEST_CASE("a better item draws purchases away from the rest") {
    rng::Xoshiro256pp gen(303, 0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + static_cast<std::size_t>(gen.next() % 4);
        MarketSpec spec = testing::random_market(gen, n);
        const std::vector<double> shares = testing::random_shares(gen, n);
        const SignalSpec sig = SignalSpec::power(0.2 + 2.0 * gen.uniform());
        const Ranking rank = Ranking::identity(n);
        const std::size_t i = gen.next() % n;

        spec.quality[i] = 0.3 * spec.quality[i];
        const auto low = purchase_probabilities(spec, rank, sig, shares);
        spec.quality[i] = std::min(1.0, spec.quality[i] / 0.3 * 1.5);
        const auto high = purchase_probabilities(spec, rank, sig, shares);
        CHECK(high[i] > low[i]);
    }
}

TEST_CASE("degenerate share inputs are rejected") {
    MarketSpec spec;
    spec.quality = {0.5, 0.5};
    spec.appeal = {1.0, 1.0};
    spec.visibility = {1.0, 1.0};
    const Ranking rank = Ranking::identity(2);

    // every item at zero share kills a power signal outright
    CHECK_THROWS_AS(try_probabilities(spec, rank, SignalSpec::power(2.0), {0.0, 0.0}),
                    std::domain_error);
    CHECK_THROWS_AS(try_probabilities(spec, rank, SignalSpec::power(0.5), {0.5, -0.01}),
                    std::domain_error);
    CHECK_THROWS_AS(try_probabilities(spec, rank, SignalSpec::power(0.5), {1.02, 0.0}),
                    std::domain_error);
    CHECK_THROWS_AS(try_probabilities(spec, rank, SignalSpec::power(0.5), {0.5}),
                    std::invalid_argument);

    // a hair of negative roundoff is treated as zero
    CHECK_NOTHROW(try_probabilities(spec, rank, SignalSpec::power(2.0), {1.0, -1e-13}));
}

TEST_CASE("market state recomputes shares from the counts") {
    MarketState st = MarketState::seeded({0.38, 0.35, 0.46, 0.27, 0.62});
    CHECK(st.total_mass() == doctest::Approx(2.08).epsilon(1e-15));
    const auto s = st.shares();
    CHECK(s[2] == doctest::Approx(0.46 / 2.08).epsilon(1e-15));

    st.d[1] += 1.0;
    st.purchases += 1;
    CHECK(st.total_mass() == doctest::Approx(3.08).epsilon(1e-15));
    CHECK(st.shares()[1] == doctest::Approx(1.35 / 3.08).epsilon(1e-15));

    MarketState empty = MarketState::seeded({0.0, 0.0});
    CHECK_THROWS_AS(empty.shares(), std::domain_error);
}
