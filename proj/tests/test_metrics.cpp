#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "tom/metrics.hpp"
#include "tom/rng.hpp"

using namespace tom;

namespace {

RunRecord stub_record(TimeConvention conv, std::size_t horizon,
                      std::vector<double> final_shares,
                      std::vector<std::uint64_t> cumulative) {
    RunRecord rec;
    rec.config.convention = conv;
    rec.config.horizon = horizon;
    rec.trajectory.push_back({horizon, std::move(final_shares)});
    rec.downloads_over_time = std::move(cumulative);
    return rec;
}

}  // namespace

TEST_CASE("dispersion of one item across three worlds") {
    const std::vector<std::vector<double>> shares = {{0.2}, {0.5}, {0.8}};
    const auto u = unpredictability_per_item(shares);
    REQUIRE(u.size() == 1);
    CHECK(u[0] == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("per-world dispersion averages back to the market figure") {
    rng::Xoshiro256pp gen(111, 0);
    std::vector<std::vector<double>> shares(6, std::vector<double>(4));
    for (auto& row : shares)
        for (double& v : row) v = gen.uniform();

    const auto per_item = unpredictability_per_item(shares);
    const double market =
        std::accumulate(per_item.begin(), per_item.end(), 0.0) /
        static_cast<double>(per_item.size());
    const auto per_world = unpredictability_per_world(shares);
    const double mean_world =
        std::accumulate(per_world.begin(), per_world.end(), 0.0) /
        static_cast<double>(per_world.size());
    CHECK(mean_world == doctest::Approx(market).epsilon(1e-12));
}

TEST_CASE("dispersion needs at least two comparable worlds") {
    CHECK_THROWS_AS(unpredictability_per_item({{0.5}}), std::invalid_argument);
    CHECK_THROWS_AS(unpredictability_per_item({{0.5}, {0.4, 0.6}}),
                    std::invalid_argument);
}

TEST_CASE("exact rank test on the textbook example") {
    const MwResult less = mann_whitney_u({1.0, 2.0}, {3.0, 4.0}, MwAlternative::a_less);
    CHECK(less.exact);
    CHECK(less.u_a == 0.0);
    CHECK(less.p == doctest::Approx(1.0 / 6.0).epsilon(1e-12));

    const MwResult greater =
        mann_whitney_u({1.0, 2.0}, {3.0, 4.0}, MwAlternative::a_greater);
    CHECK(greater.p == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("identical samples are judged indistinguishable") {
    const std::vector<double> x = {1.0, 2.0, 3.0, 4.0};
    const MwResult res = mann_whitney_u(x, x, MwAlternative::two_sided);
    CHECK(res.p >= 0.99);
}

TEST_CASE("mirrored alternatives agree after swapping the samples") {
    rng::Xoshiro256pp gen(222, 0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t na = 3 + gen.next() % 10;
        const std::size_t nb = 3 + gen.next() % 10;
        std::vector<double> a(na), b(nb);
        for (double& v : a) v = std::floor(10.0 * gen.uniform());
        for (double& v : b) v = std::floor(10.0 * gen.uniform());

        const MwResult fwd = mann_whitney_u(a, b, MwAlternative::a_less);
        const MwResult rev = mann_whitney_u(b, a, MwAlternative::a_greater);
        CHECK(fwd.p == doctest::Approx(rev.p).epsilon(1e-12));

        std::vector<double> shuffled = a;
        std::reverse(shuffled.begin(), shuffled.end());
        const MwResult perm = mann_whitney_u(shuffled, b, MwAlternative::a_less);
        CHECK(perm.p == fwd.p);
    }
}

TEST_CASE("normal approximation tracks exact enumeration at moderate sizes") {
    // 9 vs 8 values forces the approximate branch; enumerate the permutation
    // distribution here as the oracle.
    const std::vector<double> a = {0.12, 0.54, 0.31, 0.92, 0.77, 0.05, 0.48, 0.66, 0.21};
    const std::vector<double> b = {0.35, 0.61, 0.14, 0.88, 0.52, 0.27, 0.73, 0.44};
    const MwResult approx = mann_whitney_u(a, b, MwAlternative::a_less);
    CHECK_FALSE(approx.exact);

    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> rank(pooled.size());
    for (std::size_t i = 0; i < pooled.size(); ++i)
        rank[i] = static_cast<double>(
                      std::lower_bound(sorted.begin(), sorted.end(), pooled[i]) -
                      sorted.begin()) +
                  1.0;

    const std::size_t na = a.size(), N = pooled.size();
    double ra = 0.0;
    for (std::size_t i = 0; i < na; ++i) ra += rank[i];
    const double u_obs = ra - 0.5 * static_cast<double>(na * (na + 1));

    std::vector<std::size_t> idx(na);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::uint64_t total = 0, le = 0;
    for (;;) {
        double rs = 0.0;
        for (std::size_t k : idx) rs += rank[k];
        ++total;
        if (rs - 0.5 * static_cast<double>(na * (na + 1)) <= u_obs + 1e-9) ++le;
        std::size_t pos = na;
        while (pos > 0 && idx[pos - 1] == N - na + pos - 1) --pos;
        if (pos == 0) break;
        ++idx[pos - 1];
        for (std::size_t k = pos; k < na; ++k) idx[k] = idx[k - 1] + 1;
    }
    const double exact_p = static_cast<double>(le) / static_cast<double>(total);
    CHECK(std::abs(approx.p - exact_p) <= 0.02);
}

TEST_CASE("rank test rejects empty samples") {
    CHECK_THROWS_AS(mann_whitney_u({}, {1.0}, MwAlternative::a_less),
                    std::invalid_argument);
}

TEST_CASE("efficiency curve averages cumulative downloads pointwise") {
    std::vector<RunRecord> records;
    records.push_back(
        stub_record(TimeConvention::ArrivalPeriod, 4, {1.0}, {0, 1, 2, 2, 3}));
    records.push_back(
        stub_record(TimeConvention::ArrivalPeriod, 4, {1.0}, {0, 0, 2, 4, 5}));
    const auto curve = efficiency_curve(records);
    REQUIRE(curve.size() == 5);
    CHECK(curve[1] == doctest::Approx(0.5));
    CHECK(curve[3] == doctest::Approx(3.0));
    CHECK(curve[4] == doctest::Approx(4.0));
}

TEST_CASE("efficiency curve refuses mixed conventions or grids") {
    std::vector<RunRecord> records;
    records.push_back(
        stub_record(TimeConvention::PurchasePeriod, 4, {1.0}, {0, 1, 2, 2, 3}));
    CHECK_THROWS_AS(efficiency_curve(records), std::invalid_argument);

    records.clear();
    records.push_back(
        stub_record(TimeConvention::ArrivalPeriod, 4, {1.0}, {0, 1, 2, 2, 3}));
    records.push_back(stub_record(TimeConvention::ArrivalPeriod, 3, {1.0}, {0, 1, 2, 2}));
    CHECK_THROWS_AS(efficiency_curve(records), std::invalid_argument);
}

TEST_CASE("ensemble stats glue the pieces together") {
    std::vector<RunRecord> records;
    records.push_back(
        stub_record(TimeConvention::ArrivalPeriod, 4, {0.2, 0.8}, {0, 1, 2, 2, 3}));
    records.push_back(
        stub_record(TimeConvention::ArrivalPeriod, 4, {0.6, 0.4}, {0, 0, 2, 4, 5}));
    const EnsembleStats stats = compute_ensemble_stats(records);
    CHECK(stats.final_shares.size() == 2);
    CHECK(stats.u_items[0] == doctest::Approx(0.4));
    CHECK(stats.u_market == doctest::Approx(0.4));
    CHECK(stats.u_per_world.size() == 2);
    CHECK(stats.mean_downloads_curve.size() == 5);

    CHECK_THROWS_AS(compute_ensemble_stats({records.front()}), std::invalid_argument);
}
