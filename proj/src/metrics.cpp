#include "tom/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tom {
namespace {

void check_share_matrix(const std::vector<std::vector<double>>& fs, const char* who) {
    if (fs.size() < 2)
        throw std::invalid_argument(std::string(who) + ": needs at least two worlds");
    for (const auto& row : fs)
        if (row.size() != fs.front().size())
            throw std::invalid_argument(std::string(who) + ": ragged share matrix");
    if (fs.front().empty())
        throw std::invalid_argument(std::string(who) + ": no items");
}

// Midranks of the pooled sample (1-based, ties averaged).
std::vector<double> midranks(std::vector<double> pooled) {
    const std::size_t n = pooled.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return pooled[a] < pooled[b]; });
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        const double mid = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
        i = j + 1;
    }
    return rank;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

std::vector<double> unpredictability_per_item(
    const std::vector<std::vector<double>>& final_shares) {
    check_share_matrix(final_shares, "unpredictability_per_item");
    const std::size_t W = final_shares.size();
    const std::size_t n = final_shares.front().size();
    const double pairs = 0.5 * static_cast<double>(W) * static_cast<double>(W - 1);

    std::vector<double> u(n, 0.0);
    for (std::size_t w = 0; w < W; ++w)
        for (std::size_t w2 = w + 1; w2 < W; ++w2)
            for (std::size_t i = 0; i < n; ++i)
                u[i] += std::abs(final_shares[w][i] - final_shares[w2][i]);
    for (double& v : u) v /= pairs;
    return u;
}

std::vector<double> unpredictability_per_world(
    const std::vector<std::vector<double>>& final_shares) {
    check_share_matrix(final_shares, "unpredictability_per_world");
    const std::size_t W = final_shares.size();
    const std::size_t n = final_shares.front().size();

    std::vector<double> u(W, 0.0);
    for (std::size_t w = 0; w < W; ++w) {
        double total = 0.0;
        for (std::size_t w2 = 0; w2 < W; ++w2) {
            if (w2 == w) continue;
            for (std::size_t i = 0; i < n; ++i)
                total += std::abs(final_shares[w][i] - final_shares[w2][i]);
        }
        u[w] = total / (static_cast<double>(n) * static_cast<double>(W - 1));
    }
    return u;
}

MwResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b,
                        MwAlternative alt) {
    const std::size_t na = a.size(), nb = b.size();
    if (na == 0 || nb == 0)
        throw std::invalid_argument("mann_whitney_u: empty sample");

    std::vector<double> pooled = a;
    pooled.insert(pooled.end(), b.begin(), b.end());
    const std::vector<double> rank = midranks(pooled);

    double ra = 0.0;
    for (std::size_t i = 0; i < na; ++i) ra += rank[i];
    const double u_obs = ra - 0.5 * static_cast<double>(na) * static_cast<double>(na + 1);

    MwResult out;
    out.u_a = u_obs;

    if (na <= 8 && nb <= 8) {
        // Permutation distribution conditional on the observed ties: every
        // way of labelling na of the pooled values as group a.
        out.exact = true;
        const std::size_t N = na + nb;
        std::vector<std::size_t> idx(na);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::uint64_t total = 0, le = 0, ge = 0;
        const double eps = 1e-9;
        for (;;) {
            double rs = 0.0;
            for (std::size_t k : idx) rs += rank[k];
            const double u = rs - 0.5 * static_cast<double>(na) * static_cast<double>(na + 1);
            ++total;
            if (u <= u_obs + eps) ++le;
            if (u >= u_obs - eps) ++ge;

            // next lexicographic combination of {0..N-1} choose na
            std::size_t pos = na;
            while (pos > 0 && idx[pos - 1] == N - na + pos - 1) --pos;
            if (pos == 0) break;
            ++idx[pos - 1];
            for (std::size_t k = pos; k < na; ++k) idx[k] = idx[k - 1] + 1;
        }
        const double p_le = static_cast<double>(le) / static_cast<double>(total);
        const double p_ge = static_cast<double>(ge) / static_cast<double>(total);
        switch (alt) {
            case MwAlternative::a_less: out.p = p_le; break;
            case MwAlternative::a_greater: out.p = p_ge; break;
            case MwAlternative::two_sided:
                out.p = std::min(1.0, 2.0 * std::min(p_le, p_ge));
                break;
        }
        return out;
    }

    const double dn_a = static_cast<double>(na), dn_b = static_cast<double>(nb);
    const double N = dn_a + dn_b;
    const double mu = 0.5 * dn_a * dn_b;

    // tie correction: sum of t^3 - t over tie groups
    std::vector<double> sorted = pooled;
    std::sort(sorted.begin(), sorted.end());
    double tie_sum = 0.0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        tie_sum += t * t * t - t;
        i = j + 1;
    }
    const double var = dn_a * dn_b / 12.0 * ((N + 1.0) - tie_sum / (N * (N - 1.0)));
    if (!(var > 0.0)) {
        out.p = 1.0;
        return out;
    }
    const double sigma = std::sqrt(var);
    switch (alt) {
        case MwAlternative::a_less:
            out.p = normal_cdf((u_obs - mu + 0.5) / sigma);
            break;
        case MwAlternative::a_greater:
            out.p = normal_cdf(-(u_obs - mu - 0.5) / sigma);
            break;
        case MwAlternative::two_sided: {
            const double z = (std::abs(u_obs - mu) - 0.5) / sigma;
            out.p = std::min(1.0, 2.0 * normal_cdf(-std::max(z, 0.0)));
            break;
        }
    }
    return out;
}

std::vector<double> efficiency_curve(const std::vector<RunRecord>& records) {
    if (records.empty())
        throw std::invalid_argument("efficiency_curve: no records");
    const RunRecord& first = records.front();
    for (const RunRecord& r : records) {
        if (r.config.convention != TimeConvention::ArrivalPeriod)
            throw std::invalid_argument(
                "efficiency_curve: downloads per arrival need arrival periods");
        if (r.config.horizon != first.config.horizon ||
            r.downloads_over_time.size() != first.downloads_over_time.size())
            throw std::invalid_argument("efficiency_curve: records use different grids");
    }
    std::vector<double> curve(first.downloads_over_time.size(), 0.0);
    for (const RunRecord& r : records)
        for (std::size_t k = 0; k < curve.size(); ++k)
            curve[k] += static_cast<double>(r.downloads_over_time[k]);
    for (double& v : curve) v /= static_cast<double>(records.size());
    return curve;
}

EnsembleStats compute_ensemble_stats(const std::vector<RunRecord>& records) {
    if (records.size() < 2)
        throw std::invalid_argument("compute_ensemble_stats: needs at least two worlds");

    EnsembleStats stats;
    stats.final_shares.reserve(records.size());
    for (const RunRecord& r : records) {
        if (r.trajectory.empty())
            throw std::invalid_argument("compute_ensemble_stats: record has no samples");
        stats.final_shares.push_back(r.trajectory.back().shares);
    }
    stats.u_items = unpredictability_per_item(stats.final_shares);
    stats.u_market = std::accumulate(stats.u_items.begin(), stats.u_items.end(), 0.0) /
                     static_cast<double>(stats.u_items.size());
    stats.u_per_world = unpredictability_per_world(stats.final_shares);

    const bool curve_ok = std::all_of(records.begin(), records.end(), [&](const RunRecord& r) {
        return r.config.convention == TimeConvention::ArrivalPeriod &&
               r.config.horizon == records.front().config.horizon &&
               r.downloads_over_time.size() == records.front().downloads_over_time.size();
    });
    if (curve_ok) stats.mean_downloads_curve = efficiency_curve(records);
    return stats;
}

}  // namespace tom
