#include "tom/ode.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace tom {
namespace {

constexpr double kBoundsSlack = 1e-9;  // post-step overshoot treated as roundoff
constexpr double kInteriorFloor = 1e-14;

// Stage states feed back into the signal, which rejects negative shares, so
// stages are pinned to the simplex box. The floor keeps power signals with
// r < 1 away from the derivative singularity at zero.
std::vector<double> clamped(std::vector<double> x, double floor) {
    for (double& v : x) {
        if (v < floor) v = floor;
        if (v > 1.0) v = 1.0;
    }
    return x;
}

std::vector<double> axpy(const std::vector<double>& x, double c,
                         const std::vector<double>& y) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + c * y[i];
    return out;
}

}  // namespace

std::vector<double> vector_field(const MarketSpec& spec, const Ranking& rank,
                                 const SignalSpec& sig,
                                 const std::vector<double>& phi) {
    std::vector<double> f = purchase_probabilities(spec, rank, sig, phi);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] -= phi[i];
    return f;
}

OdeTrajectory integrate(const MarketSpec& spec, const Ranking& rank,
                        const SignalSpec& sig, const std::vector<double>& phi0,
                        double t_end, double h) {
    spec.validate();
    if (phi0.size() != spec.n())
        throw std::invalid_argument("integrate: initial state has wrong length");
    for (double v : phi0)
        if (!(v > 0.0))
            throw std::invalid_argument("integrate: initial state must be strictly interior");
    if (!(t_end > 0.0) || !(h > 0.0))
        throw std::invalid_argument("integrate: horizon and step must be positive");

    const double floor =
        (sig.kind == SignalSpec::Kind::Power && sig.r < 1.0) ? kInteriorFloor : 0.0;
    const auto rhs = [&](const std::vector<double>& x) {
        return vector_field(spec, rank, sig, clamped(x, floor));
    };

    OdeTrajectory traj;
    traj.h = h;
    const std::size_t steps = static_cast<std::size_t>(std::ceil(t_end / h - 1e-9));
    traj.times.reserve(steps + 1);
    traj.states.reserve(steps + 1);

    std::vector<double> x = phi0;
    double mass = 0.0;
    for (double v : x) mass += v;
    for (double& v : x) v /= mass;

    traj.times.push_back(0.0);
    traj.states.push_back(x);

    for (std::size_t k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * h;
        const double dt = std::min(h, t_end - t);

        const std::vector<double> k1 = rhs(x);
        const std::vector<double> k2 = rhs(axpy(x, dt / 2.0, k1));
        const std::vector<double> k3 = rhs(axpy(x, dt / 2.0, k2));
        const std::vector<double> k4 = rhs(axpy(x, dt, k3));

        std::vector<double> next(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            next[i] = x[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            if (next[i] < -kBoundsSlack || next[i] > 1.0 + kBoundsSlack)
                throw std::runtime_error(
                    "integrate: state left the simplex box; reduce the step size");
        }
        next = clamped(std::move(next), floor);
        double total = 0.0;
        for (double v : next) total += v;
        for (double& v : next) v /= total;

        x = std::move(next);
        traj.times.push_back(std::min(t + dt, t_end));
        traj.states.push_back(x);
    }
    return traj;
}

double decay_residual(const OdeTrajectory& traj, const MarketSpec& spec,
                      const Ranking& rank, double r, std::size_t i,
                      std::size_t j) {
    if (i >= spec.n() || j >= spec.n() || i == j)
        throw std::invalid_argument("decay_residual: bad item pair");
    if (traj.states.empty())
        throw std::invalid_argument("decay_residual: empty trajectory");

    const double qi = spec.visibility[rank.position_of[i]] * spec.quality[i];
    const double qj = spec.visibility[rank.position_of[j]] * spec.quality[j];

    const auto gap = [&](const std::vector<double>& phi) {
        if (!(phi[i] > 0.0) || !(phi[j] > 0.0))
            throw std::domain_error("decay_residual: trajectory touched the boundary");
        return std::pow(phi[i], 1.0 - r) / qi - std::pow(phi[j], 1.0 - r) / qj;
    };

    const double h0 = gap(traj.states.front());
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        const double expected = std::exp((r - 1.0) * traj.times[k]) * h0;
        worst = std::max(worst, std::abs(gap(traj.states[k]) - expected));
    }
    return worst;
}

void write_trajectory_csv(const OdeTrajectory& traj, const std::string& path,
                          const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_trajectory_csv: cannot open " + path);
    out << std::setprecision(17);
    if (!header_comment.empty()) out << "# " << header_comment << "\n";
    const std::size_t n = traj.states.empty() ? 0 : traj.states.front().size();
    out << "t";
    for (std::size_t i = 1; i <= n; ++i) out << ",phi_" << i;
    out << "\n";
    for (std::size_t k = 0; k < traj.states.size(); ++k) {
        out << traj.times[k];
        for (double v : traj.states[k]) out << "," << v;
        out << "\n";
    }
    if (!out) throw std::runtime_error("write_trajectory_csv: write failed for " + path);
}

}  // namespace tom
