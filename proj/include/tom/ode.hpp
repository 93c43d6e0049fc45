#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "tom/model.hpp"

namespace tom {

struct OdeTrajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;  // states[k] is the share vector at times[k]
    double h = 0.0;
};

// Right-hand side of the mean-field share dynamics, F(phi) = p(phi) - phi.
// Components sum to zero whenever phi sums to one.
std::vector<double> vector_field(const MarketSpec& spec, const Ranking& rank,
                                 const SignalSpec& sig,
                                 const std::vector<double>& phi);

// Classical fourth-order Runge-Kutta with the state renormalized onto the
// simplex after every step.  phi0 must be strictly interior.  If a step
// carries the state outside [0,1]^n by more than 1e-9 before renormalization
// the step size is too coarse and the integration aborts.
OdeTrajectory integrate(const MarketSpec& spec, const Ranking& rank,
                        const SignalSpec& sig, const std::vector<double>& phi0,
                        double t_end, double h);

// Largest deviation over the trajectory of
//   H_ij(t) = phi_i^(1-r)/qbar_i - phi_j^(1-r)/qbar_j
// from the closed form e^{(r-1)t} H_ij(0).  Every visited state must keep
// both coordinates strictly positive; boundary contact is rejected.
double decay_residual(const OdeTrajectory& traj, const MarketSpec& spec,
                      const Ranking& rank, double r, std::size_t i,
                      std::size_t j);

// Writes "t,phi_1,...,phi_n" rows, one per sample.
void write_trajectory_csv(const OdeTrajectory& traj, const std::string& path,
                          const std::string& header_comment = "");

}  // namespace tom
