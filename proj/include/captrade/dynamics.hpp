#pragma once

#include <optional>
#include <string>
#include <vector>

#include "captrade/equilibrium.hpp"

namespace captrade {

// Closed-loop time series on the fixed grid t_k = k*dt, k = 0..steps.
// Per-retailer series are stored as one vector per retailer.
struct Trajectory {
  std::vector<double> t;
  std::vector<double> G;
  std::vector<double> Em;
  std::vector<std::vector<double>> Er;  // [retailer][time]
  std::vector<std::vector<double>> Q;   // [retailer][time]
  std::vector<double> F;                // carbon account F0 - (1-omega*Em)*sum(Q); may go negative
  std::vector<std::vector<double>> x;   // [retailer][time]; empty when unsubsidized
  std::vector<double> pi_m;             // manufacturer profit flow
  std::vector<std::vector<double>> pi_r;

  double Gs = 0;         // fixed point implied by the integrated laws
  double delta_eff = 0;  // affine drift rate implied by the integrated laws

  // Steady flows at Gs, used for the analytic quadrature tail.
  double pi_m_steady = 0;
  std::vector<double> pi_r_steady;

  // |G_rk4 - G_exact| max over the grid (the closed loop is scalar-affine, so
  // the exact solution is available and always cross-checked).
  double max_integration_gap = 0;
  // Max gap between the closed-loop trajectory (rate delta_eff) and the
  // nominal-decay trajectory (rate delta). Reported, never asserted small.
  double max_nominal_decay_gap = 0;
};

// Integrates the closed loop with classical fixed-step RK4. The subsidy law
// may be absent (decentralized) and the strategies may be hand-built (e.g.
// all-zero laws give pure reputation decay). Throws SolveError
// (transversality) when the implied drift does not contract, and
// std::invalid_argument when dt*|delta_eff| >= 0.5.
Trajectory simulate(const ValidatedScenario& scenario, const PriceEquilibrium& eq,
                    const FeedbackStrategies& strategies, const SubsidyLaw* subsidy = nullptr);

struct QuadratureInfo {
  double tail_weight = 0;     // e^(-rho*T_end)
  bool tail_tol_met = false;  // tail_weight < sim.tail_tol
  double steady_flow = 0;     // flow used for the analytic tail
};

// Discounted profit integral_0^inf e^(-rho t) flow dt: composite Simpson on
// the stored grid plus the analytic steady-state tail e^(-rho T)*flow(Gs)/rho.
// retailer < 0 selects the manufacturer. A too-short horizon is surfaced
// through `info` (truncation report), not an exception.
double discounted_profit(const Trajectory& traj, const ValidatedScenario& scenario, int retailer,
                         QuadratureInfo* info = nullptr);

// CSV with header t,G,Em,Er_1..Er_n,Q_1..Q_n,F,x_1..x_n,pi_m,pi_r_1..pi_r_n
// and 17-significant-digit floats; byte-stable across runs.
std::string trajectory_csv(const Trajectory& traj);

}  // namespace captrade
