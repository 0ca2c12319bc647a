#pragma once

#include <vector>

#include "captrade/dynamics.hpp"
#include "captrade/equilibrium.hpp"

namespace captrade {

// Independent oracles for the analytic solutions. Everything here consumes a
// coefficient set and rebuilds controls from first-order response functions,
// so any coefficient source (solver output, transcription variants, manual
// perturbations) can be checked on equal footing.

// Oracle targets, pinned once and shared by the CLI gate and the test suite.
namespace thresholds {
inline constexpr double hjb_residual = 1e-8;            // canonical coefficients
inline constexpr double hjb_residual_no_trading = 1e-10;  // exact-algebra branch (p_c = 0)
inline constexpr double stationarity = 1e-6;
inline constexpr double value_consistency = 1e-5;  // relative to max(1, |V|)
inline constexpr double dp_policy_cells = 1.0;
inline constexpr double dp_value_rel = 0.02;
inline constexpr double price_oracle_rel = 1e-10;
inline constexpr double subsidy_identity = 1e-12;
inline constexpr double transcription_residual_floor = 1e-3;  // transcribed sets must exceed this
}  // namespace thresholds

std::vector<double> uniform_grid(double lo, double hi, int points);

struct HjbResidual {
  double manufacturer = 0;
  std::vector<double> retailer;
  double overall = 0;
};

// Max over the grid of |rho*V(G) - bracket(G, controls(G))| / max(1, |rho*V(G)|)
// per agent, with controls rebuilt from `coeffs`.
HjbResidual hjb_residual(const ValidatedScenario& scenario, const PriceEquilibrium& eq,
                         Model model, const ValueCoefficients& coeffs,
                         const std::vector<double>& G_grid);

// One agent profile of controls at a state, as implied by a coefficient set.
struct ControlProfile {
  double Em = 0;
  std::vector<double> Er;
  std::vector<double> p;
  std::vector<double> x;  // zeros when unsubsidized
};

ControlProfile controls_at(const ValidatedScenario& scenario, const PriceEquilibrium& eq,
                           Model model, const ValueCoefficients& coeffs, double G);

enum class ControlKind { effort_m, effort_r, price, subsidy };

// Scaled central-difference gradient of the owning agent's HJB bracket in one
// control: |df/du| * max(1,|u|) / max(1,|rho*V(G)|), others held fixed.
// Perturbing the subsidy re-evaluates the follower's effort response, since
// the leader optimizes against the reaction function.
double scaled_gradient(const ValidatedScenario& scenario, const PriceEquilibrium& eq, Model model,
                       const ValueCoefficients& coeffs, double G, const ControlProfile& at,
                       ControlKind kind, int retailer = 0);

// Max scaled gradient over the grid, all agents, all own controls.
double stationarity_check(const ValidatedScenario& scenario, const PriceEquilibrium& eq,
                          Model model, const ValueCoefficients& coeffs,
                          const std::vector<double>& G_grid);

struct GridSpec {
  int nG = 201;
  int nU = 201;
  double dt = 0.05;
  int N = 400;
  double control_margin = 0.5;  // control grid = analytic law range widened by this fraction
};

struct DpResult {
  std::vector<double> G;
  std::vector<double> policy;  // DP argmax control at the first stage
  std::vector<double> value;   // DP value at the first stage
  std::vector<double> analytic_policy;
  std::vector<double> analytic_value;
  double control_cell = 0;
  int interior_lo = 0;  // inclusive index range over which deviations are measured
  int interior_hi = 0;
  double max_policy_dev_cells = 0;
  double max_value_rel_dev = 0;
};

// Single-agent finite-horizon dynamic program on a discretized state space,
// all other agents pinned to their analytic feedback laws. Backward induction
// with an implicit-Euler discount pairing: one step contributes
// (dt*flow + v_next)/(1 + rho*dt) along the Euler state update. retailer < 0
// selects the manufacturer. Throws std::runtime_error when the control grid
// fails to bracket the analytic law (coverage error).
DpResult dp_best_response(const ValidatedScenario& scenario, const PriceEquilibrium& eq,
                          const Solution& solution, int retailer, const GridSpec& grid);

// Independent dense linear solve of the pricing best-response system
// (row i: 2b*p_i - c*b/(n-1)*sum_{k!=i} p_k = a_i).
std::vector<double> dense_price_solve(const RetailerParams& r);

struct ValueConsistency {
  double Vm_quadrature = 0;
  double Vm = 0;
  std::vector<double> Vr_quadrature;
  std::vector<double> Vr;
  double worst_rel_gap = 0;  // |quadrature - V(G0)| / max(1, |V(G0)|), worst agent
  bool tail_tol_met = false;
};

// Simulates the closed loop and compares discounted quadrature profit with
// the value functions at G0 -- the strongest end-to-end identity available.
ValueConsistency value_consistency(const ValidatedScenario& scenario, const PriceEquilibrium& eq,
                                   const Solution& solution);

}  // namespace captrade
