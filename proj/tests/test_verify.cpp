#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "captrade/decentralized.hpp"
#include "captrade/stackelberg.hpp"
#include "captrade/transcription.hpp"
#include "captrade/verify.hpp"

using namespace captrade;

namespace {

ValidatedScenario make(const ScenarioConfig& cfg) {
  ValidationOutcome out = validate(cfg);
  REQUIRE(out.report.ok());
  return *out.scenario;
}

double rel_gap(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

struct Solved {
  ValidatedScenario scn;
  PriceEquilibrium eq;
  Solution sol;
  std::vector<double> grid;
};

Solved solved(ScenarioConfig cfg, Model model) {
  ValidatedScenario scn = make(cfg);
  PriceEquilibrium eq = equilibrium_prices(scn);
  Solution sol = model == Model::decentralized ? solve_decentralized(scn, eq)
                                               : solve_stackelberg(scn, eq);
  std::vector<double> grid = uniform_grid(0, 2 * sol.strategies.Gs, 101);
  return {scn, eq, sol, grid};
}

}  // namespace

TEST_CASE("solver coefficients zero out the equilibrium equations") {
  for (Model model : {Model::decentralized, Model::stackelberg}) {
    CAPTURE(model_name(model));
    auto s = solved(reference_scenario(), model);
    HjbResidual res = hjb_residual(s.scn, s.eq, model, s.sol.coeffs, s.grid);
    CHECK(res.overall < thresholds::hjb_residual);
    CHECK(res.manufacturer < thresholds::hjb_residual);
    for (double r : res.retailer) CHECK(r < thresholds::hjb_residual);
  }
}

TEST_CASE("without carbon trading the residual is near machine precision") {
  ScenarioConfig cfg = reference_scenario();
  cfg.environment.p_c = 0;
  for (Model model : {Model::decentralized, Model::stackelberg}) {
    CAPTURE(model_name(model));
    auto s = solved(cfg, model);
    HjbResidual res = hjb_residual(s.scn, s.eq, model, s.sol.coeffs, s.grid);
    CHECK(res.overall < thresholds::hjb_residual_no_trading);
  }
}

TEST_CASE("the residual oracle is sensitive to coefficient perturbations") {
  for (Model model : {Model::decentralized, Model::stackelberg}) {
    CAPTURE(model_name(model));
    auto s = solved(reference_scenario(), model);
    ValueCoefficients bent = s.sol.coeffs;
    bent.B *= 1.01;
    HjbResidual res = hjb_residual(s.scn, s.eq, model, bent, s.grid);
    CHECK(res.overall > thresholds::transcription_residual_floor);
  }
}

TEST_CASE("feedback controls are stationary points of the brackets") {
  for (Model model : {Model::decentralized, Model::stackelberg}) {
    CAPTURE(model_name(model));
    auto s = solved(reference_scenario(), model);
    CHECK(stationarity_check(s.scn, s.eq, model, s.sol.coeffs, s.grid) <
          thresholds::stationarity);
  }
}

TEST_CASE("the gradient probe flags off-equilibrium controls") {
  auto s = solved(reference_scenario(), Model::decentralized);
  const double G = s.sol.strategies.Gs;
  ControlProfile at = controls_at(s.scn, s.eq, Model::decentralized, s.sol.coeffs, G);

  SUBCASE("a shifted price is not stationary") {
    at.p[2] += 0.1;
    CHECK(scaled_gradient(s.scn, s.eq, Model::decentralized, s.sol.coeffs, G, at,
                          ControlKind::price, 2) > 1e-3);
  }
  SUBCASE("suppressed promotion effort is not stationary") {
    at.Er[0] = 0;
    CHECK(scaled_gradient(s.scn, s.eq, Model::decentralized, s.sol.coeffs, G, at,
                          ControlKind::effort_r, 0) > 1e-3);
  }
  SUBCASE("suppressed abatement effort is not stationary") {
    at.Em = 0;
    CHECK(scaled_gradient(s.scn, s.eq, Model::decentralized, s.sol.coeffs, G, at,
                          ControlKind::effort_m) > 1e-3);
  }
}

TEST_CASE("subsidy gradient is stationary only at the equilibrium rate") {
  auto s = solved(reference_scenario(), Model::stackelberg);
  const double G = s.sol.strategies.Gs;
  ControlProfile at = controls_at(s.scn, s.eq, Model::stackelberg, s.sol.coeffs, G);
  CHECK(scaled_gradient(s.scn, s.eq, Model::stackelberg, s.sol.coeffs, G, at,
                        ControlKind::subsidy, 0) < thresholds::stationarity);
  at.x[0] = std::min(0.99, at.x[0] + 0.05);
  CHECK(scaled_gradient(s.scn, s.eq, Model::stackelberg, s.sol.coeffs, G, at,
                        ControlKind::subsidy, 0) > 1e-3);
}

TEST_CASE("controls_at agrees with the strategy laws") {
  for (Model model : {Model::decentralized, Model::stackelberg}) {
    CAPTURE(model_name(model));
    auto s = solved(reference_scenario(), model);
    for (double G : {0.0, 1.7, s.sol.strategies.Gs}) {
      ControlProfile at = controls_at(s.scn, s.eq, model, s.sol.coeffs, G);
      CHECK(rel_gap(at.Em, s.sol.strategies.Em(G)) < 1e-13);
      for (int i = 0; i < 6; ++i) {
        CHECK(rel_gap(at.Er[i], s.sol.strategies.Er[i](G)) < 1e-13);
        CHECK(rel_gap(at.p[i], s.eq.p_star[i]) < 1e-15);
        if (model == Model::stackelberg)
          CHECK(rel_gap(at.x[i], subsidy_at(s.sol.subsidy, i, G)) < 1e-13);
        else
          CHECK(at.x[i] == 0.0);
      }
    }
  }
}

TEST_CASE("transcribed coefficient sets are rejected by the residual oracle") {
  for (Model model : {Model::decentralized, Model::stackelberg}) {
    CAPTURE(model_name(model));
    auto s = solved(reference_scenario(), model);
    TranscribedSolution tr = transcribe(s.scn, s.eq, model);
    HjbResidual res = hjb_residual(s.scn, s.eq, model, tr.coeffs, s.grid);
    CHECK(res.overall > thresholds::transcription_residual_floor);
  }
}

TEST_CASE("transcribed variants differ where the printed algebra slips") {
  auto d = solved(reference_scenario(), Model::decentralized);
  TranscribedSolution trd = transcribe(d.scn, d.eq, Model::decentralized);
  // Linear coefficient: the printed denominator drops a cost factor.
  CHECK(rel_gap(trd.coeffs.B, 1352.8443394181654) < 1e-12);
  CHECK(std::abs(trd.coeffs.B - d.sol.coeffs.B) > 1000);
  // Quadratic term agrees (same quadratic, same root).
  CHECK(rel_gap(trd.coeffs.A, d.sol.coeffs.A) < 1e-12);
  // Constant-term and steady-state displays inherit the slips.
  CHECK(std::abs(trd.Gs - d.sol.strategies.Gs) > 1e-2);

  auto st = solved(reference_scenario(), Model::stackelberg);
  TranscribedSolution trs = transcribe(st.scn, st.eq, Model::stackelberg);
  CHECK(rel_gap(trs.coeffs.D[0], 34.321777367772868) < 1e-12);
  CHECK(std::abs(trs.coeffs.D[0] - st.sol.coeffs.D[0]) > 1e-3);
  CHECK(std::abs(trs.Gs - st.sol.strategies.Gs) > 1e-2);
  REQUIRE(trs.x_at_Gs.size() == 6);
  CHECK(std::abs(trs.x_at_Gs[0] - 0.89597954056617942) > 1e-4);
}

TEST_CASE("dense price solve handles one retailer directly") {
  RetailerParams r;
  r.n = 1;
  r.a = {10};
  r.b = 0.9;
  r.c = 0;
  r.lambda_r = 100;
  r.mu_r = 0.5;
  auto p = dense_price_solve(r);
  REQUIRE(p.size() == 1);
  CHECK(rel_gap(p[0], 10.0 / 1.8) < 1e-14);
}

TEST_CASE("dynamic programming confirms the analytic best responses") {
  GridSpec grid;
  for (Model model : {Model::decentralized, Model::stackelberg}) {
    CAPTURE(model_name(model));
    auto s = solved(reference_scenario(), model);
    for (int agent : {-1, 0}) {
      CAPTURE(agent);
      DpResult dp = dp_best_response(s.scn, s.eq, s.sol, agent, grid);
      CHECK(dp.max_policy_dev_cells <= thresholds::dp_policy_cells);
      CHECK(dp.max_value_rel_dev <= thresholds::dp_value_rel);
      CHECK(dp.interior_lo > 0);
      CHECK(dp.interior_hi < static_cast<int>(dp.G.size()) - 1);
    }
  }
}

TEST_CASE("dynamic programming rejects a distorted policy") {
  auto s = solved(reference_scenario(), Model::decentralized);
  Solution bent = s.sol;
  // Shift the manufacturer's claimed law; the DP recovers the true best
  // response against the others and must now disagree by many cells.
  bent.strategies.Em.intercept *= 1.2;
  GridSpec grid;
  DpResult dp = dp_best_response(s.scn, s.eq, bent, -1, grid);
  CHECK(dp.max_policy_dev_cells > 10);
}

TEST_CASE("dynamic programming stays consistent in a flow-dominated regime") {
  // With a huge discount rate the forward-looking terms vanish: the analytic
  // abatement law collapses toward the flow optimum s*G/lambda_m and the DP,
  // run with a coarser step, must still match it.
  ScenarioConfig cfg = reference_scenario();
  cfg.environment.rho = 100;
  auto s = solved(cfg, Model::decentralized);
  const double s_slope = carbon_demand_slope(s.scn, s.eq);
  CHECK(rel_gap(s.sol.strategies.Em.slope, s_slope / cfg.manufacturer.lambda_m) < 1e-3);

  GridSpec grid;
  grid.dt = 0.1;
  grid.N = 100;
  DpResult dp = dp_best_response(s.scn, s.eq, s.sol, -1, grid);
  CHECK(dp.max_policy_dev_cells <= thresholds::dp_policy_cells);
}

TEST_CASE("dynamic programming sharpens under grid refinement") {
  auto s = solved(reference_scenario(), Model::decentralized);
  double prev_value_dev = 1e9;
  double prev_policy_res = 1e9;
  for (int res : {51, 101, 201}) {
    GridSpec grid;
    grid.nG = res;
    grid.nU = res;
    DpResult dp = dp_best_response(s.scn, s.eq, s.sol, -1, grid);
    // Policy error in control units (cells shrink with the grid).
    const double policy_res = dp.max_policy_dev_cells * dp.control_cell;
    CHECK(dp.max_value_rel_dev <= prev_value_dev * 1.05);
    CHECK(policy_res <= prev_policy_res * 1.05);
    prev_value_dev = dp.max_value_rel_dev;
    prev_policy_res = policy_res;
    CHECK(dp.max_policy_dev_cells <= thresholds::dp_policy_cells);
  }
}

TEST_CASE("dynamic programming is deterministic across runs") {
  auto s = solved(reference_scenario(), Model::stackelberg);
  GridSpec grid;
  DpResult one = dp_best_response(s.scn, s.eq, s.sol, 0, grid);
  DpResult two = dp_best_response(s.scn, s.eq, s.sol, 0, grid);
  REQUIRE(one.value.size() == two.value.size());
  for (size_t k = 0; k < one.value.size(); ++k) {
    CHECK(one.value[k] == two.value[k]);
    CHECK(one.policy[k] == two.policy[k]);
  }
}

TEST_CASE("a control grid that misses the law is a hard error") {
  auto s = solved(reference_scenario(), Model::decentralized);
  GridSpec grid;
  grid.control_margin = -0.6;  // shrinks the bracket past the law's range
  CHECK_THROWS_AS(dp_best_response(s.scn, s.eq, s.sol, -1, grid), std::runtime_error);
}

TEST_CASE("value consistency holds for both models") {
  for (Model model : {Model::decentralized, Model::stackelberg}) {
    CAPTURE(model_name(model));
    auto s = solved(reference_scenario(), model);
    ValueConsistency vc = value_consistency(s.scn, s.eq, s.sol);
    CHECK(vc.worst_rel_gap < thresholds::value_consistency);
    REQUIRE(vc.Vr.size() == 6);
    CHECK(rel_gap(vc.Vm_quadrature, vc.Vm) < thresholds::value_consistency);
  }
}
