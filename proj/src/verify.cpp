#include "captrade/verify.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <thread>

#include "captrade/flows.hpp"

namespace captrade {

std::vector<double> uniform_grid(double lo, double hi, int points) {
  std::vector<double> g(points);
  for (int k = 0; k < points; ++k) g[k] = lo + (hi - lo) * k / (points - 1);
  return g;
}

ControlProfile controls_at(const ValidatedScenario& scenario, const PriceEquilibrium& eq,
                           Model model, const ValueCoefficients& coeffs, double G) {
  const auto& m = scenario.m();
  const auto& r = scenario.r();
  const double s = carbon_demand_slope(scenario, eq);
  const double W = 2 * coeffs.A * G + coeffs.B;  // Vm'(G)

  ControlProfile c;
  c.Em = (s * G + W * m.mu_m) / m.lambda_m;
  c.p = eq.p_star;
  c.Er.resize(r.n);
  c.x.assign(r.n, 0.0);
  if (model == Model::stackelberg) {
    SubsidyLaw law{true, coeffs.A, coeffs.B, coeffs.D};
    for (int i = 0; i < r.n; ++i) {
      c.x[i] = subsidy_at(law, i, G);
      // Follower response mu_r*D_i/(lambda_r*(1-x_i)), simplified at the
      // equilibrium rate.
      c.Er[i] = r.mu_r * (2 * W + coeffs.D[i]) / (2 * r.lambda_r);
    }
  } else {
    for (int i = 0; i < r.n; ++i) c.Er[i] = r.mu_r * coeffs.D[i] / r.lambda_r;
  }
  return c;
}

namespace {

double bracket_m(const ValidatedScenario& scenario, const PriceEquilibrium& eq, Model model,
                 const ValueCoefficients& coeffs, double G, const ControlProfile& c) {
  const double W = 2 * coeffs.A * G + coeffs.B;
  const double flow = manufacturer_flow(scenario, eq, G, c.Em, c.Er,
                                        model == Model::stackelberg ? &c.x : nullptr);
  return flow + W * reputation_drift(scenario, G, c.Em, c.Er);
}

double bracket_r(const ValidatedScenario& scenario, const PriceEquilibrium& eq, Model model,
                 const ValueCoefficients& coeffs, int i, double G, const ControlProfile& c) {
  const double x_i = model == Model::stackelberg ? c.x[i] : 0.0;
  const double flow = retailer_flow(scenario, eq, i, G, c.p[i], c.Er[i], x_i);
  return flow + coeffs.D[i] * reputation_drift(scenario, G, c.Em, c.Er);
}

}  // namespace

HjbResidual hjb_residual(const ValidatedScenario& scenario, const PriceEquilibrium& eq,
                         Model model, const ValueCoefficients& coeffs,
                         const std::vector<double>& G_grid) {
  const int n = scenario.r().n;
  const double rho = scenario.env().rho;
  HjbResidual res;
  res.retailer.assign(n, 0.0);
  for (double G : G_grid) {
    const ControlProfile c = controls_at(scenario, eq, model, coeffs, G);
    const double rV_m = rho * value_m(coeffs, G);
    const double rm = std::abs(rV_m - bracket_m(scenario, eq, model, coeffs, G, c)) /
                      std::max(1.0, std::abs(rV_m));
    res.manufacturer = std::max(res.manufacturer, rm);
    for (int i = 0; i < n; ++i) {
      const double rV_r = rho * value_r(coeffs, i, G);
      const double rr = std::abs(rV_r - bracket_r(scenario, eq, model, coeffs, i, G, c)) /
                        std::max(1.0, std::abs(rV_r));
      res.retailer[i] = std::max(res.retailer[i], rr);
    }
  }
  res.overall = res.manufacturer;
  for (double v : res.retailer) res.overall = std::max(res.overall, v);
  return res;
}

double scaled_gradient(const ValidatedScenario& scenario, const PriceEquilibrium& eq, Model model,
                       const ValueCoefficients& coeffs, double G, const ControlProfile& at,
                       ControlKind kind, int retailer) {
  const auto& r = scenario.r();
  double u = 0;
  switch (kind) {
    case ControlKind::effort_m: u = at.Em; break;
    case ControlKind::effort_r: u = at.Er[retailer]; break;
    case ControlKind::price: u = at.p[retailer]; break;
    case ControlKind::subsidy: u = at.x[retailer]; break;
  }
  const double h = 1e-5 * std::max(1.0, std::abs(u));

  auto eval = [&](double uu) {
    ControlProfile c = at;
    switch (kind) {
      case ControlKind::effort_m:
        c.Em = uu;
        return bracket_m(scenario, eq, model, coeffs, G, c);
      case ControlKind::effort_r:
        c.Er[retailer] = uu;
        return bracket_r(scenario, eq, model, coeffs, retailer, G, c);
      case ControlKind::price:
        c.p[retailer] = uu;
        return bracket_r(scenario, eq, model, coeffs, retailer, G, c);
      case ControlKind::subsidy:
        // The leader optimizes against the follower's reaction
        // Er_i(x) = mu_r*D_i/(lambda_r*(1-x)).
        c.x[retailer] = uu;
        c.Er[retailer] = r.mu_r * coeffs.D[retailer] / (r.lambda_r * (1 - uu));
        return bracket_m(scenario, eq, model, coeffs, G, c);
    }
    return 0.0;
  };

  const double g = (eval(u + h) - eval(u - h)) / (2 * h);
  const double rho = scenario.env().rho;
  const double V_owner = (kind == ControlKind::effort_m || kind == ControlKind::subsidy)
                             ? value_m(coeffs, G)
                             : value_r(coeffs, retailer, G);
  return std::abs(g) * std::max(1.0, std::abs(u)) / std::max(1.0, std::abs(rho * V_owner));
}

double stationarity_check(const ValidatedScenario& scenario, const PriceEquilibrium& eq,
                          Model model, const ValueCoefficients& coeffs,
                          const std::vector<double>& G_grid) {
  const int n = scenario.r().n;
  double worst = 0;
  for (double G : G_grid) {
    const ControlProfile at = controls_at(scenario, eq, model, coeffs, G);
    worst = std::max(worst, scaled_gradient(scenario, eq, model, coeffs, G, at, ControlKind::effort_m));
    for (int i = 0; i < n; ++i) {
      worst = std::max(worst,
                       scaled_gradient(scenario, eq, model, coeffs, G, at, ControlKind::effort_r, i));
      worst = std::max(worst,
                       scaled_gradient(scenario, eq, model, coeffs, G, at, ControlKind::price, i));
      if (model == Model::stackelberg)
        worst = std::max(worst,
                         scaled_gradient(scenario, eq, model, coeffs, G, at, ControlKind::subsidy, i));
    }
  }
  return worst;
}

namespace {

// Quadratic-in-control reduction of one agent's flow and affine drift at a
// fixed state, extracted numerically from the shared flow functions (the flow
// is exactly quadratic in the own control, the drift exactly affine).
struct StageCoeffs {
  double f0, f1, f2;  // flow = f0 + f1*u + f2*u^2
  double d0, d1;      // drift = d0 + d1*u
};

void run_chunked(int total, const std::function<void(int, int)>& work) {
  unsigned hw = std::thread::hardware_concurrency();
  int workers = static_cast<int>(std::min<unsigned>(hw ? hw : 1, 8));
  if (workers <= 1) {
    work(0, total);
    return;
  }
  std::vector<std::thread> pool;
  int chunk = (total + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    int lo = w * chunk, hi = std::min(total, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back(work, lo, hi);
  }
  for (auto& th : pool) th.join();
}

}  // namespace

DpResult dp_best_response(const ValidatedScenario& scenario, const PriceEquilibrium& eq,
                          const Solution& solution, int retailer, const GridSpec& grid) {
  const auto& r = scenario.r();
  const bool manufacturer = retailer < 0;
  const double rho = scenario.env().rho;
  const Model model = solution.model;

  DpResult out;
  out.G = uniform_grid(0.0, 2 * solution.strategies.Gs, grid.nG);

  // Analytic law of the optimizing agent and its value function.
  const AffineLaw own_law =
      manufacturer ? solution.strategies.Em : solution.strategies.Er[retailer];
  out.analytic_policy.resize(grid.nG);
  out.analytic_value.resize(grid.nG);
  for (int k = 0; k < grid.nG; ++k) {
    out.analytic_policy[k] = own_law(out.G[k]);
    out.analytic_value[k] = manufacturer ? value_m(solution.coeffs, out.G[k])
                                         : value_r(solution.coeffs, retailer, out.G[k]);
  }

  const auto [mn_it, mx_it] =
      std::minmax_element(out.analytic_policy.begin(), out.analytic_policy.end());
  const double span = std::max({std::abs(*mn_it), std::abs(*mx_it), 1e-6});
  const double u_lo = *mn_it - grid.control_margin * span;
  const double u_hi = *mx_it + grid.control_margin * span;
  for (double u : out.analytic_policy)
    if (u < u_lo || u > u_hi)
      throw std::runtime_error("dp_best_response: control grid does not bracket the analytic law");
  const std::vector<double> U = uniform_grid(u_lo, u_hi, grid.nU);
  out.control_cell = (u_hi - u_lo) / (grid.nU - 1);

  // Everybody else pinned to their analytic feedback laws; own flow and drift
  // reduced to quadratic/affine coefficients in the own control per state.
  std::vector<StageCoeffs> stage(grid.nG);
  std::vector<double> Er_buf(r.n), x_buf(r.n);
  for (int k = 0; k < grid.nG; ++k) {
    const double G = out.G[k];
    for (int i = 0; i < r.n; ++i) {
      Er_buf[i] = solution.strategies.Er[i](G);
      x_buf[i] = solution.subsidy.active ? subsidy_at(solution.subsidy, i, G) : 0.0;
    }
    const double Em_law = solution.strategies.Em(G);
    auto flow_at = [&](double u) {
      if (manufacturer)
        return manufacturer_flow(scenario, eq, G, u, Er_buf,
                                 solution.subsidy.active ? &x_buf : nullptr);
      std::vector<double> Er = Er_buf;
      Er[retailer] = u;
      return retailer_flow(scenario, eq, retailer, G, eq.p_star[retailer], u, x_buf[retailer]);
    };
    auto drift_at = [&](double u) {
      if (manufacturer) return reputation_drift(scenario, G, u, Er_buf);
      std::vector<double> Er = Er_buf;
      Er[retailer] = u;
      return reputation_drift(scenario, G, Em_law, Er);
    };
    const double fp = flow_at(1), fm = flow_at(-1), f0 = flow_at(0);
    stage[k] = {f0, (fp - fm) / 2, (fp + fm) / 2 - f0, drift_at(0), drift_at(1) - drift_at(0)};
  }

  const double G_min = out.G.front(), G_max = out.G.back();
  const double inv_h = (grid.nG - 1) / (G_max - G_min);
  const double gamma = 1 / (1 + rho * grid.dt);

  std::vector<double> v_next(grid.nG, 0.0), v_now(grid.nG);
  out.policy.assign(grid.nG, 0.0);

  for (int t = grid.N - 1; t >= 0; --t) {
    run_chunked(grid.nG, [&](int lo, int hi) {
      for (int k = lo; k < hi; ++k) {
        const StageCoeffs& sc = stage[k];
        double best = -1e300, best_u = U[0];
        for (double u : U) {
          const double g_next =
              std::clamp(out.G[k] + grid.dt * (sc.d0 + sc.d1 * u), G_min, G_max);
          const double pos = (g_next - G_min) * inv_h;
          const int j = std::min(static_cast<int>(pos), grid.nG - 2);
          const double w = pos - j;
          const double v_interp = (1 - w) * v_next[j] + w * v_next[j + 1];
          const double cand =
              gamma * (grid.dt * (sc.f0 + sc.f1 * u + sc.f2 * u * u) + v_interp);
          if (cand > best) {
            best = cand;
            best_u = u;
          }
        }
        v_now[k] = best;
        if (t == 0) out.policy[k] = best_u;
      }
    });
    std::swap(v_now, v_next);
  }
  out.value = v_next;

  out.interior_lo = (grid.nG - 1) / 20;           // discard 5% at each edge: boundary
  out.interior_hi = grid.nG - 1 - out.interior_lo;  // clamping distorts the local argmax
  for (int k = out.interior_lo; k <= out.interior_hi; ++k) {
    out.max_policy_dev_cells =
        std::max(out.max_policy_dev_cells,
                 std::abs(out.policy[k] - out.analytic_policy[k]) / out.control_cell);
    out.max_value_rel_dev =
        std::max(out.max_value_rel_dev, std::abs(out.value[k] - out.analytic_value[k]) /
                                            std::max(1.0, std::abs(out.analytic_value[k])));
  }
  return out;
}

std::vector<double> dense_price_solve(const RetailerParams& r) {
  if (r.n == 1) return {r.a[0] / (2 * r.b)};
  Eigen::MatrixXd M(r.n, r.n);
  Eigen::VectorXd rhs(r.n);
  for (int i = 0; i < r.n; ++i) {
    rhs(i) = r.a[i];
    for (int k = 0; k < r.n; ++k) M(i, k) = i == k ? 2 * r.b : -r.c * r.b / (r.n - 1);
  }
  Eigen::VectorXd p = M.partialPivLu().solve(rhs);
  return {p.data(), p.data() + r.n};
}

ValueConsistency value_consistency(const ValidatedScenario& scenario, const PriceEquilibrium& eq,
                                   const Solution& solution) {
  const Trajectory traj = simulate(scenario, eq, solution.strategies,
                                   solution.subsidy.active ? &solution.subsidy : nullptr);
  const double G0 = scenario.env().G0;
  ValueConsistency vc;
  QuadratureInfo info;
  vc.Vm_quadrature = discounted_profit(traj, scenario, -1, &info);
  vc.tail_tol_met = info.tail_tol_met;
  vc.Vm = value_m(solution.coeffs, G0);
  vc.worst_rel_gap = std::abs(vc.Vm_quadrature - vc.Vm) / std::max(1.0, std::abs(vc.Vm));
  const int n = scenario.r().n;
  vc.Vr_quadrature.resize(n);
  vc.Vr.resize(n);
  for (int i = 0; i < n; ++i) {
    vc.Vr_quadrature[i] = discounted_profit(traj, scenario, i);
    vc.Vr[i] = value_r(solution.coeffs, i, G0);
    vc.worst_rel_gap =
        std::max(vc.worst_rel_gap,
                 std::abs(vc.Vr_quadrature[i] - vc.Vr[i]) / std::max(1.0, std::abs(vc.Vr[i])));
  }
  return vc;
}

}  // namespace captrade
