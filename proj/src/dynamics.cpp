#include "captrade/dynamics.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "captrade/flows.hpp"

namespace captrade {

namespace {

void append_f(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

Trajectory simulate(const ValidatedScenario& scenario, const PriceEquilibrium& eq,
                    const FeedbackStrategies& strategies, const SubsidyLaw* subsidy) {
  const auto& m = scenario.m();
  const auto& r = scenario.r();
  const auto& env = scenario.env();
  const int n = r.n;

  // The closed loop is scalar-affine; derive its rate and fixed point from
  // the laws themselves so hand-built strategies are handled consistently.
  double drift_slope = -env.delta + m.mu_m * strategies.Em.slope;
  double drift_intercept = m.mu_m * strategies.Em.intercept;
  for (int i = 0; i < n; ++i) {
    drift_slope += r.mu_r * strategies.Er[i].slope;
    drift_intercept += r.mu_r * strategies.Er[i].intercept;
  }
  const double delta_eff = -drift_slope;
  if (!(delta_eff > 0))
    throw SolveError(SolveError::Code::transversality,
                     "unstable closed loop: delta_eff <= 0", {{"delta_eff", delta_eff}});
  const double Gs = drift_intercept / delta_eff;

  const double dt = scenario.sim().dt;
  if (!(dt * std::abs(delta_eff) < 0.5))
    throw std::invalid_argument("dt too large for the closed-loop rate: dt*|delta_eff| >= 0.5");
  const long steps = std::lround(scenario.sim().T / dt);

  Trajectory traj;
  traj.Gs = Gs;
  traj.delta_eff = delta_eff;
  const size_t len = static_cast<size_t>(steps) + 1;
  traj.t.reserve(len);
  traj.G.reserve(len);
  traj.Em.reserve(len);
  traj.F.reserve(len);
  traj.pi_m.reserve(len);
  traj.Er.assign(n, {});
  traj.Q.assign(n, {});
  traj.pi_r.assign(n, {});
  if (subsidy && subsidy->active) traj.x.assign(n, {});

  std::vector<double> Er_now(n), x_now(n);
  auto rhs = [&](double G) {
    for (int i = 0; i < n; ++i) Er_now[i] = strategies.Er[i](G);
    return reputation_drift(scenario, G, strategies.Em(G), Er_now);
  };

  double G = env.G0;
  traj.max_integration_gap = 0;
  traj.max_nominal_decay_gap = 0;
  for (long k = 0; k <= steps; ++k) {
    const double t = k * dt;
    const double exact = Gs + (env.G0 - Gs) * std::exp(-delta_eff * t);
    const double nominal = Gs + (env.G0 - Gs) * std::exp(-env.delta * t);
    traj.max_integration_gap = std::max(traj.max_integration_gap, std::abs(G - exact));
    traj.max_nominal_decay_gap = std::max(traj.max_nominal_decay_gap, std::abs(exact - nominal));

    const double Em = strategies.Em(G);
    double sum_Q = 0;
    for (int i = 0; i < n; ++i) {
      Er_now[i] = strategies.Er[i](G);
      x_now[i] = subsidy && subsidy->active ? subsidy_at(*subsidy, i, G) : 0.0;
      sum_Q += eq.q[i] * env.theta * G;
    }
    traj.t.push_back(t);
    traj.G.push_back(G);
    traj.Em.push_back(Em);
    traj.F.push_back(m.F0 - (1 - m.omega * Em) * sum_Q);
    traj.pi_m.push_back(manufacturer_flow(scenario, eq, G, Em, Er_now,
                                          subsidy && subsidy->active ? &x_now : nullptr));
    for (int i = 0; i < n; ++i) {
      traj.Er[i].push_back(Er_now[i]);
      traj.Q[i].push_back(eq.q[i] * env.theta * G);
      if (subsidy && subsidy->active) traj.x[i].push_back(x_now[i]);
      traj.pi_r[i].push_back(retailer_flow(scenario, eq, i, G, eq.p_star[i], Er_now[i], x_now[i]));
    }

    const double k1 = rhs(G);
    const double k2 = rhs(G + 0.5 * dt * k1);
    const double k3 = rhs(G + 0.5 * dt * k2);
    const double k4 = rhs(G + dt * k3);
    G += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }

  // Steady flows for the analytic quadrature tail.
  const double Em_s = strategies.Em(Gs);
  for (int i = 0; i < n; ++i) {
    Er_now[i] = strategies.Er[i](Gs);
    x_now[i] = subsidy && subsidy->active ? subsidy_at(*subsidy, i, Gs) : 0.0;
  }
  traj.pi_m_steady = manufacturer_flow(scenario, eq, Gs, Em_s, Er_now,
                                       subsidy && subsidy->active ? &x_now : nullptr);
  traj.pi_r_steady.resize(n);
  for (int i = 0; i < n; ++i)
    traj.pi_r_steady[i] = retailer_flow(scenario, eq, i, Gs, eq.p_star[i], Er_now[i], x_now[i]);
  return traj;
}

double discounted_profit(const Trajectory& traj, const ValidatedScenario& scenario, int retailer,
                         QuadratureInfo* info) {
  const double rho = scenario.env().rho;
  const std::vector<double>& flow = retailer < 0 ? traj.pi_m : traj.pi_r[retailer];
  const double steady = retailer < 0 ? traj.pi_m_steady : traj.pi_r_steady[retailer];

  const size_t len = traj.t.size();
  const double dt = scenario.sim().dt;
  auto f = [&](size_t k) { return std::exp(-rho * traj.t[k]) * flow[k]; };

  // Composite Simpson; a trailing odd interval gets the trapezoid rule.
  double integral = 0;
  size_t segments = len - 1;
  size_t simpson_end = segments - segments % 2;
  for (size_t k = 0; k + 2 <= simpson_end; k += 2)
    integral += dt / 3 * (f(k) + 4 * f(k + 1) + f(k + 2));
  if (segments % 2) integral += dt / 2 * (f(len - 2) + f(len - 1));

  const double T_end = traj.t.back();
  const double tail_weight = std::exp(-rho * T_end);
  if (info) {
    info->tail_weight = tail_weight;
    info->tail_tol_met = tail_weight < scenario.sim().tail_tol;
    info->steady_flow = steady;
  }
  return integral + tail_weight * steady / rho;
}

std::string trajectory_csv(const Trajectory& traj) {
  const size_t n = traj.Er.size();
  std::string out;
  out.reserve(traj.t.size() * (5 + 4 * n) * 20);
  out += "t,G,Em";
  for (size_t i = 1; i <= n; ++i) out += ",Er_" + std::to_string(i);
  for (size_t i = 1; i <= n; ++i) out += ",Q_" + std::to_string(i);
  out += ",F";
  for (size_t i = 1; i <= n; ++i) out += ",x_" + std::to_string(i);
  out += ",pi_m";
  for (size_t i = 1; i <= n; ++i) out += ",pi_r_" + std::to_string(i);
  out += "\n";
  for (size_t k = 0; k < traj.t.size(); ++k) {
    append_f(out, traj.t[k]);
    out += ',';
    append_f(out, traj.G[k]);
    out += ',';
    append_f(out, traj.Em[k]);
    for (size_t i = 0; i < n; ++i) {
      out += ',';
      append_f(out, traj.Er[i][k]);
    }
    for (size_t i = 0; i < n; ++i) {
      out += ',';
      append_f(out, traj.Q[i][k]);
    }
    out += ',';
    append_f(out, traj.F[k]);
    for (size_t i = 0; i < n; ++i) {
      out += ',';
      append_f(out, traj.x.empty() ? 0.0 : traj.x[i][k]);
    }
    out += ',';
    append_f(out, traj.pi_m[k]);
    for (size_t i = 0; i < n; ++i) {
      out += ',';
      append_f(out, traj.pi_r[i][k]);
    }
    out += '\n';
  }
  return out;
}

}  // namespace captrade
