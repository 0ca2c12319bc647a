#include "captrade/transcription.hpp"

#include <cmath>

namespace captrade {

// Every formula below is kept in its originally printed shape on purpose,
// including the slips (see the module header). Do not "fix" these: the whole
// point is that reports and the residual oracle expose where they disagree
// with the canonical matched coefficients.
TranscribedSolution transcribe(const ValidatedScenario& scenario, const PriceEquilibrium& eq,
                               Model model) {
  const auto& m = scenario.m();
  const auto& r = scenario.r();
  const auto& env = scenario.env();
  const double s = carbon_demand_slope(scenario, eq);
  const double mu_m2 = m.mu_m * m.mu_m;
  const double mu_r2 = r.mu_r * r.mu_r;
  const double theta = env.theta;

  TranscribedSolution t;
  ValueCoefficients& co = t.coeffs;
  co.D.resize(r.n);
  co.H.resize(r.n);

  if (model == Model::decentralized) {
    const double disc = std::pow(4 * s * m.mu_m - 4 * m.lambda_m * env.delta - 2 * m.lambda_m * env.rho, 2) -
                        16 * mu_m2 * s * s;
    const double rad = std::sqrt(disc);
    co.discriminant = disc;
    co.A = (4 * m.lambda_m * env.delta + 2 * m.lambda_m * env.rho - 4 * s * m.mu_m - rad) / (8 * mu_m2);
    double sum_D = 0;
    for (int i = 0; i < r.n; ++i) {
      co.D[i] = m.lambda_m * eq.p_star[i] * eq.q[i] * theta /
                (m.lambda_m * (env.rho + env.delta) - s * m.mu_m - 2 * co.A * mu_m2);
      sum_D += co.D[i];
    }
    // Printed denominator lacks a lambda_r on the radical; the matched form
    // is lambda_r*(2*lambda_m*rho + rad).
    co.B = (4 * m.lambda_m * r.lambda_r * theta * (m.p - env.p_c) * eq.sum_q +
            8 * co.A * m.lambda_m * mu_r2 * sum_D) /
           (2 * m.lambda_m * r.lambda_r * env.rho + rad);
    co.C = env.p_c * m.F0 / env.rho + co.B * co.B * mu_m2 / (2 * m.lambda_m * env.rho) +
           co.B * mu_r2 * sum_D / (r.lambda_r * env.rho);
    for (int i = 0; i < r.n; ++i)
      co.H[i] = -mu_r2 * co.D[i] * co.D[i] / (2 * r.lambda_r * env.rho) +
                co.B * co.D[i] * mu_m2 / (m.lambda_m * env.rho) +
                mu_r2 * co.D[i] * sum_D / (2 * r.lambda_r * env.rho);  // halved cross term
    // Steady state as printed (rho enters with weight 1, not 2).
    t.Gs = (4 * co.B * r.lambda_r * mu_m2 + 4 * m.lambda_m * mu_r2 * sum_D) /
           (r.lambda_r * rad - m.lambda_m * r.lambda_r * env.rho);
    return t;
  }

  const double disc =
      std::pow(4 * env.delta * m.lambda_m * r.lambda_r + 2 * m.lambda_m * r.lambda_r * env.rho -
                   4 * r.lambda_r * m.mu_m * s,
               2) -
      16 * r.lambda_r * (r.lambda_r * mu_m2 + r.n * m.lambda_m * mu_r2) * s * s;
  const double rad = std::sqrt(disc);
  co.discriminant = disc;
  co.A = (4 * env.delta * m.lambda_m * r.lambda_r + 2 * m.lambda_m * r.lambda_r * env.rho -
          4 * r.lambda_r * m.mu_m * s - rad) /
         (8 * (r.lambda_r * mu_m2 + r.n * m.lambda_m * mu_r2));
  double sum_D = 0, sum_D2 = 0;
  for (int i = 0; i < r.n; ++i) {
    // Printed with a bare A*lambda_m*mu_r^2 term; matching yields 4*A*lambda_m*mu_r^2.
    co.D[i] = 4 * m.lambda_m * r.lambda_r * theta * eq.p_star[i] * eq.q[i] /
              (2 * m.lambda_m * r.lambda_r * env.rho + co.A * m.lambda_m * mu_r2 + rad);
    sum_D += co.D[i];
    sum_D2 += co.D[i] * co.D[i];
  }
  co.B = (4 * m.lambda_m * r.lambda_r * theta * (m.p - env.p_c) * eq.sum_q +
          4 * co.A * m.lambda_m * mu_r2 * sum_D) /
         (2 * m.lambda_m * r.lambda_r * env.rho + rad);
  // Printed constant term mixes powers of D (a squared sum where the matched
  // form has a plain one, and vice versa); kept verbatim.
  co.C = env.p_c * m.F0 / env.rho + co.B * co.B * mu_m2 / (2 * m.lambda_m * env.rho) +
         (4 * r.n * co.B * co.B * mu_r2 - 4 * co.B * mu_r2 * sum_D2 + mu_r2 * sum_D) /
             (8 * r.lambda_r * env.rho);
  for (int i = 0; i < r.n; ++i)
    co.H[i] = co.D[i] * mu_r2 * (4 * r.n * co.B + 2 * sum_D - 2 * co.B - co.D[i]) /
                  (4 * env.rho * r.lambda_r) +
              co.B * co.D[i] * mu_m2 / (env.rho * m.lambda_m);
  t.Gs = (4 * co.B * r.lambda_r * mu_m2 + 4 * r.n * co.B * m.lambda_m * mu_r2 +
          2 * m.lambda_m * mu_r2 * sum_D) /
         (rad - m.lambda_m * r.lambda_r * env.rho);
  // Steady-state rate as printed: uses A*Gs + B where the feedback law
  // derivation gives Vm'(Gs) = 2*A*Gs + B.
  t.x_at_Gs.resize(r.n);
  for (int i = 0; i < r.n; ++i) {
    const double w = 2 * (co.A * t.Gs + co.B);
    t.x_at_Gs[i] = (w - co.D[i]) / (w + co.D[i]);
  }
  return t;
}

}  // namespace captrade
