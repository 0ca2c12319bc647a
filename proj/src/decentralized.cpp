#include "captrade/decentralized.hpp"

#include <cmath>

#include "captrade/root.hpp"

namespace captrade {

Solution solve_decentralized(const ValidatedScenario& scenario, const PriceEquilibrium& eq) {
  const auto& m = scenario.m();
  const auto& r = scenario.r();
  const auto& env = scenario.env();
  const double s = carbon_demand_slope(scenario, eq);

  // Quadratic for A from the G^2 terms of the manufacturer's HJB equation:
  //   4*mu_m^2*A^2 + (4*s*mu_m - 2*lambda_m*(2*delta+rho))*A + s^2 = 0.
  const double qa = 4 * m.mu_m * m.mu_m;
  const double qb = 4 * s * m.mu_m - 2 * m.lambda_m * (2 * env.delta + env.rho);
  const double qc = s * s;
  const double disc = qb * qb - 4 * qa * qc;
  if (!(disc > 0))
    throw SolveError(SolveError::Code::no_quadratic_value,
                     "no admissible quadratic value function: discriminant <= 0",
                     {{"discriminant", disc}});

  ValueCoefficients co;
  co.discriminant = disc;
  co.A = quadratic_minus_root(qa, qb, qc, disc);

  const double theta = env.theta;
  const double den_D = m.lambda_m * (env.rho + env.delta) - s * m.mu_m - 2 * co.A * m.mu_m * m.mu_m;
  co.D.resize(r.n);
  double sum_D = 0;
  for (int i = 0; i < r.n; ++i) {
    co.D[i] = m.lambda_m * eq.p_star[i] * eq.q[i] * theta / den_D;
    sum_D += co.D[i];
  }

  const double mu_r2 = r.mu_r * r.mu_r;
  const double den_B = env.rho + env.delta - (s * m.mu_m + 2 * co.A * m.mu_m * m.mu_m) / m.lambda_m;
  co.B = ((m.p - env.p_c) * theta * eq.sum_q + 2 * co.A * mu_r2 * sum_D / r.lambda_r) / den_B;
  co.C = env.p_c * m.F0 / env.rho + co.B * co.B * m.mu_m * m.mu_m / (2 * m.lambda_m * env.rho) +
         co.B * mu_r2 * sum_D / (r.lambda_r * env.rho);
  co.H.resize(r.n);
  for (int i = 0; i < r.n; ++i)
    co.H[i] = (-mu_r2 * co.D[i] * co.D[i] / (2 * r.lambda_r) +
               co.B * co.D[i] * m.mu_m * m.mu_m / m.lambda_m + co.D[i] * mu_r2 * sum_D / r.lambda_r) /
              env.rho;

  Solution sol;
  sol.model = Model::decentralized;
  sol.coeffs = co;
  sol.strategies = strategies_from_coefficients(scenario, eq, Model::decentralized, co);
  sol.subsidy.active = false;

  if (!(sol.strategies.delta_eff > 0))
    throw SolveError(SolveError::Code::transversality,
                     "closed loop does not contract: delta_eff <= 0",
                     {{"delta_eff", sol.strategies.delta_eff}});
  const double Gs = sol.strategies.Gs;
  const double Em_s = sol.strategies.Em(Gs);
  if (Gs < 0 || Em_s < 0)
    throw SolveError(SolveError::Code::interior_violation,
                     "interior solution violated: nonnegative steady state required",
                     {{"Gs", Gs}, {"Em_at_Gs", Em_s}});
  for (int i = 0; i < r.n; ++i) {
    const double Er_s = sol.strategies.Er[i](Gs);
    if (Er_s < 0)
      throw SolveError(SolveError::Code::interior_violation,
                       "interior solution violated: retailer effort negative at steady state",
                       {{"Gs", Gs}, {"Er_at_Gs", Er_s}, {"retailer", static_cast<double>(i)}});
  }
  return sol;
}

}  // namespace captrade
