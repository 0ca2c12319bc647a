#include "captrade/stackelberg.hpp"

#include <cmath>

#include "captrade/root.hpp"

namespace captrade {

Solution solve_stackelberg(const ValidatedScenario& scenario, const PriceEquilibrium& eq) {
  const auto& m = scenario.m();
  const auto& r = scenario.r();
  const auto& env = scenario.env();
  const double s = carbon_demand_slope(scenario, eq);
  const double mu_m2 = m.mu_m * m.mu_m;
  const double mu_r2 = r.mu_r * r.mu_r;

  // G^2 terms of the leader's HJB equation, with the followers' reaction
  // already substituted:
  //   4*(lambda_r*mu_m^2 + n*lambda_m*mu_r^2)*A^2
  //     + (4*lambda_r*s*mu_m - 2*lambda_m*lambda_r*(2*delta+rho))*A
  //     + lambda_r*s^2 = 0.
  const double qa = 4 * (r.lambda_r * mu_m2 + r.n * m.lambda_m * mu_r2);
  const double qb = 4 * r.lambda_r * s * m.mu_m - 2 * m.lambda_m * r.lambda_r * (2 * env.delta + env.rho);
  const double qc = r.lambda_r * s * s;
  const double disc = qb * qb - 4 * qa * qc;
  if (!(disc > 0))
    throw SolveError(SolveError::Code::no_quadratic_value,
                     "no admissible quadratic value function: discriminant <= 0",
                     {{"discriminant", disc}});

  ValueCoefficients co;
  co.discriminant = disc;
  co.A = quadratic_minus_root(qa, qb, qc, disc);

  const double theta = env.theta;
  const double den_D = env.rho + env.delta - (s * m.mu_m + 2 * co.A * mu_m2) / m.lambda_m -
                       (2 * r.n - 1) * mu_r2 * co.A / r.lambda_r;
  co.D.resize(r.n);
  double sum_D = 0, sum_D2 = 0;
  for (int i = 0; i < r.n; ++i) {
    co.D[i] = eq.p_star[i] * eq.q[i] * theta / den_D;
    sum_D += co.D[i];
    sum_D2 += co.D[i] * co.D[i];
  }

  const double den_B = env.rho + env.delta - (s * m.mu_m + 2 * co.A * mu_m2) / m.lambda_m -
                       2 * r.n * mu_r2 * co.A / r.lambda_r;
  co.B = ((m.p - env.p_c) * theta * eq.sum_q + mu_r2 * co.A * sum_D / r.lambda_r) / den_B;
  co.C = env.p_c * m.F0 / env.rho + co.B * co.B * mu_m2 / (2 * m.lambda_m * env.rho) +
         (4 * r.n * co.B * co.B * mu_r2 + 4 * co.B * mu_r2 * sum_D + mu_r2 * sum_D2) /
             (8 * r.lambda_r * env.rho);
  co.H.resize(r.n);
  for (int i = 0; i < r.n; ++i)
    co.H[i] = co.D[i] *
              (mu_r2 * (4 * r.n * co.B + 2 * sum_D - 2 * co.B - co.D[i]) / (4 * r.lambda_r) +
               co.B * mu_m2 / m.lambda_m) /
              env.rho;

  Solution sol;
  sol.model = Model::stackelberg;
  sol.coeffs = co;
  sol.strategies = strategies_from_coefficients(scenario, eq, Model::stackelberg, co);
  sol.subsidy = {true, co.A, co.B, co.D};

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
    const double x_s = subsidy_at(sol.subsidy, i, Gs);
    if (!(x_s >= 0 && x_s < 1))
      throw SolveError(SolveError::Code::interior_violation,
                       "interior solution violated: cost-sharing rate outside [0,1) at steady state",
                       {{"Gs", Gs}, {"x_at_Gs", x_s}, {"retailer", static_cast<double>(i)}});
  }
  return sol;
}

}  // namespace captrade
