#include "captrade/equilibrium.hpp"

namespace captrade {

const char* model_name(Model m) {
  return m == Model::decentralized ? "decentralized" : "stackelberg";
}

double value_m(const ValueCoefficients& c, double G) { return (c.A * G + c.B) * G + c.C; }

double value_r(const ValueCoefficients& c, int i, double G) { return c.D[i] * G + c.H[i]; }

double subsidy_at(const SubsidyLaw& law, int i, double G) {
  if (!law.active) return 0;
  const double two_W = 2 * (2 * law.A * G + law.B);
  const double den = two_W + law.D[i];
  if (den == 0)
    throw SolveError(SolveError::Code::singular_subsidy,
                     "subsidy rate singular: 2*Vm'(G) + D_i = 0 at G=" + std::to_string(G),
                     {{"G", G}, {"D_i", law.D[i]}});
  return (two_W - law.D[i]) / den;
}

double carbon_demand_slope(const ValidatedScenario& scenario, const PriceEquilibrium& eq) {
  return scenario.env().p_c * scenario.env().theta * scenario.m().omega * eq.sum_q;
}

FeedbackStrategies strategies_from_coefficients(const ValidatedScenario& scenario,
                                                const PriceEquilibrium& eq, Model model,
                                                const ValueCoefficients& coeffs) {
  const auto& m = scenario.m();
  const auto& r = scenario.r();
  const double s = carbon_demand_slope(scenario, eq);

  FeedbackStrategies st;
  // Manufacturer first-order condition: lambda_m*Em = p_c*omega*sum(Q) + mu_m*Vm'(G).
  st.Em.slope = (s + 2 * coeffs.A * m.mu_m) / m.lambda_m;
  st.Em.intercept = coeffs.B * m.mu_m / m.lambda_m;

  st.Er.resize(r.n);
  for (int i = 0; i < r.n; ++i) {
    if (model == Model::decentralized) {
      // lambda_r*Er_i = mu_r*Vr_i' with Vr_i' = D_i: constant in G.
      st.Er[i] = {0.0, r.mu_r * coeffs.D[i] / r.lambda_r};
    } else {
      // Follower response at the leader's cost-sharing rate collapses to
      // Er_i = mu_r*(2*Vm'(G) + D_i)/(2*lambda_r), affine in G.
      st.Er[i] = {2 * r.mu_r * coeffs.A / r.lambda_r,
                  r.mu_r * (2 * coeffs.B + coeffs.D[i]) / (2 * r.lambda_r)};
    }
  }

  double drift_slope = -scenario.env().delta + m.mu_m * st.Em.slope;
  double drift_intercept = m.mu_m * st.Em.intercept;
  for (int i = 0; i < r.n; ++i) {
    drift_slope += r.mu_r * st.Er[i].slope;
    drift_intercept += r.mu_r * st.Er[i].intercept;
  }
  st.delta_eff = -drift_slope;
  st.Gs = drift_intercept / st.delta_eff;
  return st;
}

}  // namespace captrade
