#include "captrade/flows.hpp"

namespace captrade {

double manufacturer_flow(const ValidatedScenario& scenario, const PriceEquilibrium& eq, double G,
                         double Em, const std::vector<double>& Er,
                         const std::vector<double>* x) {
  const auto& m = scenario.m();
  const auto& env = scenario.env();
  const double sum_Q = eq.sum_q * env.theta * G;
  double flow = m.p * sum_Q + env.p_c * (m.F0 - (1 - m.omega * Em) * sum_Q) -
                0.5 * m.lambda_m * Em * Em;
  if (x)
    for (size_t i = 0; i < Er.size(); ++i)
      flow -= 0.5 * (*x)[i] * scenario.r().lambda_r * Er[i] * Er[i];
  return flow;
}

double retailer_flow(const ValidatedScenario& scenario, const PriceEquilibrium& eq, int i,
                     double G, double p_i, double Er_i, double x_i) {
  double q_i;
  if (p_i == eq.p_star[i]) {
    q_i = eq.q[i];
  } else {
    std::vector<double> prices = eq.p_star;
    prices[i] = p_i;
    q_i = base_demand(scenario.r(), prices, i);
  }
  const double Q_i = q_i * scenario.env().theta * G;
  return p_i * Q_i - 0.5 * (1 - x_i) * scenario.r().lambda_r * Er_i * Er_i;
}

double reputation_drift(const ValidatedScenario& scenario, double G, double Em,
                        const std::vector<double>& Er) {
  double drift = scenario.m().mu_m * Em - scenario.env().delta * G;
  for (double e : Er) drift += scenario.r().mu_r * e;
  return drift;
}

}  // namespace captrade
