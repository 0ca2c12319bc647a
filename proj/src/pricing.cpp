#include "captrade/pricing.hpp"

#include <numeric>

namespace captrade {

double base_demand(const RetailerParams& r, const std::vector<double>& prices, int i) {
  double cross = 0;
  if (r.n > 1) {
    double sum_others = 0;
    for (int k = 0; k < r.n; ++k)
      if (k != i) sum_others += prices[k];
    cross = r.c * r.b * sum_others / (r.n - 1);
  }
  return r.a[i] - r.b * prices[i] + cross;
}

PriceEquilibrium equilibrium_prices(const ValidatedScenario& scenario) {
  const auto& r = scenario.r();
  PriceEquilibrium eq;
  eq.p_star.resize(r.n);
  if (r.n == 1) {
    // Single retailer: the cross-price sum is empty, so the closed form below
    // (which divides by n-1 inside the aggregation) does not apply.
    eq.p_star[0] = r.a[0] / (2 * r.b);
  } else {
    const double sum_a = std::accumulate(r.a.begin(), r.a.end(), 0.0);
    const double den = r.b * (2 - r.c) * (2 * r.n - 2 + r.c);
    for (int i = 0; i < r.n; ++i)
      eq.p_star[i] = ((r.n - 1) * (2 - r.c) * r.a[i] + r.c * sum_a) / den;
  }
  eq.q.resize(r.n);
  for (int i = 0; i < r.n; ++i) eq.q[i] = base_demand(r, eq.p_star, i);
  eq.sum_q = std::accumulate(eq.q.begin(), eq.q.end(), 0.0);
  return eq;
}

std::vector<double> demand(const PriceEquilibrium& eq, double theta, double G) {
  std::vector<double> Q(eq.q.size());
  for (size_t i = 0; i < eq.q.size(); ++i) Q[i] = eq.q[i] * theta * G;
  return Q;
}

std::vector<int> nonpositive_base_demand(const PriceEquilibrium& eq) {
  std::vector<int> idx;
  for (size_t i = 0; i < eq.q.size(); ++i)
    if (!(eq.q[i] > 0)) idx.push_back(static_cast<int>(i));
  return idx;
}

}  // namespace captrade
