#pragma once

#include <vector>

#include "captrade/scenario.hpp"

namespace captrade {

// Retail-price equilibrium. Prices are time-invariant and identical across
// both game models, so they are computed once per scenario.
struct PriceEquilibrium {
  std::vector<double> p_star;  // equilibrium retail prices
  std::vector<double> q;       // base demand intensities q_i at p_star
  double sum_q = 0;            // sum of q_i
};

// Base demand intensity of retailer i at an arbitrary price vector:
//   q_i = a_i - b*p_i + c*b*sum_{k!=i} p_k/(n-1).
// With a single retailer the cross term is an empty sum.
double base_demand(const RetailerParams& r, const std::vector<double>& prices, int i);

PriceEquilibrium equilibrium_prices(const ValidatedScenario& scenario);

// Realized demand Q_i = q_i * theta * G.
std::vector<double> demand(const PriceEquilibrium& eq, double theta, double G);

// Indices with q_i <= 0 (interior-solution diagnostic, never an abort).
std::vector<int> nonpositive_base_demand(const PriceEquilibrium& eq);

}  // namespace captrade
