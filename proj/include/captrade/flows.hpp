#pragma once

#include <vector>

#include "captrade/equilibrium.hpp"

namespace captrade {

// Instantaneous profit flows at a given state and control profile. Shared by
// the integrator, the quadrature, and the verification oracles so that a bug
// here is caught loudly by the residual checks (the solver algebra never
// touches these).

// Manufacturer: p*sum(Q) + p_c*(F0 - (1-omega*Em)*sum(Q)) - lambda_m*Em^2/2,
// minus the subsidized share sum_i x_i*lambda_r*Er_i^2/2 when x is given.
double manufacturer_flow(const ValidatedScenario& scenario, const PriceEquilibrium& eq, double G,
                         double Em, const std::vector<double>& Er,
                         const std::vector<double>* x = nullptr);

// Retailer i at its own price p_i: p_i*q_i(p_i)*theta*G - (1-x_i)*lambda_r*Er_i^2/2.
// `p_i` may deviate from the equilibrium price (q_i is recomputed from it,
// other prices held at equilibrium); x_i = 0 reproduces the unsubsidized flow.
double retailer_flow(const ValidatedScenario& scenario, const PriceEquilibrium& eq, int i,
                     double G, double p_i, double Er_i, double x_i);

// Reputation drift mu_m*Em + sum_i mu_r*Er_i - delta*G.
double reputation_drift(const ValidatedScenario& scenario, double G, double Em,
                        const std::vector<double>& Er);

}  // namespace captrade
