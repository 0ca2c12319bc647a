#pragma once

#include "captrade/equilibrium.hpp"

namespace captrade {

// Leader-follower equilibrium: the manufacturer announces effort and a
// cost-sharing rate x_i for each retailer's promotion cost, retailers
// best-respond. Solved by backward induction on the response functions,
// then coefficient matching. x_i is a state-feedback law x_i(G); its
// steady-state value is what gets reported.
Solution solve_stackelberg(const ValidatedScenario& scenario, const PriceEquilibrium& eq);

}  // namespace captrade
