#pragma once

#include "captrade/equilibrium.hpp"

namespace captrade {

// Feedback Nash equilibrium where the manufacturer and the n retailers move
// simultaneously. Coefficients come from matching powers of G in the
// substituted HJB equations; the quadratic coefficient A takes the root with
// the minus sign before the radical (the plus root makes both parties'
// efforts negative).
Solution solve_decentralized(const ValidatedScenario& scenario, const PriceEquilibrium& eq);

}  // namespace captrade
