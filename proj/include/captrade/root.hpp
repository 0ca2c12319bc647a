#pragma once

#include <cmath>

namespace captrade {

// Smaller root of qa*x^2 + qb*x + qc = 0 given its positive discriminant,
// computed without cancellation. Whenever disc > 0 here, qb < 0, so the big
// root (-qb + sqrt(disc))/(2*qa) is well conditioned and the small root
// follows from the product identity x_small = qc/(qa*x_big). qc = 0 yields
// exactly 0 (the naive formula loses that exactness to rounding).
inline double quadratic_minus_root(double qa, double qb, double qc, double disc) {
  if (qa == 0) return -qc / qb;  // degenerate linear case (both influence channels off)
  const double big = (-qb + std::sqrt(disc)) / (2 * qa);
  return qc / (qa * big);
}

}  // namespace captrade
