#pragma once

#include "captrade/equilibrium.hpp"

namespace captrade {

// Alternate closed-form transcriptions of the coefficient and steady-state
// formulas that circulate with this model. The canonical solvers rederive
// everything by matching powers of G; the variants here keep the original
// printed shapes, several of which carry algebraic slips (mismatched radical
// factors, a halved cross term, swapped powers). They exist purely for
// side-by-side diffing: reports show both value sets and their gaps, and the
// verification oracles are expected to reject the transcribed set.
struct TranscribedSolution {
  ValueCoefficients coeffs;
  double Gs = 0;
  std::vector<double> x_at_Gs;  // stackelberg only; from the steady-state rate display
};

TranscribedSolution transcribe(const ValidatedScenario& scenario, const PriceEquilibrium& eq,
                               Model model);

}  // namespace captrade
