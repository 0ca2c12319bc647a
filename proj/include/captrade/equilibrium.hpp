#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "captrade/pricing.hpp"
#include "captrade/scenario.hpp"

namespace captrade {

enum class Model { decentralized, stackelberg };

const char* model_name(Model m);

// Value-function ansatz coefficients:
//   V_m(G)    = A G^2 + B G + C
//   V_{r_i}(G) = D_i G + H_i
struct ValueCoefficients {
  double A = 0;
  double B = 0;
  double C = 0;
  std::vector<double> D;
  std::vector<double> H;
  double discriminant = 0;
};

struct AffineLaw {
  double slope = 0;
  double intercept = 0;
  double operator()(double G) const { return slope * G + intercept; }
};

// Cost-sharing rate law x_i(G) = (2 Vm'(G) - D_i)/(2 Vm'(G) + D_i) with
// Vm'(G) = 2AG + B. Inactive (identically zero) in the decentralized model.
struct SubsidyLaw {
  bool active = false;
  double A = 0;
  double B = 0;
  std::vector<double> D;
};

double subsidy_at(const SubsidyLaw& law, int i, double G);

struct FeedbackStrategies {
  AffineLaw Em;                 // manufacturer effort law
  std::vector<AffineLaw> Er;    // retailer effort laws
  double Gs = 0;                // steady-state reputation of the closed loop
  double delta_eff = 0;         // effective decay rate of the closed loop
};

struct Solution {
  Model model = Model::decentralized;
  ValueCoefficients coeffs;
  FeedbackStrategies strategies;
  SubsidyLaw subsidy;  // inactive for the decentralized model
};

double value_m(const ValueCoefficients& coeffs, double G);
double value_r(const ValueCoefficients& coeffs, int i, double G);

// Hard solver failures. `payload` carries the offending quantities (e.g. the
// discriminant) for machine-readable diagnostics.
struct SolveError : std::runtime_error {
  enum class Code {
    no_quadratic_value,   // discriminant <= 0: no admissible quadratic value function
    interior_violation,   // negative effort at Gs, or x_i(Gs) outside [0,1)
    transversality,       // delta_eff <= 0: value ansatz not the value function
    singular_subsidy,     // 2 Vm'(G) + D_i = 0
  };
  Code code;
  std::map<std::string, double> payload;

  SolveError(Code code_, const std::string& msg, std::map<std::string, double> payload_ = {})
      : std::runtime_error(msg), code(code_), payload(std::move(payload_)) {}
};

// Rebuilds the feedback laws implied by a coefficient set via the agents'
// first-order conditions. Used by both solvers and by the transcription
// diffing path, so that any coefficient set can be handed to the oracles
// together with its own implied controls.
FeedbackStrategies strategies_from_coefficients(const ValidatedScenario& scenario,
                                                const PriceEquilibrium& eq, Model model,
                                                const ValueCoefficients& coeffs);

// s = p_c * theta * omega * sum_q: the marginal carbon-account value of
// reputation through demand, appearing throughout both solutions.
double carbon_demand_slope(const ValidatedScenario& scenario, const PriceEquilibrium& eq);

}  // namespace captrade
