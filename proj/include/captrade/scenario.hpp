#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace captrade {

// Exogenous parameters of the channel game. One struct per party plus the
// shared environment; every model symbol that is not endogenous lives in
// exactly one of these.

struct ManufacturerParams {
  double lambda_m = 0;  // quadratic abatement-effort cost coefficient
  double mu_m = 0;      // reputation gain per unit abatement effort
  double omega = 0;     // per-unit emission cut per unit effort (1 - omega*Em >= 0 expected)
  double p = 0;         // wholesale price per vehicle
  double F0 = 0;        // initial carbon quota
};

struct RetailerParams {
  int n = 0;              // retailer count
  std::vector<double> a;  // potential sales per retailer, size n
  double b = 0;           // own-price sensitivity
  double c = 0;           // cross-price coefficient in [0,1]
  double lambda_r = 0;    // quadratic promotion cost coefficient (shared)
  double mu_r = 0;        // reputation gain per unit promotion effort (shared)
};

struct EnvironmentParams {
  double theta = 0;  // consumer low-carbon preference
  double p_c = 0;    // carbon credit price; 0 encodes "no carbon trading"
  double rho = 0;    // discount rate
  double delta = 0;  // reputation decay rate
  double G0 = 0;     // initial reputation
};

struct SimParams {
  double T = 0;         // simulation horizon
  double dt = 0;        // fixed integrator step
  double tail_tol = 0;  // required e^(-rho*T) bound for the quadrature tail
};

struct ScenarioConfig {
  ManufacturerParams manufacturer;
  RetailerParams retailers;
  EnvironmentParams environment;
  SimParams sim;
};

struct ValidationIssue {
  std::string field;
  double value = 0;
  std::string message;
  bool fatal = true;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const {
    for (const auto& i : issues)
      if (i.fatal) return false;
    return true;
  }
  std::vector<std::string> warnings() const;
  std::string to_string() const;
};

struct ValidationOutcome;
ValidationOutcome validate(const ScenarioConfig&);

// A ScenarioConfig that passed validate(). Immutable; safe to share across
// threads. Construction is restricted to validate().
class ValidatedScenario {
 public:
  const ScenarioConfig& config() const { return cfg_; }
  const ManufacturerParams& m() const { return cfg_.manufacturer; }
  const RetailerParams& r() const { return cfg_.retailers; }
  const EnvironmentParams& env() const { return cfg_.environment; }
  const SimParams& sim() const { return cfg_.sim; }

 private:
  explicit ValidatedScenario(ScenarioConfig cfg) : cfg_(std::move(cfg)) {}
  ScenarioConfig cfg_;

  friend ValidationOutcome validate(const ScenarioConfig&);
};

struct ValidationOutcome {
  std::optional<ValidatedScenario> scenario;  // set iff report.ok()
  ValidationReport report;                    // always carries warnings
};

// Scenario file parsing. Flat "key = value" lines, '#' comments, the `a` key
// takes n whitespace- or comma-separated values. Unknown, duplicate, and
// missing keys are errors.
struct ScenarioParseError : std::runtime_error {
  std::string field;
  ScenarioParseError(std::string field_, const std::string& msg)
      : std::runtime_error(msg), field(std::move(field_)) {}
};

ScenarioConfig parse_scenario_text(const std::string& text);
ScenarioConfig load_scenario_file(const std::string& path);
std::string scenario_to_text(const ScenarioConfig& config);

// The default benchmark configuration used by tests and shipped as
// data/baseline.scenario: six symmetric retailers with carbon trading on.
ScenarioConfig reference_scenario();

}  // namespace captrade
