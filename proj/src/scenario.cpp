#include "captrade/scenario.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace captrade {

namespace {

std::string fmt_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Checker {
  std::vector<ValidationIssue>& issues;

  void fatal(const std::string& field, double value, const std::string& msg) {
    issues.push_back({field, value, msg, true});
  }
  void warn(const std::string& field, double value, const std::string& msg) {
    issues.push_back({field, value, msg, false});
  }

  // Returns false when the value is unusable (further range checks skipped).
  bool finite(const std::string& field, double value) {
    if (!std::isfinite(value)) {
      fatal(field, value, "must be finite");
      return false;
    }
    return true;
  }

  void positive(const std::string& field, double value) {
    if (finite(field, value) && !(value > 0)) fatal(field, value, "must be > 0");
  }
  void nonnegative(const std::string& field, double value) {
    if (finite(field, value) && !(value >= 0)) fatal(field, value, "must be >= 0");
  }
  // Zero is allowed but degenerate: the equilibrium still solves, with the
  // corresponding channel switched off.
  void positive_or_degenerate_zero(const std::string& field, double value) {
    if (!finite(field, value)) return;
    if (value < 0)
      fatal(field, value, "must be >= 0");
    else if (value == 0)
      warn(field, value, "is 0: channel disabled, solution is degenerate");
  }
};

}  // namespace

std::vector<std::string> ValidationReport::warnings() const {
  std::vector<std::string> out;
  for (const auto& i : issues)
    if (!i.fatal) out.push_back(i.field + "=" + fmt_value(i.value) + ": " + i.message);
  return out;
}

std::string ValidationReport::to_string() const {
  std::ostringstream os;
  for (const auto& i : issues)
    os << (i.fatal ? "error" : "warning") << ": " << i.field << "=" << fmt_value(i.value) << ": "
       << i.message << "\n";
  return os.str();
}

ValidationOutcome validate(const ScenarioConfig& config) {
  ValidationOutcome out;
  Checker check{out.report.issues};

  const auto& m = config.manufacturer;
  check.positive("lambda_m", m.lambda_m);
  check.positive_or_degenerate_zero("mu_m", m.mu_m);
  check.positive_or_degenerate_zero("omega", m.omega);
  check.positive_or_degenerate_zero("p", m.p);
  check.nonnegative("F0", m.F0);

  const auto& r = config.retailers;
  if (r.n < 1) check.fatal("n", r.n, "must be an integer >= 1");
  if (static_cast<int>(r.a.size()) != r.n)
    check.fatal("a", static_cast<double>(r.a.size()),
                "must list exactly n potential-sales values");
  for (size_t i = 0; i < r.a.size(); ++i)
    check.positive("a[" + std::to_string(i) + "]", r.a[i]);
  check.positive("b", r.b);
  if (check.finite("c", r.c) && !(r.c >= 0 && r.c <= 1)) check.fatal("c", r.c, "must be in [0,1]");
  check.positive("lambda_r", r.lambda_r);
  check.positive_or_degenerate_zero("mu_r", r.mu_r);

  const auto& e = config.environment;
  check.positive_or_degenerate_zero("theta", e.theta);
  check.nonnegative("p_c", e.p_c);
  check.positive("rho", e.rho);
  check.positive("delta", e.delta);
  check.nonnegative("G0", e.G0);

  const auto& s = config.sim;
  check.positive("T", s.T);
  check.positive("dt", s.dt);
  if (std::isfinite(s.dt) && std::isfinite(s.T) && s.dt > 0 && !(s.dt < s.T))
    check.fatal("dt", s.dt, "must be < T");
  if (check.finite("tail_tol", s.tail_tol) && !(s.tail_tol > 0 && s.tail_tol < 1))
    check.fatal("tail_tol", s.tail_tol, "must be in (0,1)");

  if (out.report.ok()) out.scenario = ValidatedScenario(config);
  return out;
}

namespace {

const std::vector<std::string> kScalarKeys = {
    "lambda_m", "mu_m", "omega", "p",     "F0",  "lambda_r", "mu_r", "b",  "c",
    "n",        "theta", "p_c",  "rho",   "delta", "G0",     "T",    "dt", "tail_tol"};

double parse_number(const std::string& key, const std::string& text) {
  const char* begin = text.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  while (end && *end && std::isspace(static_cast<unsigned char>(*end))) ++end;
  if (end == begin || (end && *end != '\0'))
    throw ScenarioParseError(key, "key '" + key + "': not a number: '" + text + "'");
  return v;
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

ScenarioConfig parse_scenario_text(const std::string& text) {
  std::map<std::string, std::string> raw;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ScenarioParseError("", "line " + std::to_string(lineno) + ": expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    bool known = key == "a";
    for (const auto& k : kScalarKeys) known = known || k == key;
    if (!known) throw ScenarioParseError(key, "unknown key '" + key + "'");
    if (!raw.emplace(key, value).second)
      throw ScenarioParseError(key, "duplicate key '" + key + "'");
  }

  std::vector<std::string> missing;
  for (const auto& k : kScalarKeys)
    if (!raw.count(k)) missing.push_back(k);
  if (!raw.count("a")) missing.push_back("a");
  if (!missing.empty()) {
    std::string joined;
    for (const auto& k : missing) joined += (joined.empty() ? "" : ", ") + k;
    throw ScenarioParseError(missing.front(), "missing keys: " + joined);
  }

  ScenarioConfig cfg;
  auto num = [&](const char* key) { return parse_number(key, raw.at(key)); };
  cfg.manufacturer.lambda_m = num("lambda_m");
  cfg.manufacturer.mu_m = num("mu_m");
  cfg.manufacturer.omega = num("omega");
  cfg.manufacturer.p = num("p");
  cfg.manufacturer.F0 = num("F0");
  cfg.retailers.lambda_r = num("lambda_r");
  cfg.retailers.mu_r = num("mu_r");
  cfg.retailers.b = num("b");
  cfg.retailers.c = num("c");
  cfg.environment.theta = num("theta");
  cfg.environment.p_c = num("p_c");
  cfg.environment.rho = num("rho");
  cfg.environment.delta = num("delta");
  cfg.environment.G0 = num("G0");
  cfg.sim.T = num("T");
  cfg.sim.dt = num("dt");
  cfg.sim.tail_tol = num("tail_tol");

  double n_value = num("n");
  if (n_value != std::floor(n_value) || n_value < 0 || n_value > 1e9)
    throw ScenarioParseError("n", "key 'n': not a nonnegative integer");
  cfg.retailers.n = static_cast<int>(n_value);

  std::string a_text = raw.at("a");
  for (char& ch : a_text)
    if (ch == ',') ch = ' ';
  std::istringstream as(a_text);
  std::string tok;
  while (as >> tok) cfg.retailers.a.push_back(parse_number("a", tok));
  return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open scenario file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_text(buf.str());
}

std::string scenario_to_text(const ScenarioConfig& cfg) {
  std::ostringstream os;
  auto put = [&](const char* key, double v) { os << key << " = " << fmt_value(v) << "\n"; };
  put("lambda_m", cfg.manufacturer.lambda_m);
  put("mu_m", cfg.manufacturer.mu_m);
  put("omega", cfg.manufacturer.omega);
  put("p", cfg.manufacturer.p);
  put("F0", cfg.manufacturer.F0);
  put("lambda_r", cfg.retailers.lambda_r);
  put("mu_r", cfg.retailers.mu_r);
  put("b", cfg.retailers.b);
  put("c", cfg.retailers.c);
  os << "n = " << cfg.retailers.n << "\n";
  os << "a =";
  for (double ai : cfg.retailers.a) os << " " << fmt_value(ai);
  os << "\n";
  put("theta", cfg.environment.theta);
  put("p_c", cfg.environment.p_c);
  put("rho", cfg.environment.rho);
  put("delta", cfg.environment.delta);
  put("G0", cfg.environment.G0);
  put("T", cfg.sim.T);
  put("dt", cfg.sim.dt);
  put("tail_tol", cfg.sim.tail_tol);
  return os.str();
}

ScenarioConfig reference_scenario() {
  ScenarioConfig cfg;
  cfg.manufacturer = {500, 2, 0.4, 15, 500};
  cfg.retailers.n = 6;
  cfg.retailers.a = std::vector<double>(6, 10.0);
  cfg.retailers.b = 0.9;
  cfg.retailers.c = 0.8;
  cfg.retailers.lambda_r = 100;
  cfg.retailers.mu_r = 0.5;
  cfg.environment = {0.6, 1.0, 0.6, 0.8, 0.0};
  // T chosen so e^(-rho*T) = e^(-24) ~ 3.8e-11 clears the tail tolerance.
  cfg.sim = {40.0, 1e-2, 1e-8};
  return cfg;
}

}  // namespace captrade
