#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "captrade/equilibrium.hpp"

namespace captrade {

// Process exit codes shared by every subcommand.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int verification_failed = 1;
inline constexpr int invalid_scenario = 2;  // parse or validation failure
inline constexpr int no_solution = 3;       // discriminant <= 0, interior violation, ...
inline constexpr int io_error = 4;
}  // namespace exit_code

struct SweepAxis {
  std::string key;  // scalar scenario key
  std::vector<double> values;
};

struct RunOptions {
  std::string scenario_file;
  Model model = Model::decentralized;
  std::string out_dir = "out";
  bool no_trading = false;  // force p_c = 0
  SweepAxis sweep;          // empty key = no sweep
};

struct CompareOptions {
  std::string scenario_file;
  std::string out_dir = "out";
  bool no_trading = false;
  SweepAxis sweep;
};

struct VerifyOptions {
  std::string scenario_file;
  bool no_trading = false;
  bool with_dp = false;            // DP oracle is slow; off by default
  bool transcription_diff = false; // feed transcribed coefficients to the residual
                                   // oracle; expected (and required) to fail
};

int cmd_run(const RunOptions& opt, std::ostream& out, std::ostream& err);
int cmd_compare(const CompareOptions& opt, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyOptions& opt, std::ostream& out, std::ostream& err);

// Atomic file write (temp + rename in the target directory).
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace captrade
