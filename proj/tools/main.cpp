// Command-line front end: run / compare / verify over scenario files.
#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "captrade/runner.hpp"

namespace {

captrade::Model parse_model(const std::string& name) {
  if (name == "decentralized" || name == "d") return captrade::Model::decentralized;
  if (name == "stackelberg" || name == "s") return captrade::Model::stackelberg;
  throw CLI::ValidationError("--model", "expected 'decentralized' or 'stackelberg'");
}

// --sweep key=v1,v2,...  (one scalar scenario key, at least one value)
captrade::SweepAxis parse_sweep(const std::string& text) {
  captrade::SweepAxis axis;
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0)
    throw CLI::ValidationError("--sweep", "expected key=v1,v2,...");
  axis.key = text.substr(0, eq);
  std::string rest = text.substr(eq + 1);
  size_t pos = 0;
  while (pos <= rest.size()) {
    const auto comma = rest.find(',', pos);
    const std::string tok =
        rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (tok.empty()) throw CLI::ValidationError("--sweep", "empty value in list");
    try {
      size_t used = 0;
      axis.values.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw CLI::ValidationError("--sweep", "not a number: '" + tok + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (axis.values.empty()) throw CLI::ValidationError("--sweep", "no values given");
  return axis;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Carbon-trading supply chain equilibrium toolkit"};
  app.require_subcommand(1);

  std::string scenario_file;
  std::string out_dir = "out";
  std::string model_name = "decentralized";
  std::string sweep_text;
  bool no_trading = false;
  bool with_dp = false;
  bool transcription_diff = false;

  CLI::App* run = app.add_subcommand("run", "Solve one model and simulate its trajectory");
  run->add_option("scenario", scenario_file, "Scenario file")->required();
  run->add_option("--model", model_name, "decentralized|stackelberg");
  run->add_option("--out", out_dir, "Output directory");
  run->add_flag("--no-trading", no_trading, "Force the carbon price to zero");
  run->add_option("--sweep", sweep_text, "key=v1,v2,... sweep over one scalar key");

  CLI::App* compare = app.add_subcommand(
      "compare", "Run both models with and without carbon trading and rank outcomes");
  compare->add_option("scenario", scenario_file, "Scenario file")->required();
  compare->add_option("--out", out_dir, "Output directory");
  compare->add_flag("--no-trading", no_trading, "Force the carbon price to zero");
  compare->add_option("--sweep", sweep_text, "key=v1,v2,... sweep over one scalar key");

  CLI::App* verify = app.add_subcommand(
      "verify", "Check closed forms against independent numerical oracles");
  verify->add_option("scenario", scenario_file, "Scenario file")->required();
  verify->add_flag("--no-trading", no_trading, "Force the carbon price to zero");
  verify->add_flag("--with-dp", with_dp, "Include the dynamic-programming best-response check");
  verify->add_flag("--transcription-diff", transcription_diff,
                   "Also score the alternate transcribed coefficient set (expected to fail)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      captrade::RunOptions opt;
      opt.scenario_file = scenario_file;
      opt.model = parse_model(model_name);
      opt.out_dir = out_dir;
      opt.no_trading = no_trading;
      if (!sweep_text.empty()) opt.sweep = parse_sweep(sweep_text);
      return captrade::cmd_run(opt, std::cout, std::cerr);
    }
    if (compare->parsed()) {
      captrade::CompareOptions opt;
      opt.scenario_file = scenario_file;
      opt.out_dir = out_dir;
      opt.no_trading = no_trading;
      if (!sweep_text.empty()) opt.sweep = parse_sweep(sweep_text);
      return captrade::cmd_compare(opt, std::cout, std::cerr);
    }
    captrade::VerifyOptions opt;
    opt.scenario_file = scenario_file;
    opt.no_trading = no_trading;
    opt.with_dp = with_dp;
    opt.transcription_diff = transcription_diff;
    return captrade::cmd_verify(opt, std::cout, std::cerr);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return captrade::exit_code::invalid_scenario;
  }
}
