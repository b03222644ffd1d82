// finslerctl: batch evaluation, classification and identity checks for
// Finsler metrics and sprays. Worker count comes from FINSLER_WORKERS.

#include <iostream>

#include <CLI11.hpp>

#include "finsler/cli.hpp"

namespace fc = finsler::cli;

namespace {

struct Args {
  std::string config;
  std::uint64_t seed = 0;
  int points = 0;
  std::vector<std::string> checks;
  std::vector<std::string> tolerances;
  std::string output;
  bool budget = false;
  bool deep = false;
  bool timing = false;
};

void add_common(CLI::App* sub, Args& a) {
  sub->add_option("--config", a.config, "run configuration (JSON)")->required();
  sub->add_option("--seed", a.seed, "sampler seed");
  sub->add_option("--points", a.points, "number of sample points");
  sub->add_option("--check", a.checks, "check to run (repeatable)");
  sub->add_option("--tolerance", a.tolerances, "NAME=VALUE (repeatable)");
  sub->add_option("--output", a.output, "report path (default stdout)");
  sub->add_flag("--budget", a.budget, "print jet-order requirements and exit");
  sub->add_flag("--deep", a.deep, "enable third-order x derivatives");
  sub->add_flag("--timing", a.timing, "include wall times in the report");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finsler spray and curvature toolkit"};
  app.set_version_flag("--version", std::string(fc::kToolName) + " " + fc::kToolVersion);
  app.require_subcommand(1);

  Args args;
  std::vector<std::pair<CLI::App*, fc::Command>> subs;
  for (fc::Command c : {fc::Command::eval, fc::Command::classify, fc::Command::verify,
                        fc::Command::projective}) {
    CLI::App* sub = app.add_subcommand(fc::command_name(c));
    add_common(sub, args);
    subs.emplace_back(sub, c);
  }
  subs[0].first->description("dump tensors at sample points");
  subs[1].first->description("classify the metric's spray");
  subs[2].first->description("run identity checks");
  subs[3].first->description("check invariance under a projective change");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : fc::kExitConfig;
  }

  fc::Overrides ov;
  fc::Command command = fc::Command::verify;
  for (const auto& [sub, c] : subs) {
    if (!sub->parsed()) continue;
    command = c;
    if (sub->count("--seed")) ov.seed = args.seed;
    if (sub->count("--points")) ov.points = args.points;
    if (sub->count("--output")) ov.output = args.output;
  }
  ov.checks = args.checks;
  ov.tolerances = args.tolerances;
  ov.deep = args.deep;
  ov.timing = args.timing;
  return fc::main_entry(command, args.config, ov, args.budget, std::cout, std::cerr);
}
