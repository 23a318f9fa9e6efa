// Command-line front end: parse a JSON config, hand it to the runner.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nflow/runner.hpp"

namespace {

int run_subcommand(nflow::RunMode mode, const std::string& config_path, int threads,
                   const std::string& output_dir, bool verbose) {
  std::vector<nflow::ConfigError> errors;
  nflow::RunConfig cfg = nflow::parse_config_file(config_path, errors);
  if (!errors.empty()) {
    for (const auto& e : errors)
      std::fprintf(stderr, "config error at %s: %s\n", e.path.c_str(),
                   e.message.c_str());
    return 1;
  }
  cfg.mode = mode;
  if (threads > 0) cfg.threads = threads;
  if (!output_dir.empty()) cfg.output_dir = output_dir;

  nflow::RunOutputs out = nflow::execute(cfg, verbose);
  if (out.exit_code != 0) {
    std::fprintf(stderr, "error: %s\n", out.error.c_str());
    return out.exit_code;
  }
  if (!out.report_path.empty()) std::printf("report: %s\n", out.report_path.c_str());
  if (!out.csv_path.empty()) std::printf("monitors: %s\n", out.csv_path.c_str());
  if (!out.checkpoint_path.empty())
    std::printf("checkpoint: %s\n", out.checkpoint_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nflow: gradient flows for sphere-valued maps in the critical dimension"};
  app.require_subcommand(1);

  int threads = 0;
  if (const char* env = std::getenv("NFLOW_THREADS")) threads = std::atoi(env);

  struct Sub {
    const char* name;
    const char* help;
    nflow::RunMode mode;
  };
  const Sub subs[] = {
      {"run", "integrate a flow and write monitor series", nflow::RunMode::Flow},
      {"minimize", "run the decreasing-epsilon minimization schedule",
       nflow::RunMode::Minimize},
      {"bubbles", "decompose checkpoints into body + bubbles + necks",
       nflow::RunMode::Bubbles},
      {"check", "validate a config without running", nflow::RunMode::Check},
  };

  std::string config_path;
  std::string output_dir;
  bool verbose = false;
  int rc = 0;

  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    sub->add_option("-c,--config", config_path, "JSON config file")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("-t,--threads", threads, "worker threads (env NFLOW_THREADS)");
    sub->add_option("-o,--output", output_dir, "override output directory");
    sub->add_flag("-v,--verbose", verbose, "print the report to stderr");
    nflow::RunMode mode = s.mode;
    sub->callback([&, mode]() {
      rc = run_subcommand(mode, config_path, threads, output_dir, verbose);
    });
  }

  CLI11_PARSE(app, argc, argv);
  return rc;
}
