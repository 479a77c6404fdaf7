#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "semisep/job.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Fredholm determinants of semi-separable kernels"};
  app.require_subcommand(1, 1);
  std::string config;
  int threads = 1;
  std::string out;
  for (const char* name : {"det2", "det1", "tb2", "tb3", "bound_states", "bargmann", "converge"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "job configuration (JSON)")->required();
    sub->add_option("--threads", threads, "worker threads over the parameter list");
    sub->add_option("--out", out, "output directory (overrides the config)");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : semisep::cli::kExitConfig;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  return semisep::cli::run_cli(command, config, threads,
                               out.empty() ? std::nullopt : std::optional<std::string>(out));
}
