#include "mfnc/cli.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "mfnc/errors.hpp"
#include "mfnc/experiment.hpp"

namespace mfnc {

namespace {

const char* kExperiments[] = {"validate",      "simulate-finite", "simulate-coupled", "rate-study",
                              "coupler-bench", "remainder-probe", "appendix-checks"};

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{"Coupled finite / mean-field neuron simulations"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  std::string out_dir = "out";
  int jobs = 0;
  std::vector<std::string> overrides;
  bool plot = true;
  bool serial = false;
  app.add_option("--config", config_path, "key = value config file")->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "artifact root directory");
  app.add_option("--jobs", jobs, "worker threads (0 = all)")->check(CLI::NonNegativeNumber);
  app.add_option("--set", overrides, "key=value override, applied after the file")
      ->allow_extra_args(false);
  app.add_flag("--plot,!--no-plot", plot, "write SVG plots");
  app.add_flag("--serial", serial, "use the serial reference loop");
  for (const char* name : kExperiments) app.add_subcommand(name);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  const std::string experiment = app.get_subcommands().front()->get_name();

  try {
    Config cfg = config_path.empty() ? Config{} : Config::from_file(config_path);
    for (const std::string& s : overrides) cfg.apply_override(s);
    cfg.apply_environment();

    RunContext ctx;
    ctx.dir = std::filesystem::path(out_dir) / artifact_dir_name(experiment, cfg);
    ctx.execution = serial ? Execution::serial : Execution::openmp;
    ctx.jobs = jobs;
    ctx.plot = plot;
    std::filesystem::create_directories(ctx.dir);

    const auto start = std::chrono::steady_clock::now();
    const int code = find_experiment(experiment)(cfg, ctx);
    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
    write_manifest(ctx.dir, experiment, cfg, ctx, wall.count());
    std::cout << ctx.dir.string() << "\n";
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid parameters: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace mfnc
