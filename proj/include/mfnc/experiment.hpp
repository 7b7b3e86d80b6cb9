#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "mfnc/config.hpp"
#include "mfnc/kmt.hpp"
#include "mfnc/runner.hpp"

namespace mfnc {

inline constexpr const char* kVersion = "0.1.0";

struct RunContext {
  std::filesystem::path dir;  // created by the caller
  Execution execution = Execution::openmp;
  int jobs = 0;
  bool plot = true;
};

/// "{experiment}-{digest}".
std::string artifact_dir_name(const std::string& experiment, const Config& cfg);

/// Every experiment writes only into ctx.dir and returns a process exit code
/// (0 ok, 2 failed assumption check). Output files other than manifest.json
/// are pure functions of the config.
int run_validate(const Config& cfg, const RunContext& ctx);
int run_simulate_finite(const Config& cfg, const RunContext& ctx);
int run_simulate_coupled(const Config& cfg, const RunContext& ctx);
int run_rate_study(const Config& cfg, const RunContext& ctx);
int run_coupler_bench(const Config& cfg, const RunContext& ctx);
int run_remainder_probe(const Config& cfg, const RunContext& ctx);
int run_appendix_checks(const Config& cfg, const RunContext& ctx);

/// Experiment name -> runner; nullptr for an unknown name.
using ExperimentFn = int (*)(const Config&, const RunContext&);
ExperimentFn find_experiment(const std::string& name);

/// Standalone walk of n marks drawn from nu on the marks stream
/// (seed, replicate, neuron 0, interval n), coupled on the coupler_v stream
/// with the same fields.
WalkCoupling bench_walk(const Coupler& coupler, std::size_t n, std::uint64_t seed,
                        std::uint64_t replicate);

/// manifest.json: config, seed, versions, jobs, wall time.
void write_manifest(const std::filesystem::path& dir, const std::string& experiment,
                    const Config& cfg, const RunContext& ctx, double wall_seconds);

}  // namespace mfnc
