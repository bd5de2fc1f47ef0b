#include <CLI11.hpp>
#include <cstdio>
#include <iostream>

#include "fracground/experiment.hpp"

namespace {

void print_summary(const fracground::RunOutcome& out) {
  using fracground::format12;
  const auto& res = out.record["results"];
  for (const char* key : {"nu", "nu_limit", "max_pairwise_gap"})
    if (res.contains(key) && res[key].is_number()) std::printf("%s = %s\n", key, format12(res[key]).c_str());
  if (res.contains("solve")) {
    std::printf("nu = %s\n", format12(res["solve"]["nu"]).c_str());
    std::printf("residual_l2 = %s\n", format12(res["solve"]["residual_l2"]).c_str());
  }
  if (res.contains("entries"))
    for (const auto& e : res["entries"])
      std::printf("eps = %s  nu = %s  profile_gap = %s  crit_norm = %s\n", format12(e["eps"]).c_str(),
                  format12(e["nu"]).c_str(), format12(e["profile_gap"]).c_str(),
                  format12(e["crit_norm"]).c_str());
  for (const auto& v : out.verdicts)
    std::printf("[%s] %s%s%s\n", v.pass ? "PASS" : "FAIL", v.name.c_str(), v.detail.empty() ? "" : ": ",
                v.detail.c_str());
  std::printf("record: %s\n", out.record_path.string().c_str());
  if (!out.table_path.empty()) std::printf("table: %s\n", out.table_path.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ground states of the semiclassical fractional Schroedinger equation"};
  std::string experiment, config_path, output_dir;
  std::optional<std::uint64_t> seed;
  app.add_option("experiment", experiment,
                 "solve | sweep-eps | uniqueness | coercivity | validate-operator | decay")
      ->required();
  app.add_option("--config", config_path, "configuration file")->required()->check(CLI::ExistingFile);
  app.add_option("--output-dir", output_dir, "directory for the record and sweep table");
  app.add_option("--seed", seed, "overrides the config seed (and rng_seed)");
  app.set_version_flag("--version", fracground::kToolVersion);
  CLI11_PARSE(app, argc, argv);

  fracground::RunConfig cfg;
  try {
    cfg = fracground::load_config(config_path, fracground::parse_experiment(experiment));
    if (!output_dir.empty()) cfg.output_dir = output_dir;
    if (seed) {
      cfg.seed = *seed;
      cfg.solver.rng_seed = *seed;
    }
    cfg.validate();
  } catch (const fracground::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return 2;
  }

  try {
    const fracground::RunOutcome out = fracground::run_experiment(cfg);
    print_summary(out);
    if (!out.error.empty()) {
      std::fprintf(stderr, "experiment aborted: %s\n", out.error.c_str());
      return 3;
    }
    if (!out.all_pass()) {
      std::fprintf(stderr, "failed verdict: %s\n", out.first_failure().c_str());
      return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
}
