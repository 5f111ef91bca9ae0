// stormreach: fit storm error models, plan reach-avoid trajectories and validate them.
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "stormreach/errors.hpp"
#include "stormreach/parallel.hpp"
#include "stormreach/pipeline.hpp"
#include "stormreach/scenario.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kDataError = 2, kInternal = 3 };

stormreach::RunConfig load(const std::string& path, const std::optional<std::uint64_t>& seed,
                           const std::string& out) {
  auto config = stormreach::load_config(path);
  if (seed) config.seed = seed;
  if (!out.empty()) {
    const bool default_model = config.model_file == config.output_dir / "error_models.json";
    config.output_dir = out;
    if (default_model) config.model_file = config.output_dir / "error_models.json";
  }
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thunderstorm-aware trajectory planning"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Run configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Override the configured seed");
    sub->add_option("--out", out_dir, "Override the output directory");
    sub->add_option("--threads", threads, "Worker threads (0 = hardware concurrency)")->check(CLI::NonNegativeNumber);
  };
  auto* fit = app.add_subcommand("fit", "Fit nowcast error models from the archive");
  auto* plan = app.add_subcommand("plan", "Build the storm field and solve the reach-avoid problem");
  auto* simulate = app.add_subcommand("simulate", "Roll out the stored policy");
  auto* all = app.add_subcommand("all", "fit, plan and simulate");
  for (auto* sub : {fit, plan, simulate, all}) add_common(sub);

  auto* gen = app.add_subcommand("gen-scenario", "Write a synthetic nowcast archive and config");
  std::string kind = "gap";
  std::uint64_t gen_seed = 1;
  std::string gen_dir;
  gen->add_option("--kind", kind, "Scenario kind")->check(CLI::IsMember(stormreach::scenario_kinds()));
  gen->add_option("--seed", gen_seed, "Scenario seed");
  gen->add_option("--out", gen_dir, "Scenario directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    stormreach::set_worker_threads(threads);
    if (gen->parsed()) {
      const auto path = stormreach::write_scenario(gen_dir, stormreach::make_scenario(kind, gen_seed));
      std::cout << "wrote " << path.string() << "\n";
      return kOk;
    }
    const auto config = load(config_path, seed, out_dir);
    std::filesystem::create_directories(config.output_dir);
    if (fit->parsed()) stormreach::cmd_fit(config, std::cout);
    if (plan->parsed()) stormreach::cmd_plan(config, std::cout);
    if (simulate->parsed()) stormreach::cmd_simulate(config, std::cout);
    if (all->parsed()) stormreach::cmd_all(config, std::cout);
    return kOk;
  } catch (const stormreach::InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  } catch (const stormreach::ParseError& e) {
    std::cerr << "error: " << e.what();
    if (e.line() > 0) std::cerr << " (line " << e.line() << ", column " << e.column() << ")";
    std::cerr << "\n";
    return kDataError;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::logic_error& e) {
    // DomainError derives from std::domain_error; anything else logic-side is a bug.
    if (dynamic_cast<const std::domain_error*>(&e)) {
      std::cerr << "error: " << e.what() << "\n";
      return kDataError;
    }
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
}
