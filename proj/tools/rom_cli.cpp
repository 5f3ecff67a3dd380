#include <exception>
#include <functional>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "romkit/driver.hpp"
#include "romkit/errors.hpp"

namespace {

int dispatch(const std::function<int(const romkit::DriverOptions&)>& cmd,
             const romkit::DriverOptions& opt) {
  try {
    return cmd(opt);
  } catch (const romkit::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const romkit::MissingArtifact& e) {
    std::cerr << "missing artifact: " << e.what() << "\n";
    return 4;
  } catch (const romkit::RomError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reduced-order modeling driver: full-order runs, POD bases, "
               "projection ROM closures, parameter sweeps, verification, and "
               "cost tables"};
  app.require_subcommand(1);

  romkit::DriverOptions opt;
  bool seed_given = false;
  std::uint64_t seed_value = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "JSON run configuration");
    sub->add_option("--out", opt.out_dir, "output directory override");
    sub->add_option("--workers", opt.workers, "worker thread count")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", seed_value, "RNG seed override")
        ->each([&](const std::string&) { seed_given = true; });
  };

  CLI::App* fom = app.add_subcommand("fom-run", "integrate the full-order model and store snapshots");
  CLI::App* pod = app.add_subcommand("pod-build", "build the POD trial basis from stored snapshots");
  CLI::App* rom = app.add_subcommand("rom-run", "integrate one ROM closure against stored artifacts");
  CLI::App* sweep = app.add_subcommand("sweep", "run a Cartesian grid of ROM configurations");
  CLI::App* verify = app.add_subcommand("verify", "run the analytical verification suite");
  CLI::App* cost = app.add_subcommand("cost", "emit the per-step FLOP cost table");
  for (CLI::App* sub : {fom, pod, rom, sweep, verify, cost}) add_common(sub);

  CLI11_PARSE(app, argc, argv);
  opt.seed = seed_value;
  opt.seed_set = seed_given;

  if (fom->parsed()) return dispatch(romkit::cmd_fom_run, opt);
  if (pod->parsed()) return dispatch(romkit::cmd_pod_build, opt);
  if (rom->parsed()) return dispatch(romkit::cmd_rom_run, opt);
  if (sweep->parsed()) return dispatch(romkit::cmd_sweep, opt);
  if (verify->parsed()) return dispatch(romkit::cmd_verify, opt);
  if (cost->parsed()) return dispatch(romkit::cmd_cost, opt);
  return 1;
}
