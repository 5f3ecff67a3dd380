#pragma once

#include <cstdint>
#include <string>

namespace romkit {

// Options shared by every subcommand; empty strings mean "not given".
struct DriverOptions {
  std::string config_path;
  std::string out_dir;
  int workers = 1;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

// Each command returns its process exit code.  Errors surface as the romkit
// exception hierarchy and are mapped to codes by the executable wrapper:
// configuration 2, solver failure 3, missing artifact 4, verification 5.
int cmd_fom_run(const DriverOptions& opt);
int cmd_pod_build(const DriverOptions& opt);
int cmd_rom_run(const DriverOptions& opt);
int cmd_sweep(const DriverOptions& opt);
int cmd_verify(const DriverOptions& opt);
int cmd_cost(const DriverOptions& opt);

}  // namespace romkit
