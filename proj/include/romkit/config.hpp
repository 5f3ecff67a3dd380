#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "romkit/euler1d.hpp"
#include "romkit/rom.hpp"
#include "romkit/timeint.hpp"

namespace romkit {

// Parsed, fully validated run configuration.  Parsing is fail-closed: any
// unknown key, wrong type, or out-of-range value raises ConfigError with the
// offending field path before anything is computed.

struct ProblemConfig {
  enum class Kind { Sod, LtiDiffusion, LtiFile };
  Kind kind = Kind::Sod;
  Euler1dConfig sod;
  int lti_n = 64;
  double lti_dx = 0.0;  // 0 means 1/(n+1)
  std::string matrix_path;
};

struct PodConfig {
  bool per_variable = true;
  int k = 0;          // global mode: total columns (0 = use energy)
  int k_per_var = 0;  // per-variable mode: columns per block (0 = use energy)
  double energy = 0.0;
};

struct RomConfig {
  RomMethod method;
  IntegratorSpec ispec;
  int k = 0;  // truncate the stored basis to this many columns (0 = all)
};

struct HyperConfig {
  bool enabled = false;
  int r = 0;
  int target_np = 0;
};

struct SweepConfig {
  std::vector<int> k;
  std::vector<double> tau;
  std::vector<double> dt;
  // Entries "method" or "method/scheme", e.g. "galerkin/ssp-rk3".
  std::vector<std::string> methods;
};

struct OutputConfig {
  std::string dir = "out";
  int save_every = 2;
};

struct VerifyConfig {
  int cases = 20;
};

struct CostConfig {
  long long n = 1000;
  long long omega = 50;
  long long k_max = 250;
  long long k_step = 5;
};

struct RunConfig {
  ProblemConfig problem;
  IntegratorSpec fom;
  PodConfig pod;
  RomConfig rom;
  HyperConfig hyper;
  SweepConfig sweep;
  OutputConfig outputs;
  VerifyConfig verify;
  CostConfig cost;
  std::uint64_t seed = 0;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

// Name/value mapping helpers shared with the CSV emitters.
Scheme scheme_from_name(const std::string& name);
std::string scheme_name(Scheme s);
std::string method_name(RomMethod::Kind kind);

}  // namespace romkit
