#pragma once

// Run configuration: sectioned key = value text.
//
//   output_dir = out          # keys before the first section
//   seed_policy = continuation
//   [kernel]  A a B b normalize norm_tol
//   [rate]    theta tau r N spacing tau_max tau_step
//   [pulse]   epsilon gamma
//   [evans]   re_min re_max im_min im_max resolution
//   [sim]     L n dt T boundary rate initial initial_file x0 snapshot_every
//             probe_amplitude
//
// '#' and ';' start comments. Every key has a default, so an empty file is
// the worked example.

#include <string>
#include <string_view>
#include <vector>

#include "nfwaves/direct_sim.hpp"
#include "nfwaves/error.hpp"
#include "nfwaves/evans.hpp"
#include "nfwaves/firing_rate.hpp"
#include "nfwaves/kernel.hpp"
#include "nfwaves/pulse.hpp"

namespace nfwaves {

enum class SeedPolicy { Heaviside, Continuation, File };
enum class InitialCondition { SolverFront, SolverPulse, StepFunction, File };

struct RunConfig {
  std::string output_dir = "out";
  SeedPolicy seed_policy = SeedPolicy::Continuation;
  std::string seed_file;

  double A = 5.0, a = 0.5, B = 4.0, b = 0.4211;
  bool normalize = true;
  double norm_tol = 5e-3;

  double theta = 0.1;
  double tau = 0.3;
  double r = 0.01;
  int N = 20;
  Spacing spacing = Spacing::Equal;
  double tau_max = 0.6;
  double tau_step = 0.01;

  double epsilon = 0.005;
  double gamma = 0.001;

  double re_min = 0.0, re_max = 5.0, im_min = 0.0, im_max = 20.0;
  int resolution = 256;

  double L = 60.0;
  int n = 4096;
  double dt = 0.05;
  double T = 50.0;
  Boundary boundary = Boundary::ClampedLimits;
  bool sim_staircase = false;
  InitialCondition initial = InitialCondition::SolverFront;
  std::string initial_file;
  double x0 = 30.0;  // where the initial profile crosses threshold
  int snapshot_every = 200;
  double probe_amplitude = 0.02;

  KernelParams kernel() const;
  RateSpec rate() const;
  PulseParams pulse() const { return {epsilon, gamma}; }
  ScanOptions scan() const;
  /// Simulator settings; the rate is filled in by the caller.
  SimConfig sim() const;
};

/// Aggregated diagnostics, one line each ("line 4: ...").
class ConfigError : public SolverError {
 public:
  explicit ConfigError(std::vector<std::string> diags);
  const std::vector<std::string>& diagnostics() const noexcept { return diags_; }

 private:
  std::vector<std::string> diags_;
};

struct Override {
  std::string section;  // empty for prelude keys
  std::string key;
  std::string value;
  std::string origin;  // prefix for diagnostics, e.g. "--tau"
};

/// Parses, applies overrides on top, then validates. Throws ConfigError
/// listing every problem found.
RunConfig parse_config(std::string_view text, const std::vector<Override>& overrides = {});

RunConfig load_config(const std::string& path, const std::vector<Override>& overrides = {});

/// Sets section.key from text, as a config line would. Returns a diagnostic,
/// empty on success. An empty section names the prelude keys.
std::string set_key(RunConfig& cfg, const std::string& section, const std::string& key,
                    const std::string& value);

/// Cross-field checks. Returns diagnostics, empty when valid.
std::vector<std::string> validate(const RunConfig& cfg);

std::string to_string(SeedPolicy p);
std::string to_string(InitialCondition c);

}  // namespace nfwaves
