#include "nfwaves/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace nfwaves {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string_view::npos) return {};
  std::size_t b = s.find_last_not_of(" \t\r");
  return std::string(s.substr(a, b - a + 1));
}

std::string join(const std::vector<std::string>& v) {
  std::string out;
  for (const auto& s : v) {
    if (!out.empty()) out += "; ";
    out += s;
  }
  return out;
}

bool parse_double(const std::string& s, double& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end && std::isfinite(out);
}

bool parse_int(const std::string& s, int& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end;
}

using Setter = std::function<std::string(RunConfig&, const std::string&)>;

Setter real(double RunConfig::*field) {
  return [field](RunConfig& c, const std::string& v) -> std::string {
    if (!parse_double(v, c.*field)) return "expected a number, got '" + v + "'";
    return {};
  };
}

Setter integer(int RunConfig::*field) {
  return [field](RunConfig& c, const std::string& v) -> std::string {
    if (!parse_int(v, c.*field)) return "expected an integer, got '" + v + "'";
    return {};
  };
}

Setter text(std::string RunConfig::*field) {
  return [field](RunConfig& c, const std::string& v) -> std::string {
    c.*field = v;
    return {};
  };
}

template <class E>
Setter choice(E RunConfig::*field, std::map<std::string, E> options) {
  return [field, options](RunConfig& c, const std::string& v) -> std::string {
    auto it = options.find(v);
    if (it == options.end()) {
      std::string names;
      for (const auto& [k, _] : options) names += (names.empty() ? "" : ", ") + k;
      return "expected one of " + names + ", got '" + v + "'";
    }
    c.*field = it->second;
    return {};
  };
}

Setter boolean(bool RunConfig::*field) {
  return choice(field, std::map<std::string, bool>{
                           {"true", true}, {"false", false}, {"yes", true}, {"no", false},
                           {"1", true}, {"0", false}});
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {".output_dir", text(&RunConfig::output_dir)},
      {".seed_policy", choice(&RunConfig::seed_policy,
                              std::map<std::string, SeedPolicy>{
                                  {"heaviside", SeedPolicy::Heaviside},
                                  {"continuation", SeedPolicy::Continuation},
                                  {"file", SeedPolicy::File}})},
      {".seed_file", text(&RunConfig::seed_file)},
      {"kernel.A", real(&RunConfig::A)},
      {"kernel.a", real(&RunConfig::a)},
      {"kernel.B", real(&RunConfig::B)},
      {"kernel.b", real(&RunConfig::b)},
      {"kernel.normalize", boolean(&RunConfig::normalize)},
      {"kernel.norm_tol", real(&RunConfig::norm_tol)},
      {"rate.theta", real(&RunConfig::theta)},
      {"rate.tau", real(&RunConfig::tau)},
      {"rate.r", real(&RunConfig::r)},
      {"rate.N", integer(&RunConfig::N)},
      {"rate.spacing", choice(&RunConfig::spacing, std::map<std::string, Spacing>{
                                                       {"equal", Spacing::Equal},
                                                       {"quantile", Spacing::Quantile}})},
      {"rate.tau_max", real(&RunConfig::tau_max)},
      {"rate.tau_step", real(&RunConfig::tau_step)},
      {"pulse.epsilon", real(&RunConfig::epsilon)},
      {"pulse.gamma", real(&RunConfig::gamma)},
      {"evans.re_min", real(&RunConfig::re_min)},
      {"evans.re_max", real(&RunConfig::re_max)},
      {"evans.im_min", real(&RunConfig::im_min)},
      {"evans.im_max", real(&RunConfig::im_max)},
      {"evans.resolution", integer(&RunConfig::resolution)},
      {"sim.L", real(&RunConfig::L)},
      {"sim.n", integer(&RunConfig::n)},
      {"sim.dt", real(&RunConfig::dt)},
      {"sim.T", real(&RunConfig::T)},
      {"sim.boundary", choice(&RunConfig::boundary, std::map<std::string, Boundary>{
                                                        {"clamped", Boundary::ClampedLimits},
                                                        {"periodic", Boundary::Periodic}})},
      {"sim.rate", choice(&RunConfig::sim_staircase, std::map<std::string, bool>{
                                                         {"smooth", false}, {"staircase", true}})},
      {"sim.initial", choice(&RunConfig::initial, std::map<std::string, InitialCondition>{
                                                      {"solver-front", InitialCondition::SolverFront},
                                                      {"solver-pulse", InitialCondition::SolverPulse},
                                                      {"step-function", InitialCondition::StepFunction},
                                                      {"file", InitialCondition::File}})},
      {"sim.initial_file", text(&RunConfig::initial_file)},
      {"sim.x0", real(&RunConfig::x0)},
      {"sim.snapshot_every", integer(&RunConfig::snapshot_every)},
      {"sim.probe_amplitude", real(&RunConfig::probe_amplitude)},
  };
  return table;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> diags)
    : SolverError(ErrorCode::Config, join(diags)), diags_(std::move(diags)) {}

KernelParams RunConfig::kernel() const {
  KernelParams k = KernelParams::make(A, a, B, b);
  if (normalize) return k.normalized();
  check_normalization(k, norm_tol);
  return k;
}

RateSpec RunConfig::rate() const { return RateSpec::make(theta, tau, r); }

ScanOptions RunConfig::scan() const {
  ScanOptions o;
  o.re_min = re_min;
  o.re_max = re_max;
  o.im_min = im_min;
  o.im_max = im_max;
  o.n_re = o.n_im = resolution;
  return o;
}

SimConfig RunConfig::sim() const {
  SimConfig s;
  s.L = L;
  s.n = n;
  s.dt = dt;
  s.T = T;
  s.boundary = boundary;
  s.kernel = kernel();
  return s;
}

std::string set_key(RunConfig& cfg, const std::string& section, const std::string& key,
                    const std::string& value) {
  auto it = setters().find(section + "." + key);
  if (it == setters().end()) {
    if (section.empty()) return "unknown key '" + key + "' before the first section";
    return "unknown key '" + key + "' in [" + section + "]";
  }
  std::string err = it->second(cfg, value);
  return err.empty() ? err : key + ": " + err;
}

std::vector<std::string> validate(const RunConfig& c) {
  std::vector<std::string> d;
  try {
    (void)c.kernel();
  } catch (const SolverError& e) {
    d.push_back(std::string("kernel: ") + e.what());
  }
  if (!(c.theta > 0.0 && c.theta < 0.5)) d.push_back("theta must lie in (0, 1/2)");
  if (!(c.tau >= 0.0)) d.push_back("tau must be nonnegative");
  if (!(c.theta + c.tau < 1.0)) d.push_back("theta + tau must stay below 1");
  if (!(c.r > 0.0)) d.push_back("r must be positive");
  if (c.N < 1) d.push_back("N must be at least 1");
  if (!(c.tau_step > 0.0)) d.push_back("tau_step must be positive");
  if (!(c.tau_max > 0.0 && c.tau_max + c.theta < 1.0))
    d.push_back("tau_max must be positive with theta + tau_max < 1");
  if (!(c.epsilon > 0.0)) d.push_back("epsilon must be positive");
  if (!(c.gamma >= 0.0)) d.push_back("gamma must be nonnegative");
  if (!(c.re_min > -1.0)) d.push_back("re_min must exceed -1");
  if (!(c.re_max > c.re_min)) d.push_back("re_max must exceed re_min");
  if (!(c.im_max > c.im_min)) d.push_back("im_max must exceed im_min");
  if (c.resolution < 32) d.push_back("resolution must be at least 32");
  if (c.seed_policy == SeedPolicy::File && c.seed_file.empty())
    d.push_back("seed_policy = file needs seed_file");
  if (c.initial == InitialCondition::File && c.initial_file.empty())
    d.push_back("initial = file needs initial_file");
  if (c.snapshot_every < 0) d.push_back("snapshot_every must be nonnegative");
  if (!(std::abs(c.probe_amplitude) <= 0.05)) d.push_back("probe_amplitude must not exceed 0.05");
  if (!(std::abs(c.x0) < c.L)) d.push_back("x0 must lie inside (-L, L)");
  try {
    SimConfig s;
    s.L = c.L;
    s.n = c.n;
    s.dt = c.dt;
    s.T = c.T;
    s.boundary = c.boundary;
    s.kernel = KernelParams::make(c.A, c.a, c.B, c.b);
    s.validate();
  } catch (const SolverError& e) {
    d.push_back(std::string("sim: ") + e.what());
  }
  return d;
}

RunConfig parse_config(std::string_view text, const std::vector<Override>& overrides) {
  RunConfig cfg;
  std::vector<std::string> diags;
  std::string section;
  static const std::vector<std::string> sections = {"kernel", "rate", "pulse", "evans", "sim"};
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    std::size_t cmt = raw.find_first_of("#;");
    std::string line = trim(raw.substr(0, cmt));
    if (line.empty()) continue;
    auto at = [&](const std::string& m) { diags.push_back("line " + std::to_string(line_no) + ": " + m); };
    if (line.front() == '[') {
      if (line.back() != ']') {
        at("malformed section header '" + line + "'");
        continue;
      }
      section = trim(std::string_view(line).substr(1, line.size() - 2));
      if (std::find(sections.begin(), sections.end(), section) == sections.end())
        at("unknown section [" + section + "]");
      continue;
    }
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      at("expected key = value, got '" + line + "'");
      continue;
    }
    std::string key = trim(std::string_view(line).substr(0, eq));
    std::string value = trim(std::string_view(line).substr(eq + 1));
    if (std::find(sections.begin(), sections.end(), section) == sections.end() && !section.empty())
      continue;  // already reported the section
    std::string err = set_key(cfg, section, key, value);
    if (!err.empty()) at(err);
  }
  for (const auto& o : overrides) {
    std::string err = set_key(cfg, o.section, o.key, o.value);
    if (!err.empty()) diags.push_back(o.origin + ": " + err);
  }
  for (auto& v : validate(cfg)) diags.push_back(std::move(v));
  if (!diags.empty()) throw ConfigError(std::move(diags));
  return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<Override>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

std::string to_string(SeedPolicy p) {
  switch (p) {
    case SeedPolicy::Heaviside: return "heaviside";
    case SeedPolicy::Continuation: return "continuation";
    case SeedPolicy::File: return "file";
  }
  return "continuation";
}

std::string to_string(InitialCondition c) {
  switch (c) {
    case InitialCondition::SolverFront: return "solver-front";
    case InitialCondition::SolverPulse: return "solver-pulse";
    case InitialCondition::StepFunction: return "step-function";
    case InitialCondition::File: return "file";
  }
  return "solver-front";
}

}  // namespace nfwaves
