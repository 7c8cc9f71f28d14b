#include "nfwaves/commands.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "nfwaves/direct_sim.hpp"
#include "nfwaves/error.hpp"
#include "nfwaves/evans.hpp"
#include "nfwaves/output.hpp"
#include "nfwaves/pulse.hpp"

namespace nfwaves {

using nlohmann::json;

namespace {

// Published values of the worked example, for the reproduce summary.
constexpr double kPubSigma1 = 0.6497;
constexpr double kPubSigma2 = 1.9754;
constexpr double kPubSigma3 = 1.9754;
constexpr double kPubTau0 = 0.8;
constexpr double kPubTauStar = 0.52;
constexpr double kPulseTau = 0.52;

std::string path_of(const RunConfig& cfg, const std::string& name) {
  return join_path(cfg.output_dir, name);
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json front_json(const FrontSolution& f, double tau) {
  return {{"tau", tau},
          {"N", f.disc.N},
          {"theta", f.theta},
          {"mu", f.mu},
          {"crossings", f.crossings},
          {"residual_norm", f.residual_norm}};
}

FrontSolution front_from_file(const RunConfig& cfg, const Discretization& disc) {
  std::ifstream in(cfg.seed_file);
  if (!in) throw SolverError(ErrorCode::BadGuess, "cannot read seed file '" + cfg.seed_file + "'");
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw SolverError(ErrorCode::BadGuess, std::string("seed file is not valid JSON: ") + e.what());
  }
  if (!j.contains("mu") || !j.contains("crossings"))
    throw SolverError(ErrorCode::BadGuess, "seed file needs 'mu' and 'crossings'");
  FrontSolution guess;
  guess.mu = j.at("mu").get<double>();
  guess.crossings = j.at("crossings").get<std::vector<double>>();
  guess.disc = disc;
  return guess;
}

struct PulseRun {
  FrontSolution front;
  SingularOrbit orbit;
  PulseSolution pulse;
};

PulseRun pulse_from_config(const RunConfig& cfg, double tau, const PulseParams& pp) {
  PulseRun r;
  r.front = front_from_config(cfg, tau);
  RateSpec rate = cfg.rate().with_tau(tau);
  r.orbit = build_singular_orbit(r.front, rate, pp);
  PulseSolution guess = pulse_guess(r.orbit, pp);
  r.pulse = solve_pulse(r.front.kernel, r.front.disc, cfg.theta, pp, guess);
  return r;
}

std::vector<std::vector<double>> read_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SolverError(ErrorCode::InvalidArgument, "cannot read initial file '" + path + "'");
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> rows;
  int no = 1;
  while (std::getline(in, line)) {
    ++no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc())
        throw SolverError(ErrorCode::InvalidArgument,
                          path + ":" + std::to_string(no) + ": bad number '" + cell + "'");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json cmd_kernel(const RunConfig& cfg) {
  KernelParams k = cfg.kernel();
  SigmaConstants s = compute_sigmas(k, cfg.theta, cfg.theta + cfg.tau);
  CsvWriter csv(path_of(cfg, "kernel.csv"), {"mu", "phi", "dphi"});
  for (int i = 0; i <= 200; ++i) {
    double mu = std::pow(10.0, -2.0 + 4.0 * i / 200);
    SpeedIndex si = speed_index(k, mu);
    csv.row({mu, si.phi, si.dphi});
  }
  return {{"A", k.A()},         {"a", k.a()},
          {"B", k.B()},         {"b", k.b()},
          {"mass", k.mass()},   {"M", s.M},
          {"sigma1", s.sigma1}, {"sigma2", opt_json(s.sigma2)},
          {"sigma3", opt_json(s.sigma3)}, {"sigma_min", s.sigma_min},
          {"mu0", solve_heaviside_speed(k, cfg.theta)}};
}

json cmd_fixed_points(const RunConfig& cfg) {
  RateSpec rate = cfg.rate();
  FixedPoints fp = find_fixed_points(rate);
  CsvWriter csv(path_of(cfg, "rate.csv"), {"u", "S"});
  double lo = cfg.theta - 0.1, hi = cfg.theta + cfg.tau + 0.1;
  for (int i = 0; i <= 1000; ++i) {
    double u = lo + (hi - lo) * i / 1000;
    csv.row({u, rate(u - cfg.theta)});
  }
  return {{"low", fp.low},
          {"mid", fp.mid},
          {"high", fp.high},
          {"lambda", lambda_speed_sign(rate)},
          {"tau0", tau_zero(rate)}};
}

json cmd_front(const RunConfig& cfg) {
  FrontSolution f = front_from_config(cfg, cfg.tau);
  CsvWriter csv(path_of(cfg, "front.csv"), {"z", "U", "Udash"});
  for (int i = 0; i <= 2000; ++i) {
    double z = -30.0 + 60.0 * i / 2000;
    csv.row({z, eval_front(f, z), eval_front_deriv(f, z)});
  }
  json j = front_json(f, cfg.tau);
  j["mu0"] = solve_heaviside_speed(f.kernel, cfg.theta);
  return j;
}

json cmd_continue(const RunConfig& cfg) {
  ContinuationOptions opt;
  opt.N = cfg.N;
  opt.tau_max = cfg.tau_max;
  opt.step = cfg.tau_step;
  opt.spacing = cfg.spacing;
  ContinuationTrace tr = continue_in_tau(cfg.kernel(), cfg.rate(), opt);
  CsvWriter csv(path_of(cfg, "continuation.csv"), {"tau", "mu", "z_N", "sigma_min", "holds"});
  for (const auto& s : tr.steps)
    csv.row({s.tau, s.front.mu, s.front.crossings.back(), s.h1.sigma_min, s.h1.holds ? 1.0 : 0.0});
  json j = {{"N", cfg.N}, {"step", cfg.tau_step}, {"steps", tr.steps.size()}};
  j["tau_star"] = opt_json(tr.tau_star);
  if (tr.tau_star_bracket)
    j["tau_star_bracket"] = {tr.tau_star_bracket->first, tr.tau_star_bracket->second};
  else
    j["tau_star_bracket"] = nullptr;
  return j;
}

json cmd_pulse(const RunConfig& cfg) {
  PulseParams pp = cfg.pulse();
  PulseRun r = pulse_from_config(cfg, cfg.tau, pp);
  const PulseSolution& p = r.pulse;
  auto [lo, hi] = pulse_window(p);
  CsvWriter prof(path_of(cfg, "pulse.csv"), {"z", "U", "Q"});
  CsvWriter phase(path_of(cfg, "phase.csv"), {"U", "Q"});
  for (int i = 0; i <= 4000; ++i) {
    double z = lo + (hi - lo) * i / 4000;
    PulseValue v = eval_pulse(p, z);
    prof.row({z, v.U, v.Q});
    phase.row({v.U, v.Q});
  }
  CsvWriter sing(path_of(cfg, "singular.csv"), {"U", "Q"});
  for (int i = 0; i <= 400; ++i) sing.row({eval_front(r.front, -20.0 + 40.0 * i / 400), 0.0});
  for (const auto& s : r.orbit.slow_right) sing.row({s.U, s.Q});
  for (int i = 0; i <= 400; ++i)
    sing.row({eval_back(r.orbit, -20.0 + 40.0 * i / 400), r.orbit.Q_takeoff});
  for (const auto& s : r.orbit.slow_left) sing.row({s.U, s.Q});

  LocallyExcitedReport le = check_locally_excited(p);
  return {{"tau", cfg.tau},
          {"N", p.disc.N},
          {"epsilon", pp.epsilon},
          {"gamma", pp.gamma},
          {"mu", p.mu},
          {"mu_front", r.front.mu},
          {"relative_speed_gap", std::abs(p.mu - r.front.mu) / r.front.mu},
          {"residual_norm", p.residual_norm},
          {"locally_excited", le.holds},
          {"etas", p.etas},
          {"kappas", p.kappas},
          {"phase_distance", phase_plane_distance(p, r.orbit)}};
}

json zeros_json(const std::vector<EvansZero>& zs) {
  json a = json::array();
  for (const auto& z : zs)
    a.push_back({{"re", z.lambda.real()},
                 {"im", z.lambda.imag()},
                 {"abs_E", z.abs_value},
                 {"origin", z.is_origin}});
  return a;
}

json cmd_evans(const RunConfig& cfg) {
  FrontSolution f = front_from_config(cfg, cfg.tau);
  EvansContext ctx = EvansContext::from_front(f);
  OriginCheck oc = verify_zero_at_origin(ctx);
  EvansScan sc = scan(ctx, cfg.scan());
  CsvWriter csv(path_of(cfg, "evans_grid.csv"), {"re", "im", "abs_E", "re_E", "im_E"});
  for (std::size_t i = 0; i < sc.grid.size(); ++i)
    csv.row({sc.grid[i].real(), sc.grid[i].imag(), std::abs(sc.values[i]), sc.values[i].real(),
             sc.values[i].imag()});
  return {{"tau", cfg.tau},
          {"N", f.disc.N},
          {"zeros", zeros_json(sc.zeros)},
          {"origin_simple", oc.simple},
          {"origin_abs_E", std::abs(oc.value)},
          {"origin_abs_dE", std::abs(oc.derivative)},
          {"essential_re", essential_spectrum(ctx)},
          {"verdict", to_string(stability_verdict(oc, sc))}};
}

json cmd_simulate(const RunConfig& cfg) {
  SimConfig sc = cfg.sim();
  std::optional<double> solver_mu;
  SimState s0;
  const double x0 = cfg.x0;
  auto grid_of = [](const SimConfig& c) {
    bool per = c.boundary == Boundary::Periodic;
    double h = per ? 2.0 * c.L / c.n : 2.0 * c.L / (c.n - 1);
    std::vector<double> x(c.n);
    for (int i = 0; i < c.n; ++i) x[i] = -c.L + i * h;
    return x;
  };
  Discretization disc = cfg.tau > 0.0 ? discretize(cfg.rate(), cfg.N, cfg.spacing)
                                      : heaviside_discretization();
  switch (cfg.initial) {
    case InitialCondition::SolverFront: {
      FrontSolution f = front_from_config(cfg, cfg.tau);
      disc = f.disc;
      solver_mu = f.mu;
      for (double x : grid_of(sc)) s0.u.push_back(eval_front(f, x - x0));
      break;
    }
    case InitialCondition::SolverPulse: {
      PulseRun r = pulse_from_config(cfg, cfg.tau, cfg.pulse());
      disc = r.pulse.disc;
      solver_mu = r.pulse.mu;
      sc.epsilon = cfg.epsilon;
      sc.gamma = cfg.gamma;
      sc.right_state = 0.0;
      for (double x : grid_of(sc)) {
        PulseValue v = eval_pulse(r.pulse, x - x0);
        s0.u.push_back(v.U);
        s0.q.push_back(v.Q);
      }
      break;
    }
    case InitialCondition::StepFunction:
      for (double x : grid_of(sc)) s0.u.push_back(x >= x0 ? 1.0 : 0.0);
      break;
    case InitialCondition::File: {
      auto rows = read_profile(cfg.initial_file);
      if (static_cast<int>(rows.size()) != cfg.n)
        throw SolverError(ErrorCode::InvalidArgument, "initial file must have one row per grid point");
      for (const auto& row : rows) {
        if (row.size() < 2) throw SolverError(ErrorCode::InvalidArgument, "initial file needs x,u[,q]");
        s0.u.push_back(row[1]);
        if (row.size() > 2) s0.q.push_back(row[2]);
      }
      if (!s0.q.empty()) {
        sc.epsilon = cfg.epsilon;
        sc.gamma = cfg.gamma;
      }
      sc.left_state = s0.u.front();
      sc.right_state = s0.u.back();
      break;
    }
  }
  sc.rate = cfg.sim_staircase ? SimRate::staircase(disc, cfg.theta) : SimRate::smooth(cfg.rate());
  Simulator sim(sc);
  SimRecord rec = run_simulation(sim, s0, cfg.T, cfg.snapshot_every);

  CsvWriter snaps(path_of(cfg, "snapshots.csv"), {"t", "x", "u", "q"});
  std::vector<SimState> shots = rec.snapshots;
  if (shots.empty() || shots.back().t != rec.final_state.t) shots.push_back(rec.final_state);
  for (const auto& st : shots)
    for (std::size_t i = 0; i < st.u.size(); ++i)
      snaps.row({st.t, sim.x()[i], st.u[i], st.q.empty() ? 0.0 : st.q[i]});
  CsvWriter cross(path_of(cfg, "crossings.csv"), {"t", "x"});
  for (std::size_t i = 0; i < rec.times.size(); ++i) cross.row({rec.times[i], rec.positions[i]});

  json j = {{"initial", to_string(cfg.initial)},
            {"rate", cfg.sim_staircase ? "staircase" : "smooth"},
            {"n", cfg.n},
            {"L", cfg.L},
            {"dt", cfg.dt},
            {"T", cfg.T},
            {"crossings", rec.times.size()}};
  j["solver_mu"] = opt_json(solver_mu);
  try {
    SpeedEstimate est = measure_speed(rec.times, rec.positions);
    j["speed"] = est.speed;
    j["r_squared"] = est.r_squared;
    j["window"] = {est.t_start, est.t_end};
    j["relative_error"] = solver_mu ? json(std::abs(est.speed - *solver_mu) / *solver_mu) : json(nullptr);
    j["speed_error"] = nullptr;
  } catch (const SolverError& e) {
    j["speed"] = nullptr;
    j["r_squared"] = nullptr;
    j["window"] = nullptr;
    j["relative_error"] = nullptr;
    j["speed_error"] = e.what();
  }
  if (cfg.probe_amplitude != 0.0 && cfg.initial != InitialCondition::StepFunction) {
    ProbeResult pr = stability_probe(sim, s0, cfg.probe_amplitude, cfg.T, x0);
    j["probe"] = {{"amplitude", cfg.probe_amplitude},
                  {"stable", pr.stable},
                  {"initial_distance", pr.initial_distance},
                  {"final_distance", pr.final_distance},
                  {"outcome", to_string(pr.outcome)}};
  } else {
    j["probe"] = nullptr;
  }
  return j;
}

json cmd_reproduce(const RunConfig& cfg) {
  KernelParams k = cfg.kernel();
  RateSpec rate = cfg.rate();
  SigmaConstants ends = compute_sigmas(k, 0.0, 1.0);
  SigmaConstants s = compute_sigmas(k, cfg.theta, cfg.theta);
  double t0 = tau_zero(rate);

  ContinuationOptions opt;
  opt.N = cfg.N;
  opt.tau_max = std::min(cfg.tau_max, t0);
  opt.step = cfg.tau_step;
  opt.spacing = cfg.spacing;
  ContinuationTrace tr = continue_in_tau(k, rate, opt);
  const ContinuationStep* last_ok = nullptr;
  for (const auto& st : tr.steps)
    if (st.h1.holds) last_ok = &st;

  json evans = nullptr;
  if (last_ok) {
    EvansContext ctx = EvansContext::from_front(last_ok->front);
    OriginCheck oc = verify_zero_at_origin(ctx);
    EvansScan sc = scan(ctx, cfg.scan());
    evans = {{"tau", last_ok->tau},
             {"verdict", to_string(stability_verdict(oc, sc))},
             {"origin_simple", oc.simple},
             {"zeros", zeros_json(sc.zeros)}};
  }

  RunConfig pc = cfg;
  pc.seed_policy = SeedPolicy::Continuation;
  PulseRun pr = pulse_from_config(pc, kPulseTau, cfg.pulse());

  json computed = {{"sigma1", s.sigma1},
                   {"sigma2_0", opt_json(ends.sigma2)},
                   {"sigma3_1", opt_json(ends.sigma3)},
                   {"tau0", t0},
                   {"tau_star", opt_json(tr.tau_star)},
                   {"evans", evans},
                   {"pulse",
                    {{"tau", kPulseTau},
                     {"mu", pr.pulse.mu},
                     {"mu_front", pr.front.mu},
                     {"residual_norm", pr.pulse.residual_norm},
                     {"locally_excited", check_locally_excited(pr.pulse).holds}}}};
  json published = {{"sigma1", kPubSigma1},
                    {"sigma2_0", kPubSigma2},
                    {"sigma3_1", kPubSigma3},
                    {"tau0", kPubTau0},
                    {"tau_star", kPubTauStar},
                    {"evans_verdict", "stable"}};
  auto diff = [](const std::optional<double>& a, double b) {
    return a ? json(*a - b) : json(nullptr);
  };
  json differences = {{"sigma1", s.sigma1 - kPubSigma1},
                      {"sigma2_0", diff(ends.sigma2, kPubSigma2)},
                      {"sigma3_1", diff(ends.sigma3, kPubSigma3)},
                      {"tau0", t0 - kPubTau0},
                      {"tau_star", diff(tr.tau_star, kPubTauStar)}};
  return {{"computed", computed}, {"published", published}, {"differences", differences}};
}

using Handler = json (*)(const RunConfig&);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h = {
      {"kernel", cmd_kernel},     {"fixed-points", cmd_fixed_points},
      {"front", cmd_front},       {"continue", cmd_continue},
      {"pulse", cmd_pulse},       {"evans", cmd_evans},
      {"simulate", cmd_simulate}, {"reproduce-paper", cmd_reproduce}};
  return h;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"kernel", "fixed-points", "front",    "continue",
                                                 "pulse",  "evans",        "simulate", "reproduce-paper"};
  return names;
}

FrontSolution front_from_config(const RunConfig& cfg, double tau) {
  KernelParams k = cfg.kernel();
  RateSpec rate = cfg.rate().with_tau(tau);
  switch (cfg.seed_policy) {
    case SeedPolicy::Heaviside:
      // one Newton solve straight from the Heaviside front
      return front_at_tau(k, rate, cfg.N, std::max(tau, 1e-300), cfg.spacing);
    case SeedPolicy::Continuation:
      return front_at_tau(k, rate, cfg.N, cfg.tau_step, cfg.spacing);
    case SeedPolicy::File: {
      Discretization disc =
          tau > 0.0 ? discretize(rate, cfg.N, cfg.spacing) : heaviside_discretization();
      FrontSolution guess = front_from_file(cfg, disc);
      return solve_front(k, disc, cfg.theta, guess);
    }
  }
  throw SolverError(ErrorCode::InvalidArgument, "unknown seed policy");
}

json run_command(const std::string& name, const RunConfig& cfg) {
  auto it = handlers().find(name);
  if (it == handlers().end()) throw SolverError(ErrorCode::InvalidArgument, "unknown subcommand '" + name + "'");
  ensure_dir(cfg.output_dir);
  json j = it->second(cfg);
  std::string file = name == "reproduce-paper" ? "summary.json" : name + ".json";
  write_json(path_of(cfg, file), j);
  return j;
}

json error_json(const std::exception& e) {
  json err = {{"message", e.what()}};
  if (auto* se = dynamic_cast<const SolverError*>(&e)) {
    err["code"] = std::string(to_string(se->code()));
    err["tau"] = opt_json(se->tau());
    if (auto* ce = dynamic_cast<const ConfigError*>(&e)) err["diagnostics"] = ce->diagnostics();
  } else {
    err["code"] = "Internal";
    err["tau"] = nullptr;
  }
  return {{"error", err}};
}

}  // namespace nfwaves
