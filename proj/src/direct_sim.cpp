#include "nfwaves/direct_sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "nfwaves/error.hpp"
#include "nfwaves/parallel.hpp"

namespace nfwaves {

namespace {

constexpr double kWeightCut = 1e-12;

// Exact weight int K(m h - y) hat(y) dy for the hat of half-width h, from the
// second difference of the double antiderivative of each mode.
double hat_weight(const KernelParams& k, long m, double h) {
  double w = 0.0;
  long am = std::labs(m);
  for (const ExpMode& md : k.modes()) {
    double c = md.amplitude, s = md.rate;
    if (am == 0) {
      w += 2.0 * c / s + 2.0 * c / (s * s * h) * std::expm1(-s * h);
    } else {
      double sh = std::sinh(0.5 * s * h);
      w += c / (s * s) * std::exp(-s * am * h) * 4.0 * sh * sh / h;
    }
  }
  return w;
}

// sum_{m >= M} weight(m), M >= 1.
double hat_weight_tail(const KernelParams& k, long M, double h) {
  double t = 0.0;
  for (const ExpMode& md : k.modes()) {
    double c = md.amplitude, s = md.rate;
    double sh = std::sinh(0.5 * s * h);
    t += c / (s * s) * 4.0 * sh * sh / h * std::exp(-s * M * h) / -std::expm1(-s * h);
  }
  return t;
}

// Bound on |weight(m)| for |m| >= 1.
double weight_bound(const KernelParams& k, long m, double h) {
  double b = 0.0;
  for (const ExpMode& md : k.modes()) {
    double s = md.rate, sh = std::sinh(0.5 * s * h);
    b += std::abs(md.amplitude) / (s * s) * std::exp(-s * m * h) * 4.0 * sh * sh / h;
  }
  return b;
}

void check_finite(const std::vector<double>& v, double t) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      std::ostringstream os;
      os << "simulation blew up before t = " << t;
      throw SolverError(ErrorCode::NonFinite, os.str());
    }
  }
}

// Catmull-Rom interpolation of samples v on the grid at position xq.
double interp(const std::vector<double>& v, double x0, double h, double xq) {
  double f = (xq - x0) / h;
  long n = static_cast<long>(v.size());
  long i = static_cast<long>(std::floor(f));
  i = std::clamp(i, 0L, n - 2);
  double t = f - i;
  auto at = [&](long j) { return v[std::clamp(j, 0L, n - 1)]; };
  double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
  return p1 + 0.5 * t *
                  (p2 - p0 + t * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 +
                                  t * (3.0 * (p1 - p2) + p3 - p0)));
}

}  // namespace

SimRate SimRate::smooth(const RateSpec& s) {
  SimRate r;
  r.theta_ = s.theta();
  r.smooth_ = s;
  return r;
}

SimRate SimRate::staircase(const Discretization& d, double theta) {
  SimRate r;
  r.theta_ = theta;
  r.stair_ = d;
  return r;
}

double SimRate::operator()(double u) const {
  double v = u - theta_;
  if (std::isnan(v)) return v;  // propagate, step() reports it
  if (stair_) return (*stair_)(v);
  return (*smooth_)(v);
}

void SimConfig::validate() const {
  auto fail = [](const std::string& m) { throw SolverError(ErrorCode::InvalidArgument, m); };
  if (!(L > 0.0) || !std::isfinite(L)) fail("L must be positive");
  if (n < 8) fail("n must be at least 8");
  if (!(dt > 0.0) || dt > 0.25) fail("dt must lie in (0, 0.25]");
  if (!(T > 0.0) || !std::isfinite(T)) fail("T must be positive");
  if (!(epsilon >= 0.0) || !(gamma >= 0.0)) fail("epsilon and gamma must be nonnegative");
  double dx = boundary == Boundary::Periodic ? 2.0 * L / n : 2.0 * L / (n - 1);
  double scale = 1.0 / std::max(kernel.a(), kernel.b());
  if (dx > scale / 20.0) {
    std::ostringstream os;
    os << "grid spacing " << dx << " leaves fewer than 20 points per kernel scale " << scale;
    fail(os.str());
  }
}

Simulator::Simulator(SimConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const int n = cfg_.n;
  const auto& k = cfg_.kernel;
  bool periodic = cfg_.boundary == Boundary::Periodic;
  dx_ = periodic ? 2.0 * cfg_.L / n : 2.0 * cfg_.L / (n - 1);
  x_.resize(n);
  for (int i = 0; i < n; ++i) x_[i] = -cfg_.L + i * dx_;

  long W = 1;
  while (W < 4L * n && weight_bound(k, W + 1, dx_) >= kWeightCut) ++W;

  std::vector<double> table;
  if (periodic) {
    band_ = n - 1;
    std::vector<double> kp(n, 0.0);
    for (long m = -W; m <= W; ++m) {
      double w = hat_weight(k, m, dx_);
      kp[((m % n) + n) % n] += w;
    }
    table.resize(2 * n - 1);
    for (long m = -(n - 1); m <= n - 1; ++m) table[m + n - 1] = kp[((m % n) + n) % n];
  } else {
    band_ = static_cast<int>(std::min<long>(W, n - 1));
    table.resize(2 * band_ + 1);
    for (long m = -band_; m <= band_; ++m) table[m + band_] = hat_weight(k, m, dx_);
    tail_l_.resize(n);
    tail_r_.resize(n);
    for (int i = 0; i < n; ++i) {
      tail_l_[i] = hat_weight_tail(k, i + 1, dx_);
      tail_r_[i] = hat_weight_tail(k, n - i, dx_);
    }
  }
  s_left_ = cfg_.rate(cfg_.left_state);
  s_right_ = cfg_.rate(cfg_.right_state);
  prefix_.assign(table.size() + 1, 0.0L);
  for (std::size_t m = 0; m < table.size(); ++m) prefix_[m + 1] = prefix_[m] + table[m];
}

std::vector<double> Simulator::convolve(const std::vector<double>& s) const {
  const int n = cfg_.n;
  // runs of identical rate values: saturated regions collapse to one run each
  std::vector<int> start;
  std::vector<double> value;
  for (int j = 0; j < n; ++j) {
    if (j == 0 || s[j] != s[j - 1]) {
      start.push_back(j);
      value.push_back(s[j]);
    }
  }
  start.push_back(n);
  const long B = band_;
  std::vector<double> out(n);
  auto row = [&](std::size_t ii) {
    long i = static_cast<long>(ii);
    long double acc = 0.0L;
    for (std::size_t r = 0; r + 1 < start.size(); ++r) {
      if (value[r] == 0.0) continue;
      // sum over j in [a, b] of w(i - j), i.e. m in [i - b, i - a]
      long lo = std::max(i - (start[r + 1] - 1), -B);
      long hi = std::min(i - start[r], B);
      if (lo > hi) continue;
      acc += static_cast<long double>(value[r]) * (prefix_[hi + B + 1] - prefix_[lo + B]);
    }
    double v = static_cast<double>(acc);
    if (cfg_.boundary == Boundary::ClampedLimits) {
      v += s_left_ * tail_l_[ii] + s_right_ * tail_r_[ii];
    }
    out[ii] = v;
  };
  constexpr std::size_t kChunk = 512;
  std::size_t chunks = (n + kChunk - 1) / kChunk;
  parallel_for(chunks, [&](std::size_t c) {
    std::size_t e = std::min<std::size_t>(n, (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < e; ++i) row(i);
  });
  return out;
}

void Simulator::rhs(const std::vector<double>& u, const std::vector<double>& q,
                    std::vector<double>& du, std::vector<double>& dq) const {
  const int n = cfg_.n;
  std::vector<double> s(n);
  for (int i = 0; i < n; ++i) s[i] = cfg_.rate(u[i]);
  du = convolve(s);
  for (int i = 0; i < n; ++i) du[i] -= u[i];
  if (!q.empty()) {
    dq.resize(n);
    for (int i = 0; i < n; ++i) {
      du[i] -= q[i];
      dq[i] = cfg_.epsilon * (u[i] - cfg_.gamma * q[i]);
    }
  } else {
    dq.clear();
  }
}

void Simulator::step(SimState& st) const {
  const int n = cfg_.n;
  if (static_cast<int>(st.u.size()) != n)
    throw SolverError(ErrorCode::InvalidArgument, "state size does not match the grid");
  if (cfg_.epsilon > 0.0 && st.q.empty()) st.q.assign(n, 0.0);
  if (cfg_.epsilon == 0.0) st.q.clear();
  const double h = cfg_.dt;
  bool sys = !st.q.empty();

  std::vector<double> k1u, k1q, k2u, k2q, k3u, k3q, k4u, k4q;
  std::vector<double> tu(n), tq(sys ? n : 0);
  auto stage = [&](const std::vector<double>& ku, const std::vector<double>& kq, double c) {
    for (int i = 0; i < n; ++i) tu[i] = st.u[i] + c * ku[i];
    if (sys)
      for (int i = 0; i < n; ++i) tq[i] = st.q[i] + c * kq[i];
  };
  rhs(st.u, st.q, k1u, k1q);
  stage(k1u, k1q, 0.5 * h);
  rhs(tu, tq, k2u, k2q);
  stage(k2u, k2q, 0.5 * h);
  rhs(tu, tq, k3u, k3q);
  stage(k3u, k3q, h);
  rhs(tu, tq, k4u, k4q);
  for (int i = 0; i < n; ++i) st.u[i] += h / 6.0 * (k1u[i] + 2.0 * (k2u[i] + k3u[i]) + k4u[i]);
  if (sys)
    for (int i = 0; i < n; ++i) st.q[i] += h / 6.0 * (k1q[i] + 2.0 * (k2q[i] + k3q[i]) + k4q[i]);
  st.t += h;
  check_finite(st.u, st.t);
  if (sys) check_finite(st.q, st.t);
}

std::optional<double> Simulator::crossing(const SimState& st) const {
  const double th = cfg_.rate.theta();
  for (std::size_t i = 0; i + 1 < st.u.size(); ++i) {
    double a = st.u[i], b = st.u[i + 1];
    if (a < th && b >= th) return x_[i] + dx_ * (th - a) / (b - a);
  }
  return std::nullopt;
}

SimRecord run_simulation(const Simulator& sim, SimState s0, double T, int snapshot_every) {
  const double dt = sim.config().dt;
  long steps = std::lround(std::ceil(T / dt - 1e-9));
  SimRecord rec;
  check_finite(s0.u, s0.t);
  auto log = [&](const SimState& s) {
    if (auto c = sim.crossing(s)) {
      rec.times.push_back(s.t);
      rec.positions.push_back(*c);
    }
  };
  log(s0);
  if (snapshot_every > 0) rec.snapshots.push_back(s0);
  for (long i = 1; i <= steps; ++i) {
    sim.step(s0);
    log(s0);
    if (snapshot_every > 0 && i % snapshot_every == 0) rec.snapshots.push_back(s0);
  }
  rec.final_state = std::move(s0);
  return rec;
}

SpeedEstimate measure_speed(const std::vector<double>& times, const std::vector<double>& positions,
                            double discard, double min_r2) {
  if (times.size() != positions.size())
    throw SolverError(ErrorCode::InvalidArgument, "times and positions differ in length");
  if (times.size() < 20)
    throw SolverError(ErrorCode::InvalidArgument, "need at least 20 recorded crossings");
  std::size_t first = static_cast<std::size_t>(std::floor(discard * times.size()));
  std::size_t m = times.size() - first;
  double tm = 0.0, xm = 0.0;
  for (std::size_t i = first; i < times.size(); ++i) {
    tm += times[i];
    xm += positions[i];
  }
  tm /= m;
  xm /= m;
  double stt = 0.0, stx = 0.0, sxx = 0.0;
  for (std::size_t i = first; i < times.size(); ++i) {
    double dt = times[i] - tm, dx = positions[i] - xm;
    stt += dt * dt;
    stx += dt * dx;
    sxx += dx * dx;
  }
  if (!(stt > 0.0)) throw SolverError(ErrorCode::InvalidArgument, "crossing times do not vary");
  double slope = stx / stt;
  double ssres = std::max(0.0, sxx - slope * stx);
  // a stationary history is a perfect fit
  double r2 = sxx > 0.0 ? 1.0 - ssres / sxx : 1.0;
  r2 = std::clamp(r2, 0.0, 1.0);
  SpeedEstimate est{-slope, r2, times[first], times.back()};
  if (r2 < min_r2) {
    std::ostringstream os;
    os << "crossing history is not linear (r^2 = " << r2 << ")";
    throw SolverError(ErrorCode::PoorFit, os.str());
  }
  return est;
}

double translate_distance(const Simulator& sim, const std::vector<double>& a,
                          const std::vector<double>& b, double max_shift, int margin) {
  const auto& x = sim.x();
  const double h = sim.dx();
  const long n = static_cast<long>(x.size());
  long skip = std::max<long>(margin, static_cast<long>(std::ceil(max_shift / h)) + 2);
  if (2 * skip >= n) throw SolverError(ErrorCode::InvalidArgument, "shift range exceeds the grid");
  auto dist = [&](double s) {
    double d = 0.0;
    for (long i = skip; i < n - skip; ++i) d = std::max(d, std::abs(a[i] - interp(b, x[0], h, x[i] - s)));
    return d;
  };
  double best = dist(0.0), best_s = 0.0;
  const double step = h / 4.0;
  long ns = static_cast<long>(std::ceil(max_shift / step));
  for (long j = -ns; j <= ns; ++j) {
    double s = j * step;
    double d = dist(s);
    if (d < best) {
      best = d;
      best_s = s;
    }
  }
  // golden-section polish around the best grid shift
  double lo = best_s - step, hi = best_s + step;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = hi - g * (hi - lo), e = lo + g * (hi - lo);
  double fc = dist(c), fe = dist(e);
  for (int it = 0; it < 40; ++it) {
    if (fc < fe) {
      hi = e;
      e = c;
      fe = fc;
      c = hi - g * (hi - lo);
      fc = dist(c);
    } else {
      lo = c;
      c = e;
      fc = fe;
      e = lo + g * (hi - lo);
      fe = dist(e);
    }
  }
  return std::min({best, fc, fe});
}

std::string to_string(ProbeOutcome o) {
  switch (o) {
    case ProbeOutcome::Translate: return "translate";
    case ProbeOutcome::ConstantLow: return "constant_low";
    case ProbeOutcome::ConstantHigh: return "constant_high";
    case ProbeOutcome::Other: return "other";
  }
  return "other";
}

ProbeOutcome classify_outcome(const Simulator& sim, const SimState& st,
                              const SimState& reference, double tol) {
  auto [mn, mx] = std::minmax_element(st.u.begin(), st.u.end());
  if (*mx - *mn < tol) {
    return 0.5 * (*mn + *mx) < sim.config().rate.theta() ? ProbeOutcome::ConstantLow
                                                          : ProbeOutcome::ConstantHigh;
  }
  // compare the neighbourhood of the leftmost crossing, aligned by position
  auto xa = sim.crossing(st), xb = sim.crossing(reference);
  if (!xa || !xb) return ProbeOutcome::Other;
  const auto& x = sim.x();
  const double h = sim.dx(), shift = *xa - *xb, window = 10.0;
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (std::abs(x[i] - *xa) > window) continue;
    double xr = x[i] - shift;
    if (xr < x.front() || xr > x.back()) return ProbeOutcome::Other;
    d = std::max(d, std::abs(st.u[i] - interp(reference.u, x[0], h, xr)));
  }
  return d < 50.0 * tol ? ProbeOutcome::Translate : ProbeOutcome::Other;
}

ProbeResult stability_probe(const Simulator& sim, const SimState& base, double amplitude, double T,
                            double center, double width) {
  if (!(std::abs(amplitude) <= 0.05))
    throw SolverError(ErrorCode::InvalidArgument, "perturbation amplitude must not exceed 0.05");
  if (!(width > 0.0)) throw SolverError(ErrorCode::InvalidArgument, "width must be positive");
  ProbeResult res;
  if (amplitude == 0.0) {
    res.stable = true;
    res.outcome = ProbeOutcome::Translate;
    return res;
  }
  const auto& x = sim.x();
  SimState pert = base;
  double sup = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double r = (x[i] - center) / width;
    if (std::abs(r) < 1.0) {
      double c = std::cos(0.5 * M_PI * r);
      pert.u[i] += amplitude * c * c;
      sup = std::max(sup, std::abs(amplitude * c * c));
    }
  }
  res.initial_distance = sup;
  SimRecord ref = run_simulation(sim, base, T);
  SimRecord run = run_simulation(sim, pert, T);
  res.final_distance = translate_distance(sim, run.final_state.u, ref.final_state.u);
  res.stable = res.final_distance < 0.1 * res.initial_distance;
  res.outcome = classify_outcome(sim, run.final_state, ref.final_state);
  return res;
}

}  // namespace nfwaves
