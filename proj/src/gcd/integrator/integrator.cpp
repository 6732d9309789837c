#include "gcd/integrator/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "gcd/errors.hpp"

namespace gcd::integrator {

using macro::kNumFree;
using macro::MacroState;
using Vec = Eigen::Matrix<double, kNumFree, 1>;
using Mat = Eigen::Matrix<double, kNumFree, kNumFree>;

void RunConfig::validate() const {
  auto fail = [](const char* key, const char* why) {
    throw ConfigError(key, std::string("invalid run setting '") + key + "': " + why);
  };
  if (!std::isfinite(t_start) || !std::isfinite(t_end)) fail("t_end", "times must be finite");
  if (!(t_end > t_start)) fail("t_end", "must exceed t_start");
  if (!(rtol > 0.0)) fail("rtol", "must be positive");
  if (!(atol > 0.0)) fail("atol", "must be positive");
  if (!(sample_interval > 0.0)) fail("sample_interval", "must be positive");
  if (!(positivity_floor >= 0.0)) fail("positivity_floor", "must be non-negative");
  if (!(convergence_tol > 0.0)) fail("convergence_tol", "must be positive");
  if (max_steps == 0) fail("max_steps", "must be positive");
}

std::string to_string(StopKind k) {
  switch (k) {
    case StopKind::completed: return "completed";
    case StopKind::converged: return "converged";
    case StopKind::positivity_abort: return "positivity_abort";
    case StopKind::solver_abort: return "solver_abort";
  }
  return "unknown";
}

namespace {

using macro::Var;

constexpr std::array<Var, 16> kGuarded = {
    Var::K_f1, Var::K_f2, Var::A_12, Var::A_21, Var::C_a1, Var::C_a2, Var::C_b1, Var::C_b2,
    Var::G_g1, Var::G_g2, Var::L_a1, Var::L_a2, Var::L_b1, Var::L_b2, Var::p_1, Var::p_2};

Vec to_vec(const MacroState& s) { return Eigen::Map<const Vec>(s.values.data()); }

MacroState to_state(const Vec& v) {
  MacroState s;
  Eigen::Map<Vec>(s.values.data()) = v;
  return s;
}

/// First guarded quantity at or below the floor, if any.
std::optional<std::string> below_floor(const Vec& y, double floor) {
  for (Var v : kGuarded) {
    if (!(y[macro::idx(v)] > floor)) return std::string(macro::name(v));
  }
  for (Var v : {Var::w_1, Var::w_2}) {
    if (!(y[macro::idx(v)] > floor)) return std::string(macro::name(v));
  }
  if (!(1.0 - y[macro::idx(Var::L_a1)] - y[macro::idx(Var::L_a2)] > floor)) return "leisure_a";
  if (!(1.0 - y[macro::idx(Var::L_b1)] - y[macro::idx(Var::L_b2)] > floor)) return "leisure_b";
  return std::nullopt;
}

struct StageFailure {
  bool domain = false;
  std::string variable;
  std::string what;
};

class Rhs {
 public:
  Rhs(const macro::MacroParams& params, const Schedule& schedule)
      : params_(params), schedule_(schedule) {
    model_ = macro::build_model([this](double t) {
      return apply_schedule(params_, schedule_, t, t >= segment_end_);
    });
  }

  void set_segment_end(double t) { segment_end_ = t; }

  /// Free-variable rates; throws the model's domain/degeneracy errors.
  Vec operator()(double t, const Vec& y) {
    ++evaluations;
    const auto ep = core::ex_post_derivative(model_, std::span<const double>(y.data(), kNumFree), t);
    Vec out;
    for (std::size_t i = 0; i < kNumFree; ++i) {
      if (!std::isfinite(ep.rates[i])) {
        throw DomainError(std::string(macro::kRateNames[i]), "non-finite rate of " +
                                                                 std::string(macro::kRateNames[i]));
      }
      out[static_cast<Eigen::Index>(i)] = ep.rates[i];
    }
    return out;
  }

  /// Like operator() but converts model errors into a failure record.
  std::optional<Vec> try_eval(double t, const Vec& y, StageFailure& fail) {
    try {
      return (*this)(t, y);
    } catch (const DomainError& e) {
      fail = {true, e.variable(), e.what()};
    } catch (const ConstraintDegeneracy& e) {
      fail = {false, "", e.what()};
    }
    return std::nullopt;
  }

  const macro::Model& model() const { return model_; }

  std::size_t evaluations = 0;

 private:
  macro::MacroParams params_;
  const Schedule& schedule_;
  double segment_end_ = std::numeric_limits<double>::infinity();
  macro::Model model_;
};

double wrms(const Vec& err, const Vec& y0, const Vec& y1, double rtol, double atol) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double r = err[i] / sc;
    sum += r * r;
  }
  return std::sqrt(sum / static_cast<double>(err.size()));
}

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

class Stepper {
 public:
  Stepper(Rhs& f, const RunConfig& cfg) : f_(f), cfg_(cfg), window_t_(cfg.t_start) {}

  enum class Outcome { ok, positivity, failure };

  /// Advances from t to `target` exactly, updating y. On failure the state
  /// is left at the last accepted point and `t` reports where it stopped.
  Outcome advance(double& t, Vec& y, double target, IntegratorStats& stats) {
    while (t < target) {
      if (stats.accepted + stats.rejected >= cfg_.max_steps) {
        failure_ = {false, "", "step budget exhausted"};
        return Outcome::failure;
      }
      if (const std::size_t n = stats.accepted + stats.rejected; n >= window_start_ + kStallWindow) {
        if (t - window_t_ < 1e-6 * std::max(1.0, cfg_.t_end - cfg_.t_start)) {
          failure_ = {false, "", "step size collapsed: " + std::to_string(kStallWindow) +
                                     " steps advanced t by " + std::to_string(t - window_t_)};
          return Outcome::failure;
        }
        window_start_ = n;
        window_t_ = t;
      }
      if (!have_k1_) {
        auto k = f_.try_eval(t, y, failure_);
        if (!k) return failure_.domain ? Outcome::positivity : Outcome::failure;
        k1_ = *k;
        have_k1_ = true;
        if (h_ <= 0.0) h_ = initial_step(t, y);
      }
      const double remaining = target - t;
      const bool clamp = h_ >= remaining * (1.0 - 1e-12);
      const double h = clamp ? remaining : h_;
      const double hmin = 1e-14 * std::max(1.0, std::abs(t));
      if (h < hmin) return underflow();

      const bool accepted = implicit_ ? bdf_step(t, y, h, clamp, target, stats)
                                      : rk_step(t, y, h, clamp, target, stats);
      if (!accepted) continue;
      if (auto v = below_floor(y, cfg_.positivity_floor)) {
        failure_ = {true, *v, *v + " fell to the positivity floor"};
        return Outcome::positivity;
      }
    }
    return Outcome::ok;
  }

  /// Discards history (FSAL stage, multistep memory) at a discontinuity.
  void restart() {
    have_k1_ = false;
    have_prev_ = false;
    implicit_ = false;
    stiff_count_ = 0;
    nonstiff_count_ = 0;
  }

  const StageFailure& failure() const { return failure_; }

 private:
  Outcome underflow() {
    if (failure_.what.empty()) failure_ = {false, "", "step size underflow"};
    else failure_.what = "step size underflow after: " + failure_.what;
    return failure_.domain ? Outcome::positivity : Outcome::failure;
  }

  double initial_step(double t, const Vec& y) {
    const double d0 = wrms(y, y, y, cfg_.rtol, cfg_.atol);
    const double d1 = wrms(k1_, y, y, cfg_.rtol, cfg_.atol);
    double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h = std::min(h, cfg_.sample_interval);
    (void)t;
    return std::max(h, 1e-10);
  }

  void remember(double t, const Vec& y, const Vec& f) {
    t_prev_ = t;
    y_prev_ = y;
    f_prev_ = f;
    have_prev_ = true;
  }

  bool reject(double h, double factor, IntegratorStats& stats) {
    ++stats.rejected;
    h_ = h * factor;
    if (++consecutive_rejects_ >= 10 && !implicit_ && !failure_.domain && have_prev_) {
      switch_to_implicit(stats);
    }
    return false;
  }

  void switch_to_implicit(IntegratorStats& stats) {
    if (!cfg_.allow_implicit) return;
    implicit_ = true;
    jac_valid_ = false;
    ++stats.stiffness_switches;
  }

  bool rk_step(double& t, Vec& y, double h, bool clamp, double target, IntegratorStats& stats) {
    failure_ = {};
    auto stage = [&](double tt, const Vec& yy) { return f_.try_eval(tt, yy, failure_); };
    const auto k2 = stage(t + c2 * h, y + h * a21 * k1_);
    if (!k2) return reject(h, 0.25, stats);
    const auto k3 = stage(t + c3 * h, y + h * (a31 * k1_ + a32 * *k2));
    if (!k3) return reject(h, 0.25, stats);
    const auto k4 = stage(t + c4 * h, y + h * (a41 * k1_ + a42 * *k2 + a43 * *k3));
    if (!k4) return reject(h, 0.25, stats);
    const auto k5 = stage(t + c5 * h, y + h * (a51 * k1_ + a52 * *k2 + a53 * *k3 + a54 * *k4));
    if (!k5) return reject(h, 0.25, stats);
    const Vec y6 = y + h * (a61 * k1_ + a62 * *k2 + a63 * *k3 + a64 * *k4 + a65 * *k5);
    const double t_new = clamp ? target : t + h;
    const auto k6 = stage(t_new, y6);
    if (!k6) return reject(h, 0.25, stats);
    const Vec y_new = y + h * (a71 * k1_ + a73 * *k3 + a74 * *k4 + a75 * *k5 + a76 * *k6);
    const auto k7 = stage(t_new, y_new);
    if (!k7) return reject(h, 0.25, stats);

    const Vec err = h * (e1 * k1_ + e3 * *k3 + e4 * *k4 + e5 * *k5 + e6 * *k6 + e7 * *k7);
    const double en = wrms(err, y, y_new, cfg_.rtol, cfg_.atol);
    if (!std::isfinite(en)) return reject(h, 0.25, stats);
    if (en > 1.0) return reject(h, std::max(0.2, 0.9 * std::pow(en, -0.2)), stats);

    consecutive_rejects_ = 0;
    ++stats.accepted;
    // Hairer's stiffness test on the last two stages
    const double den = (y_new - y6).squaredNorm();
    if (den > 0.0) {
      const double hlamb = h * std::sqrt((*k7 - *k6).squaredNorm() / den);
      if (hlamb > 3.25) {
        nonstiff_count_ = 0;
        ++stiff_count_;
      } else if (++nonstiff_count_ == 6) {
        stiff_count_ = 0;
      }
    }
    remember(t, y, k1_);
    y = y_new;
    t = t_new;
    k1_ = *k7;
    h_prev_ = h;
    const double grow = en > 0.0 ? std::min(5.0, 0.9 * std::pow(en, -0.2)) : 5.0;
    if (!clamp || h * grow > h_) h_ = h * grow;
    if (stiff_count_ >= 15) switch_to_implicit(stats);
    return true;
  }

  bool refresh_jacobian(double t, const Vec& y) {
    for (Eigen::Index j = 0; j < y.size(); ++j) {
      Vec yp = y;
      const double dj = 1e-7 * std::max(1.0, std::abs(y[j]));
      yp[j] += dj;
      auto fp = f_.try_eval(t, yp, failure_);
      if (!fp) return false;
      jac_.col(j) = (*fp - k1_) / dj;
    }
    jac_valid_ = true;
    return true;
  }

  // variable-step BDF2 with simplified Newton iteration
  bool bdf_step(double& t, Vec& y, double h, bool clamp, double target, IntegratorStats& stats) {
    failure_ = {};
    if (!have_prev_) {
      implicit_ = false;
      return false;
    }
    if (!jac_valid_ && !refresh_jacobian(t, y)) return reject(h, 0.25, stats);
    const double hp = h_prev_;
    const double w = h / hp;
    const double a1 = (1 + w) * (1 + w) / (1 + 2 * w);
    const double a2 = -w * w / (1 + 2 * w);
    const double beta = (1 + w) / (1 + 2 * w);
    const double t_new = clamp ? target : t + h;

    const Vec base = a1 * y + a2 * y_prev_;
    Vec z = y + h * k1_;
    const Mat iter = Mat::Identity() - beta * h * jac_;
    Eigen::PartialPivLU<Mat> lu(iter);
    bool converged = false;
    Vec fz;
    for (int it = 0; it < 8; ++it) {
      auto fe = f_.try_eval(t_new, z, failure_);
      if (!fe) break;
      fz = *fe;
      const Vec g = z - base - beta * h * fz;
      const Vec dz = lu.solve(-g);
      z += dz;
      if (wrms(dz, y, z, cfg_.rtol, cfg_.atol) < 1e-3) {
        auto fe2 = f_.try_eval(t_new, z, failure_);
        if (!fe2) break;
        fz = *fe2;
        converged = true;
        break;
      }
    }
    if (!converged) {
      jac_valid_ = false;
      return reject(h, 0.5, stats);
    }
    // local error from the third derivative via divided differences of f
    const double hsum = h + hp;
    const Vec dd = ((fz - k1_) / h - (k1_ - f_prev_) / hp) / hsum;
    const double alpha0 = 1.0 / h + 1.0 / hsum;
    const Vec lte = (2.0 * dd / 6.0) * h * hsum / alpha0;
    const double en = wrms(lte, y, z, cfg_.rtol, cfg_.atol);
    if (!std::isfinite(en)) return reject(h, 0.25, stats);
    if (en > 1.0) return reject(h, std::max(0.2, 0.9 * std::pow(en, -1.0 / 3.0)), stats);

    consecutive_rejects_ = 0;
    ++stats.accepted;
    ++stats.implicit_steps;
    remember(t, y, k1_);
    y = z;
    t = t_new;
    k1_ = fz;
    h_prev_ = h;
    const double grow = en > 0.0 ? std::min(2.0, 0.9 * std::pow(en, -1.0 / 3.0)) : 2.0;
    if (!clamp || h * grow > h_) h_ = h * grow;
    if (++implicit_age_ % 50 == 0) jac_valid_ = false;
    return true;
  }

  Rhs& f_;
  const RunConfig& cfg_;
  static constexpr std::size_t kStallWindow = 10000;
  std::size_t window_start_ = 0;
  double window_t_ = 0.0;
  Vec k1_;
  bool have_k1_ = false;
  double h_ = 0.0;
  double h_prev_ = 0.0;
  double t_prev_ = 0.0;
  Vec y_prev_, f_prev_;
  bool have_prev_ = false;
  bool implicit_ = false;
  bool jac_valid_ = false;
  Mat jac_;
  std::size_t implicit_age_ = 0;
  int stiff_count_ = 0;
  int nonstiff_count_ = 0;
  int consecutive_rejects_ = 0;
  StageFailure failure_;
};

Sample make_sample(const Rhs& f, const macro::MacroParams& params, const Schedule& schedule,
                   double t, const Vec& y) {
  Sample s;
  s.t = t;
  s.x = to_state(y);
  const auto p = apply_schedule(params, schedule, t);
  s.ev = macro::evaluate(f.model(), s.x, t);
  s.d = macro::dependents(s.x, p);
  s.u = macro::utilities(s.x, p, s.ev);
  return s;
}

}  // namespace

Trajectory integrate(const macro::MacroParams& params, const Schedule& schedule,
                     const MacroState& x0, const RunConfig& config) {
  config.validate();
  schedule.validate();
  macro::validate(params);
  if (auto bad = macro::validate_state(x0, params); !bad.empty()) {
    throw ConfigError("initial", "infeasible initial state: " + bad.front());
  }

  Trajectory traj;
  Rhs f(params, schedule);

  // sample times, with breakpoints as additional integration boundaries
  std::vector<double> samples;
  const auto n = static_cast<std::size_t>(
      std::floor((config.t_end - config.t_start) / config.sample_interval + 1e-9));
  for (std::size_t k = 0; k <= n; ++k) {
    samples.push_back(config.t_start + static_cast<double>(k) * config.sample_interval);
  }
  if (config.t_end - samples.back() > 1e-9 * config.sample_interval) samples.push_back(config.t_end);
  else samples.back() = config.t_end;

  std::vector<double> breaks;
  for (double b : schedule.times()) {
    if (b > config.t_start && b < config.t_end) breaks.push_back(b);
  }

  Stepper stepper(f, config);
  double t = config.t_start;
  Vec y = to_vec(x0);
  traj.samples.push_back(make_sample(f, params, schedule, t, y));

  std::size_t next_break = 0;
  auto finish = [&](Stepper::Outcome o) {
    const auto& fail = stepper.failure();
    traj.stop.time = t;
    traj.stop.variable = fail.variable;
    traj.stop.diagnostic = fail.what;
    traj.stop.kind =
        o == Stepper::Outcome::positivity ? StopKind::positivity_abort : StopKind::solver_abort;
  };

  f.set_segment_end(breaks.empty() ? std::numeric_limits<double>::infinity() : breaks[0]);
  for (std::size_t k = 1; k < samples.size(); ++k) {
    const double ts = samples[k];
    bool failed = false;
    while (t < ts) {
      const bool at_break = next_break < breaks.size() && breaks[next_break] <= ts;
      const double target = at_break ? breaks[next_break] : ts;
      const auto o = stepper.advance(t, y, target, traj.stats);
      if (o != Stepper::Outcome::ok) {
        finish(o);
        failed = true;
        break;
      }
      t = target;
      if (at_break) {
        ++next_break;
        f.set_segment_end(next_break < breaks.size() ? breaks[next_break]
                                                     : std::numeric_limits<double>::infinity());
        stepper.restart();
      }
    }
    if (failed) break;
    try {
      auto s = make_sample(f, params, schedule, ts, y);
      if (!macro::validate_state(s.x, apply_schedule(params, schedule, ts)).empty()) {
        traj.stop = {StopKind::positivity_abort, ts, "", "sampled state left the feasible region"};
        break;
      }
      traj.samples.push_back(std::move(s));
    } catch (const DomainError& e) {
      traj.stop = {StopKind::positivity_abort, ts, e.variable(), e.what()};
      break;
    } catch (const ConstraintDegeneracy& e) {
      traj.stop = {StopKind::solver_abort, ts, "", e.what()};
      break;
    }
  }
  traj.stats.rhs_evaluations = f.evaluations;

  if (!traj.aborted()) {
    traj.stop = {StopKind::completed, traj.samples.back().t, "", ""};
    if (config.reference) {
      if (auto tc = detect_convergence(traj, *config.reference, config.convergence_tol)) {
        traj.stop = {StopKind::converged, *tc, "", ""};
      }
    }
  }
  return traj;
}

double neutral_projected_deviation(const MacroState& x, const MacroState& reference) {
  Vec u, v1, v2;
  const auto l = macro::labor_swap_direction();
  const auto fin = macro::financing_swap_direction();
  for (std::size_t i = 0; i < kNumFree; ++i) {
    const double scale = std::abs(reference.values[i]) > 1e-12 ? std::abs(reference.values[i]) : 1.0;
    const auto k = static_cast<Eigen::Index>(i);
    u[k] = (x.values[i] - reference.values[i]) / scale;
    v1[k] = l[i] / scale;
    v2[k] = fin[i] / scale;
  }
  Eigen::Matrix<double, kNumFree, 2> basis;
  basis.col(0) = v1;
  basis.col(1) = v2;
  const Eigen::HouseholderQR<Eigen::Matrix<double, kNumFree, 2>> qr(basis);
  const Eigen::Matrix<double, kNumFree, 2> q =
      qr.householderQ() * Eigen::Matrix<double, kNumFree, 2>::Identity();
  const Vec r = u - q * (q.transpose() * u);
  return r.cwiseAbs().maxCoeff();
}

std::optional<double> detect_convergence(const Trajectory& traj, const MacroState& reference,
                                         double tol) {
  std::optional<double> since;
  for (const auto& s : traj.samples) {
    if (neutral_projected_deviation(s.x, reference) < tol) {
      if (!since) since = s.t;
    } else {
      since.reset();
    }
  }
  return since;
}

}  // namespace gcd::integrator
