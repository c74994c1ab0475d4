#include "issgf/flow_simulator.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "issgf/errors.h"

namespace issgf {

std::string ToString(IntegratorMethod method) {
  switch (method) {
    case IntegratorMethod::kRk4Fixed: return "rk4-fixed";
    case IntegratorMethod::kRkf45Adaptive: return "rkf45-adaptive";
    case IntegratorMethod::kEulerFixed: return "euler-fixed";
  }
  return "rk4-fixed";
}

IntegratorMethod ParseIntegratorMethod(const std::string& s) {
  for (auto m : {IntegratorMethod::kRk4Fixed, IntegratorMethod::kRkf45Adaptive,
                 IntegratorMethod::kEulerFixed}) {
    if (ToString(m) == s) return m;
  }
  throw InvalidArgument("unknown integrator method '" + s + "'");
}

void IntegratorConfig::Validate() const {
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw InvalidArgument("integrator: t_end must be positive");
  }
  if (!(dt > 0.0) || dt > t_end) {
    throw InvalidArgument("integrator: need 0 < dt <= t_end");
  }
  if (record_stride < 1) {
    throw InvalidArgument("integrator: record_stride must be >= 1");
  }
  if (method == IntegratorMethod::kRkf45Adaptive) {
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0)) {
      throw InvalidArgument("integrator: tolerances must be positive");
    }
    if (!(dt_min > 0.0) || !(dt_max >= dt_min)) {
      throw InvalidArgument("integrator: need 0 < dt_min <= dt_max");
    }
  }
}

namespace {

// z ← z + h·f, blockwise.
ParamState Axpy(const ParamState& z, double h, const ParamState& f) {
  return {z.P + h * f.P, z.Q + h * f.Q};
}

class Integrand {
 public:
  Integrand(const ProblemSpec& spec, DisturbanceSignal* signal)
      : spec_(spec), signal_(signal) {}

  ParamState operator()(double t, const ParamState& z) const {
    const Matrix r = spec_.target() - z.P * z.Q.transpose();
    auto [U, V] = signal_->Evaluate(t, z);
    return {r * z.Q + U, r.transpose() * z.P + V};
  }

 private:
  const ProblemSpec& spec_;
  DisturbanceSignal* signal_;
};

ParamState Rk4Step(const Integrand& f, double t, const ParamState& z,
                   double h) {
  const ParamState k1 = f(t, z);
  const ParamState k2 = f(t + 0.5 * h, Axpy(z, 0.5 * h, k1));
  const ParamState k3 = f(t + 0.5 * h, Axpy(z, 0.5 * h, k2));
  const ParamState k4 = f(t + h, Axpy(z, h, k3));
  return {z.P + (h / 6.0) * (k1.P + 2.0 * k2.P + 2.0 * k3.P + k4.P),
          z.Q + (h / 6.0) * (k1.Q + 2.0 * k2.Q + 2.0 * k3.Q + k4.Q)};
}

// Runge-Kutta-Fehlberg 4(5). Returns the fourth-order solution and writes the
// scaled error norm.
ParamState Rkf45Step(const Integrand& f, double t, const ParamState& z,
                     double h, double abs_tol, double rel_tol,
                     double* err_norm) {
  auto combo = [&](std::initializer_list<std::pair<double, const ParamState*>>
                       terms) {
    ParamState out = z;
    for (const auto& [c, k] : terms) {
      out.P += h * c * k->P;
      out.Q += h * c * k->Q;
    }
    return out;
  };
  const ParamState k1 = f(t, z);
  const ParamState k2 = f(t + h / 4.0, combo({{1.0 / 4.0, &k1}}));
  const ParamState k3 =
      f(t + 3.0 * h / 8.0, combo({{3.0 / 32.0, &k1}, {9.0 / 32.0, &k2}}));
  const ParamState k4 =
      f(t + 12.0 * h / 13.0, combo({{1932.0 / 2197.0, &k1},
                                    {-7200.0 / 2197.0, &k2},
                                    {7296.0 / 2197.0, &k3}}));
  const ParamState k5 = f(t + h, combo({{439.0 / 216.0, &k1},
                                        {-8.0, &k2},
                                        {3680.0 / 513.0, &k3},
                                        {-845.0 / 4104.0, &k4}}));
  const ParamState k6 = f(t + h / 2.0, combo({{-8.0 / 27.0, &k1},
                                              {2.0, &k2},
                                              {-3544.0 / 2565.0, &k3},
                                              {1859.0 / 4104.0, &k4},
                                              {-11.0 / 40.0, &k5}}));
  const ParamState y4 = combo({{25.0 / 216.0, &k1},
                               {1408.0 / 2565.0, &k3},
                               {2197.0 / 4104.0, &k4},
                               {-1.0 / 5.0, &k5}});
  const ParamState y5 = combo({{16.0 / 135.0, &k1},
                               {6656.0 / 12825.0, &k3},
                               {28561.0 / 56430.0, &k4},
                               {-9.0 / 50.0, &k5},
                               {2.0 / 55.0, &k6}});
  const Vector a = y4.Stacked();
  const Vector b = y5.Stacked();
  const Vector z0 = z.Stacked();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double scale =
        abs_tol + rel_tol * std::max(std::abs(z0(i)), std::abs(a(i)));
    worst = std::max(worst, std::abs(a(i) - b(i)) / scale);
  }
  *err_norm = worst;
  return y4;
}

class Recorder {
 public:
  Recorder(const ProblemSpec& spec, Trajectory* traj)
      : spec_(spec), traj_(traj), scalar_(spec.n() == 1 && spec.m() == 1) {}

  void Record(double t, const ParamState& z, const Matrix& U,
              const Matrix& V) {
    auto& mon = traj_->monitors;
    traj_->times.push_back(t);
    traj_->states.push_back(z);
    const DissipationBound b = EvaluateDissipationBound(spec_, z, U, V);
    const ParamState f = GradientField(spec_, z);
    mon.loss.push_back(Loss(spec_, z));
    mon.sigma_min_P.push_back(b.sigma_min_P);
    mon.sigma_min_Q.push_back(b.sigma_min_Q);
    mon.lhs.push_back(b.lhs);
    mon.rhs.push_back(b.rhs);
    mon.dist_norm.push_back(DisturbanceNorm(NormKind::kFrobeniusJoint, U, V));
    mon.dist_declared_norm.push_back(
        DisturbanceNorm(traj_->disturbance.norm, U, V));
    mon.field_norm.push_back(std::sqrt(f.P.squaredNorm() + f.Q.squaredNorm()));
    if (scalar_) mon.sum_norm_sq.push_back((z.P + z.Q).squaredNorm());
  }

 private:
  const ProblemSpec& spec_;
  Trajectory* traj_;
  bool scalar_;
};

double FieldNorm(const ProblemSpec& spec, const ParamState& z) {
  const ParamState f = GradientField(spec, z);
  return std::sqrt(f.P.squaredNorm() + f.Q.squaredNorm());
}

bool Diverged(const ParamState& z) {
  const double norm = z.Norm();
  return !std::isfinite(norm) || norm > kDivergenceNorm;
}

}  // namespace

Trajectory Simulate(const ProblemSpec& spec, const ParamState& init,
                    const DisturbanceSpec& dist, const IntegratorConfig& cfg) {
  RequireConformant(spec, init, "initial state");
  cfg.Validate();
  DisturbanceSignal signal(dist, spec);
  Integrand f(spec, &signal);

  Trajectory traj;
  traj.target = spec.target();
  traj.k = spec.k();
  traj.disturbance = dist;
  traj.integrator = cfg;
  Recorder recorder(spec, &traj);

  ParamState z = init;
  double t = 0.0;
  int consecutive_small = 0;
  long step = 0;
  double h = cfg.dt;
  const bool adaptive = cfg.method == IntegratorMethod::kRkf45Adaptive;
  // Fixed-step runs take round(t_end / dt) steps when dt divides t_end up to
  // rounding, otherwise the last step is shortened.
  const double ratio = cfg.t_end / cfg.dt;
  const long fixed_steps = std::abs(ratio - std::round(ratio)) < 1e-9 * ratio
                               ? static_cast<long>(std::llround(ratio))
                               : static_cast<long>(std::ceil(ratio));

  auto done = [&] {
    return adaptive ? t >= cfg.t_end : step >= fixed_steps;
  };

  while (!done()) {
    signal.BeginStep();
    if (step % cfg.record_stride == 0) {
      auto [U, V] = signal.Evaluate(t, z);
      recorder.Record(t, z, U, V);
    }
    ParamState next;
    double t_next = 0.0;
    if (!adaptive) {
      t_next = (step + 1 == fixed_steps) ? cfg.t_end : (step + 1) * cfg.dt;
      const double hs = t_next - t;
      next = cfg.method == IntegratorMethod::kRk4Fixed
                 ? Rk4Step(f, t, z, hs)
                 : Axpy(z, hs, f(t, z));
    } else {
      while (true) {
        h = std::min({h, cfg.dt_max, cfg.t_end - t});
        double err = 0.0;
        next = Rkf45Step(f, t, z, h, cfg.abs_tol, cfg.rel_tol, &err);
        const bool finite = std::isfinite(err);
        if (finite && err <= 1.0) {
          t_next = (cfg.t_end - t - h <= 1e-12 * cfg.t_end) ? cfg.t_end : t + h;
          const double grow =
              err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
          h *= grow;
          break;
        }
        h *= finite ? std::clamp(0.9 * std::pow(err, -0.25), 0.1, 0.5) : 0.1;
        if (h < cfg.dt_min) {
          std::ostringstream os;
          os << "adaptive step fell below dt_min=" << cfg.dt_min << " at t="
             << t;
          throw StiffnessError(os.str(), t);
        }
      }
    }
    if (Diverged(next)) {
      std::ostringstream os;
      os << "state norm exceeded " << kDivergenceNorm << " at t=" << t_next;
      throw DivergenceError(os.str(), std::move(traj), t_next);
    }
    z = std::move(next);
    t = t_next;
    ++step;
    if (FieldNorm(spec, z) <= kConvergedFieldNorm) {
      if (++consecutive_small == kConvergedSteps && !traj.converged_at) {
        traj.converged_at = t;
      }
    } else {
      consecutive_small = 0;
    }
  }
  signal.BeginStep();
  auto [U, V] = signal.Evaluate(t, z);
  recorder.Record(t, z, U, V);
  return traj;
}

LossMonitorReport LossMonitorCheck(const Trajectory& traj) {
  LossMonitorReport report;
  const auto& lhs = traj.monitors.lhs;
  const auto& rhs = traj.monitors.rhs;
  report.max_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    const double excess = lhs[i] - rhs[i];
    report.max_excess = std::max(report.max_excess, excess);
    if (lhs[i] > rhs[i] + 1e-9 * std::max(1.0, std::abs(rhs[i]))) {
      ++report.violations;
    }
  }
  if (lhs.empty()) report.max_excess = 0.0;
  return report;
}

UltimateBoundReport UltimateBoundCheck(const Trajectory& traj, double alpha) {
  if (traj.n() != 1 || traj.m() != 1) {
    throw InvalidArgument("UltimateBoundCheck requires n = m = 1");
  }
  if (!(alpha > 0.0)) {
    throw InvalidArgument("UltimateBoundCheck requires alpha > 0");
  }
  if (traj.size() == 0) throw InvalidArgument("UltimateBoundCheck: empty");
  const double alpha2 = alpha * alpha;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double s = (traj.states[i].P + traj.states[i].Q).squaredNorm();
    if (s < alpha2 - 1e-9) {
      std::ostringstream os;
      os << "trajectory left the safe set at t=" << traj.times[i]
         << " (|P+Q|^2=" << s << " < alpha^2=" << alpha2 << ")";
      throw PreconditionViolated(os.str(), s - alpha2);
    }
  }
  UltimateBoundReport report;
  double sup_w2 = 0.0;
  for (double w : traj.monitors.dist_norm) sup_w2 = std::max(sup_w2, w * w);
  report.predicted_limit = sup_w2 / alpha2;
  const double t0 = traj.times.front();
  const double t1 = traj.times.back();
  const double tail_start = t0 + 0.9 * (t1 - t0);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.times[i] >= tail_start) {
      report.observed_tail_max =
          std::max(report.observed_tail_max, traj.monitors.loss[i]);
    }
  }
  // The floor absorbs rounding in the loss itself; without it a zero
  // disturbance would demand an exactly zero tail.
  const double floor = 1e-12 * (1.0 + traj.target.squaredNorm());
  report.satisfied =
      report.observed_tail_max <= report.predicted_limit * 1.05 + floor;
  return report;
}

std::string ToString(FlowOutcome outcome) {
  switch (outcome) {
    case FlowOutcome::kConvergedToTarget: return "converged to target";
    case FlowOutcome::kConvergedToSaddle: return "converged to saddle";
    case FlowOutcome::kNotConverged: return "not converged";
  }
  return "not converged";
}

FlowOutcome ClassifyOutcome(const Trajectory& traj) {
  if (!traj.converged_at || traj.size() == 0) return FlowOutcome::kNotConverged;
  const double final_loss = traj.monitors.loss.back();
  if (final_loss <= 1e-12 * (1.0 + traj.target.squaredNorm())) {
    return FlowOutcome::kConvergedToTarget;
  }
  return FlowOutcome::kConvergedToSaddle;
}

}  // namespace issgf
