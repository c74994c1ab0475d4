#pragma once

/// @file
/// Time integration of the disturbed gradient flow
///   Ṗ = (Ȳ − PQᵀ)Q + U(t),  Q̇ = (Ȳ − PQᵀ)ᵀP + V(t)
/// with monitor channels recorded along the way.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "issgf/disturbance.h"
#include "issgf/regression_model.h"

namespace issgf {

enum class IntegratorMethod { kRk4Fixed, kRkf45Adaptive, kEulerFixed };

std::string ToString(IntegratorMethod method);
IntegratorMethod ParseIntegratorMethod(const std::string& s);

struct IntegratorConfig {
  IntegratorMethod method = IntegratorMethod::kRk4Fixed;
  /// Fixed step, or the initial step of the adaptive method.
  double dt = 1e-3;
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double dt_min = 1e-12;
  double dt_max = 0.1;
  double t_end = 50.0;
  /// Record every `record_stride`-th step (the first and last are always kept).
  int record_stride = 1;

  void Validate() const;
};

/// Monitor channels, one entry per recorded time.
struct MonitorChannels {
  std::vector<double> loss;
  std::vector<double> sigma_min_P;
  std::vector<double> sigma_min_Q;
  /// Exact L̇ and the dissipation-inequality right side.
  std::vector<double> lhs;
  std::vector<double> rhs;
  /// ‖[U; V]‖_F of the disturbance in force at the recorded time.
  std::vector<double> dist_norm;
  /// The disturbance measured in its declared norm.
  std::vector<double> dist_declared_norm;
  /// ‖P + Q‖² (only when n == m == 1; empty otherwise).
  std::vector<double> sum_norm_sq;
  /// ‖f_Z‖_F of the undisturbed field.
  std::vector<double> field_norm;
};

struct Trajectory {
  Matrix target;
  int k = 0;
  DisturbanceSpec disturbance;
  IntegratorConfig integrator;

  std::vector<double> times;
  std::vector<ParamState> states;
  MonitorChannels monitors;
  /// First time at which ‖f_Z‖_F <= 1e-9 had held for 100 consecutive steps.
  std::optional<double> converged_at;

  int n() const { return static_cast<int>(target.rows()); }
  int m() const { return static_cast<int>(target.cols()); }
  std::size_t size() const { return times.size(); }
  ProblemSpec problem() const { return ProblemSpec(target, k, true); }
};

/// Thrown when ‖Z‖_F exceeds 1e12 or the state becomes non-finite.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, Trajectory partial, double time)
      : std::runtime_error(what), partial_(std::move(partial)), time_(time) {}
  /// Everything recorded before divergence; its last state is the last
  /// recorded one.
  const Trajectory& partial() const { return partial_; }
  double time() const { return time_; }

 private:
  Trajectory partial_;
  double time_;
};

/// Thrown when the adaptive step would drop below dt_min.
class StiffnessError : public std::runtime_error {
 public:
  StiffnessError(const std::string& what, double time)
      : std::runtime_error(what), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

inline constexpr double kDivergenceNorm = 1e12;
inline constexpr double kConvergedFieldNorm = 1e-9;
inline constexpr int kConvergedSteps = 100;

Trajectory Simulate(const ProblemSpec& spec, const ParamState& init,
                    const DisturbanceSpec& dist, const IntegratorConfig& cfg);

struct LossMonitorReport {
  int violations = 0;
  /// max over steps of lhs − rhs (may be negative when never violated).
  double max_excess = 0.0;
};

/// Counts recorded steps where lhs > rhs + 1e-9·max(1, |rhs|).
LossMonitorReport LossMonitorCheck(const Trajectory& traj);

struct UltimateBoundReport {
  double predicted_limit = 0.0;
  double observed_tail_max = 0.0;
  bool satisfied = false;
};

/// Ultimate loss bound for n = m = 1 trajectories that stay in the safe set
/// ‖P + Q‖² >= α². The predicted level is sup ‖[U; V]‖²_F / α², where the
/// scalar dissipation bound L̇ <= −L·α²/2 + ½‖[U; V]‖²_F turns nonpositive;
/// the tail is the last 10% of recorded times. `satisfied` allows 5% slack
/// plus an absolute 1e-12·(1 + ‖Ȳ‖²_F) for rounding.
/// Throws PreconditionViolated if the trajectory leaves the safe set.
UltimateBoundReport UltimateBoundCheck(const Trajectory& traj, double alpha);

enum class FlowOutcome { kConvergedToTarget, kConvergedToSaddle, kNotConverged };

std::string ToString(FlowOutcome outcome);

/// Target when converged with loss <= 1e-12·(1 + ‖Ȳ‖²_F); saddle when
/// converged elsewhere (the origin or another spurious equilibrium).
FlowOutcome ClassifyOutcome(const Trajectory& traj);

}  // namespace issgf
