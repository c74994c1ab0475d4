#pragma once

/// @file
/// Analysis of the n = m = 1 case, where P and Q are 1 x k row vectors and
/// the undisturbed flow is (Ṗ, Q̇) = (Ȳ − PQᵀ)·(Q, P).

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "issgf/flow_simulator.h"
#include "issgf/json_util.h"
#include "issgf/regression_model.h"

namespace issgf {

/// Coordinates in the eigenbasis of the origin linearization:
/// P = aᵀ − bᵀ, Q = aᵀ + bᵀ, with a the unstable (S⁺) and b the stable (S⁻)
/// component.
struct AbCoordinates {
  Vector a;
  Vector b;
  double a_bar = 0.0;  ///< ‖a‖²
  double b_bar = 0.0;  ///< ‖b‖²
  double F = 0.0;      ///< Ȳ − ā + b̄, equal to the scalar residual Ȳ − PQᵀ.
};

/// Throws InvalidArgument unless spec has n = m = 1.
AbCoordinates ToAb(const ProblemSpec& spec, const ParamState& state);
ParamState FromAb(const Vector& a, const Vector& b);

enum class ScalarFate { kConvergesToSaddle, kConvergesToTarget };
std::string ToString(ScalarFate fate);

/// Undisturbed fate of an n = m = 1 initial state: the saddle exactly when the
/// state lies in S⁻ (‖P + Q‖ <= 1e-12·(1 + ‖Z‖)). For Ȳ < 0 the roles swap and
/// S⁻ becomes P − Q = 0. Throws InvalidArgument for Ȳ = 0.
ScalarFate ClassifyInitialCondition(const ProblemSpec& spec,
                                    const ParamState& state);

/// Safe-set parameters: R_α = {‖P + Q‖² >= α²} for α in [0, 2√Ȳ).
class SafeSetParams {
 public:
  SafeSetParams(double alpha, double y_bar);
  double alpha() const { return alpha_; }
  double y_bar() const { return y_bar_; }
  /// (1/√2)·α·(Ȳ − α²/4): the largest ‖U‖₂ + ‖V‖₂ keeping R_α invariant.
  double admissible_bound() const;

 private:
  double alpha_;
  double y_bar_;
};

/// Same value as SafeSetParams(alpha, y_bar).admissible_bound(); throws
/// InvalidArgument for α outside [0, 2√Ȳ).
double AdmissibleDisturbanceBound(double alpha, double y_bar);

struct SafeSetMembership {
  bool inside = false;
  /// ‖P + Q‖² − α², nonnegative inside the (closed) set.
  double margin = 0.0;
};

SafeSetMembership InSafeSet(const ParamState& state,
                            const SafeSetParams& params);

/// Exact d/dt ‖P + Q‖² along the disturbed flow and the lower bound
/// 2F‖P + Q‖² − 2‖P + Q‖‖U + V‖ used to prove invariance of R_α.
struct SumNormRate {
  double exact = 0.0;
  double lower_bound = 0.0;
};

SumNormRate EvaluateSumNormRate(const ProblemSpec& spec,
                                const ParamState& state, const Matrix& U,
                                const Matrix& V);

struct InvarianceStressOptions {
  int k = 1;
  std::uint64_t seed = 0;
  /// Multiplier on the admissible bound (1 = the admissible budget).
  double budget_scale = 1.0;
  /// Every other run starts on the boundary ‖P + Q‖² = α²; the rest start at
  /// ‖P + Q‖ = α·(1 + u), u ~ U(0, 1).
  double interior_spread = 1.0;
  /// Worker threads; results are independent of this value.
  int threads = 0;
};

struct InvarianceStressReport {
  int runs = 0;
  /// Runs where the margin dropped below −1e-9 at some recorded step.
  int escapes = 0;
  double min_margin = 0.0;
  /// Runs where σ²(P) + σ²(Q) fell below α²/2 − 1e-9.
  int energy_violations = 0;
  /// min over runs and steps of σ²(P) + σ²(Q) − α²/2.
  double min_energy_excess = 0.0;
  double budget = 0.0;
  NormKind norm = NormKind::kSumOfTwoNorms;
  double alpha = 0.0;
  double y_bar = 0.0;
};

/// Simulates `runs` seeded scenarios under adversarial disturbance at the
/// admissible budget (sum-of-two-norms) and reports any exit from R_α.
InvarianceStressReport InvarianceStressTest(const SafeSetParams& params,
                                            int runs,
                                            const IntegratorConfig& cfg,
                                            const InvarianceStressOptions& opts);

Json InvarianceStressReportToJson(const InvarianceStressReport& r);

/// Grid for the k = 1 phase plane. `steps` samples per axis; steps = 1 gives
/// the single center point.
struct PhaseGrid {
  double p_min = -3.0;
  double p_max = 3.0;
  double q_min = -3.0;
  double q_max = 3.0;
  int steps = 61;
};

struct FieldSample {
  double P = 0.0;
  double Q = 0.0;
  double dP = 0.0;
  double dQ = 0.0;
};

/// A polyline overlay: "target" (PQ = Ȳ), "sum" (P + Q = c) or "product"
/// (PQ = c). Hyperbolas come as two branches (branch 0: P > 0, 1: P < 0).
struct OverlayCurve {
  std::string kind;
  double level = 0.0;
  int branch = 0;
  std::vector<std::array<double, 2>> points;
};

struct PhasePlane {
  double y_bar = 0.0;
  PhaseGrid grid;
  std::vector<FieldSample> samples;
  std::vector<OverlayCurve> overlays;
};

/// Samples (Ȳ − PQ)·(Q, P) on the grid, row-major with P varying fastest,
/// and builds overlay curves for the target hyperbola, each |P + Q| = c in
/// `sum_levels` (both signs) and each PQ = c in `product_levels`.
PhasePlane PhasePlaneField(double y_bar, const PhaseGrid& grid,
                           const std::vector<double>& sum_levels = {},
                           const std::vector<double>& product_levels = {},
                           int curve_points = 201);

void WritePhasePlaneCsv(std::ostream& out, const PhasePlane& plane);
Json PhasePlaneOverlaysToJson(const PhasePlane& plane);

}  // namespace issgf
