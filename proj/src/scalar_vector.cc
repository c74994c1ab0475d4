#include "issgf/scalar_vector.h"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "issgf/errors.h"
#include "issgf/parallel.h"
#include "issgf/random.h"

namespace issgf {

namespace {

void RequireScalarCase(const ProblemSpec& spec) {
  if (spec.n() != 1 || spec.m() != 1) {
    throw InvalidArgument("scalar/vector analysis requires n = m = 1, got n=" +
                          std::to_string(spec.n()) +
                          ", m=" + std::to_string(spec.m()));
  }
}

}  // namespace

AbCoordinates ToAb(const ProblemSpec& spec, const ParamState& state) {
  RequireScalarCase(spec);
  RequireConformant(spec, state);
  AbCoordinates ab;
  ab.a = (0.5 * (state.P + state.Q)).transpose();
  ab.b = (0.5 * (state.Q - state.P)).transpose();
  ab.a_bar = ab.a.squaredNorm();
  ab.b_bar = ab.b.squaredNorm();
  ab.F = spec.target()(0, 0) - ab.a_bar + ab.b_bar;
  return ab;
}

ParamState FromAb(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw InvalidArgument("FromAb: length mismatch");
  return {(a - b).transpose(), (a + b).transpose()};
}

std::string ToString(ScalarFate fate) {
  return fate == ScalarFate::kConvergesToSaddle ? "converges-to-saddle"
                                                : "converges-to-target";
}

ScalarFate ClassifyInitialCondition(const ProblemSpec& spec,
                                    const ParamState& state) {
  RequireScalarCase(spec);
  RequireConformant(spec, state);
  const double y_bar = spec.target()(0, 0);
  if (y_bar == 0.0) {
    throw InvalidArgument("ClassifyInitialCondition requires a nonzero target");
  }
  // For Ȳ < 0 the map (Ȳ, P, Q) → (−Ȳ, −P, Q) conjugates the flow to the
  // positive case, whose S⁻ is P + Q = 0, i.e. Q − P = 0 in the original.
  const Matrix unstable = y_bar > 0 ? Matrix(state.P + state.Q)
                                    : Matrix(state.Q - state.P);
  const bool in_stable_span =
      unstable.norm() <= 1e-12 * (1.0 + state.Norm());
  return in_stable_span ? ScalarFate::kConvergesToSaddle
                        : ScalarFate::kConvergesToTarget;
}

SafeSetParams::SafeSetParams(double alpha, double y_bar)
    : alpha_(alpha), y_bar_(y_bar) {
  if (!(y_bar > 0.0) || !std::isfinite(y_bar)) {
    throw InvalidArgument("SafeSetParams: y_bar must be positive");
  }
  if (!(alpha >= 0.0) || !(alpha < 2.0 * std::sqrt(y_bar))) {
    throw InvalidArgument("SafeSetParams: alpha must lie in [0, 2*sqrt(y_bar))");
  }
}

double SafeSetParams::admissible_bound() const {
  return alpha_ * (y_bar_ - 0.25 * alpha_ * alpha_) / std::sqrt(2.0);
}

double AdmissibleDisturbanceBound(double alpha, double y_bar) {
  return SafeSetParams(alpha, y_bar).admissible_bound();
}

SafeSetMembership InSafeSet(const ParamState& state,
                            const SafeSetParams& params) {
  if (state.P.rows() != 1 || state.Q.rows() != 1 ||
      state.P.cols() != state.Q.cols()) {
    throw InvalidArgument("InSafeSet requires 1 x k row vectors P and Q");
  }
  SafeSetMembership out;
  out.margin = (state.P + state.Q).squaredNorm() - params.alpha() * params.alpha();
  out.inside = out.margin >= 0.0;
  return out;
}

SumNormRate EvaluateSumNormRate(const ProblemSpec& spec,
                                const ParamState& state, const Matrix& U,
                                const Matrix& V) {
  RequireScalarCase(spec);
  const ParamState f = DisturbedField(spec, state, U, V);
  const Matrix s = state.P + state.Q;
  SumNormRate rate;
  rate.exact = 2.0 * s.cwiseProduct(f.P + f.Q).sum();
  const double F = Residual(spec, state)(0, 0);
  rate.lower_bound =
      2.0 * F * s.squaredNorm() - 2.0 * s.norm() * (U + V).norm();
  return rate;
}

namespace {

struct StressRun {
  bool escaped = false;
  double min_margin = 0.0;
  bool energy_violated = false;
  double min_energy_excess = 0.0;
};

}  // namespace

InvarianceStressReport InvarianceStressTest(
    const SafeSetParams& params, int runs, const IntegratorConfig& cfg,
    const InvarianceStressOptions& opts) {
  if (runs < 0) throw InvalidArgument("InvarianceStressTest: runs < 0");
  if (opts.k < 1) throw InvalidArgument("InvarianceStressTest: k < 1");
  const double alpha = params.alpha();
  const double alpha2 = alpha * alpha;
  const ProblemSpec spec(Matrix::Constant(1, 1, params.y_bar()), opts.k);

  InvarianceStressReport report;
  report.runs = runs;
  report.budget = params.admissible_bound() * opts.budget_scale;
  report.norm = NormKind::kSumOfTwoNorms;
  report.alpha = alpha;
  report.y_bar = params.y_bar();

  std::vector<StressRun> results(runs);
  ParallelFor(runs, opts.threads, [&](int r) {
    auto rng = MakeStream(opts.seed, "invariance-init", r);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vector dir(opts.k);
    do {
      for (int i = 0; i < opts.k; ++i) dir(i) = normal(rng);
    } while (dir.norm() < 1e-3);
    dir.normalize();
    // ‖P + Q‖ = 2‖a‖.
    const double radius =
        r % 2 == 0 ? alpha : alpha * (1.0 + opts.interior_spread * unit(rng));
    Vector a = 0.5 * radius * dir;
    Vector b = UniformMatrix(rng, opts.k, 1);
    ParamState init = FromAb(a, b);
    if (r % 2 == 0 && alpha > 0.0) {
      // Land exactly on the boundary despite rounding in FromAb.
      const double s = (init.P + init.Q).norm();
      const Vector shift = (alpha / s - 1.0) * 0.5 * (init.P + init.Q).transpose();
      init = FromAb(a + shift, b);
    }

    DisturbanceSpec dist;
    dist.kind = DisturbanceKind::kAdversarial;
    dist.norm = NormKind::kSumOfTwoNorms;
    dist.budget = report.budget;
    dist.seed = DeriveSeed(opts.seed, "invariance-disturbance", r);

    const Trajectory traj = Simulate(spec, init, dist, cfg);
    StressRun out;
    out.min_margin = std::numeric_limits<double>::infinity();
    out.min_energy_excess = std::numeric_limits<double>::infinity();
    for (const auto& z : traj.states) {
      const double margin = (z.P + z.Q).squaredNorm() - alpha2;
      out.min_margin = std::min(out.min_margin, margin);
      if (margin < -1e-9) out.escaped = true;
      const double energy = z.P.squaredNorm() + z.Q.squaredNorm() - 0.5 * alpha2;
      out.min_energy_excess = std::min(out.min_energy_excess, energy);
      if (energy < -1e-9) out.energy_violated = true;
    }
    results[r] = out;
  });

  report.min_margin = std::numeric_limits<double>::infinity();
  report.min_energy_excess = std::numeric_limits<double>::infinity();
  for (const auto& r : results) {
    report.escapes += r.escaped;
    report.energy_violations += r.energy_violated;
    report.min_margin = std::min(report.min_margin, r.min_margin);
    report.min_energy_excess =
        std::min(report.min_energy_excess, r.min_energy_excess);
  }
  if (runs == 0) report.min_margin = report.min_energy_excess = 0.0;
  return report;
}

Json InvarianceStressReportToJson(const InvarianceStressReport& r) {
  return Json{{"runs", r.runs},
              {"escapes", r.escapes},
              {"min_margin", r.min_margin},
              {"energy_violations", r.energy_violations},
              {"min_energy_excess", r.min_energy_excess},
              {"budget", r.budget},
              {"norm", ToString(r.norm)},
              {"alpha", r.alpha},
              {"y_bar", r.y_bar}};
}

namespace {

double GridValue(double lo, double hi, int steps, int i) {
  if (steps == 1) return 0.5 * (lo + hi);
  return lo + (hi - lo) * static_cast<double>(i) / (steps - 1);
}

// Branches of PQ = c clipped to the grid box.
void AddHyperbola(const std::string& kind, double c, const PhaseGrid& g,
                  int points, std::vector<OverlayCurve>* out) {
  for (int branch = 0; branch < 2; ++branch) {
    OverlayCurve curve{kind, c, branch, {}};
    const double sign = branch == 0 ? 1.0 : -1.0;
    const double lo = branch == 0 ? std::max(g.p_min, 0.0) : g.p_min;
    const double hi = branch == 0 ? g.p_max : std::min(g.p_max, 0.0);
    if (c == 0.0) {
      // Degenerate hyperbola: the half-axis Q = 0 on this side.
      if (hi > lo) {
        for (int i = 0; i < points; ++i) {
          curve.points.push_back({lo + (hi - lo) * i / (points - 1.0), 0.0});
        }
      }
    } else if (hi > lo) {
      for (int i = 0; i < points; ++i) {
        const double p = lo + (hi - lo) * i / (points - 1.0);
        if (p * sign <= 0.0) continue;
        const double q = c / p;
        if (q >= g.q_min && q <= g.q_max) curve.points.push_back({p, q});
      }
    }
    if (!curve.points.empty()) out->push_back(std::move(curve));
  }
}

}  // namespace

PhasePlane PhasePlaneField(double y_bar, const PhaseGrid& grid,
                           const std::vector<double>& sum_levels,
                           const std::vector<double>& product_levels,
                           int curve_points) {
  if (grid.steps < 1) throw InvalidArgument("phase plane: steps must be >= 1");
  if (!(grid.p_max >= grid.p_min) || !(grid.q_max >= grid.q_min)) {
    throw InvalidArgument("phase plane: empty range");
  }
  if (curve_points < 2) throw InvalidArgument("phase plane: curve_points < 2");
  PhasePlane plane;
  plane.y_bar = y_bar;
  plane.grid = grid;
  plane.samples.reserve(static_cast<std::size_t>(grid.steps) * grid.steps);
  for (int j = 0; j < grid.steps; ++j) {
    const double q = GridValue(grid.q_min, grid.q_max, grid.steps, j);
    for (int i = 0; i < grid.steps; ++i) {
      const double p = GridValue(grid.p_min, grid.p_max, grid.steps, i);
      const double f = y_bar - p * q;
      plane.samples.push_back({p, q, f * q, f * p});
    }
  }
  AddHyperbola("target", y_bar, grid, curve_points, &plane.overlays);
  for (double c : sum_levels) {
    for (double level : {c, -c}) {
      OverlayCurve line{"sum", level, level >= 0 ? 0 : 1, {}};
      for (int i = 0; i < curve_points; ++i) {
        const double p =
            grid.p_min + (grid.p_max - grid.p_min) * i / (curve_points - 1.0);
        const double q = level - p;
        if (q >= grid.q_min && q <= grid.q_max) line.points.push_back({p, q});
      }
      if (!line.points.empty()) plane.overlays.push_back(std::move(line));
      if (c == 0.0) break;
    }
  }
  for (double c : product_levels) {
    AddHyperbola("product", c, grid, curve_points, &plane.overlays);
  }
  return plane;
}

void WritePhasePlaneCsv(std::ostream& out, const PhasePlane& plane) {
  out << "P,Q,dP,dQ\n";
  for (const auto& s : plane.samples) {
    out << FormatDouble(s.P) << ',' << FormatDouble(s.Q) << ','
        << FormatDouble(s.dP) << ',' << FormatDouble(s.dQ) << '\n';
  }
}

Json PhasePlaneOverlaysToJson(const PhasePlane& plane) {
  Json overlays = Json::array();
  for (const auto& c : plane.overlays) {
    Json pts = Json::array();
    for (const auto& p : c.points) pts.push_back({p[0], p[1]});
    overlays.push_back(Json{{"kind", c.kind},
                            {"level", c.level},
                            {"branch", c.branch},
                            {"points", pts}});
  }
  return Json{{"y_bar", plane.y_bar},
              {"grid",
               {{"p_min", plane.grid.p_min},
                {"p_max", plane.grid.p_max},
                {"q_min", plane.grid.q_min},
                {"q_max", plane.grid.q_max},
                {"steps", plane.grid.steps}}},
              {"samples", plane.samples.size()},
              {"overlays", overlays}};
}

}  // namespace issgf
