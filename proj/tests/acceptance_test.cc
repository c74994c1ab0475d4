// Acceptance checks, one line per criterion. Usage:
//   acceptance_test <path-to-issgf-cli>
// The CLI path is needed for the determinism criterion only.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "issgf/disturbance.h"
#include "issgf/equilibria.h"
#include "issgf/flow_simulator.h"
#include "issgf/linearization.h"
#include "issgf/random.h"
#include "issgf/regression_model.h"
#include "issgf/scalar_vector.h"

namespace fs = std::filesystem;
using namespace issgf;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool ok = false;
  std::string detail;
};

std::string Fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

int Draw(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double DrawReal(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Matrix RandomFullRank(std::mt19937_64& rng, int rows, int cols) {
  const int r = std::min(rows, cols);
  Matrix s = Matrix::Zero(rows, cols);
  for (int i = 0; i < r; ++i) s(i, i) = DrawReal(rng, 0.5, 2.0);
  return RandomOrthogonal(rng, rows) * s * RandomOrthogonal(rng, cols).transpose();
}

Vector SingularValues(const Matrix& m) {
  return Eigen::JacobiSVD<Matrix>(m).singularValues();
}

// −∇L by central differences.
Vector FiniteDifferenceField(const ProblemSpec& spec, const ParamState& z, double h) {
  const Vector z0 = z.Stacked();
  Vector g(z0.size());
  const int n = spec.n(), m = spec.m(), k = spec.k();
  for (int i = 0; i < z0.size(); ++i) {
    Vector a = z0, b = z0;
    a(i) += h;
    b(i) -= h;
    g(i) = -(Loss(spec, ParamState::FromStacked(a, n, m, k)) -
             Loss(spec, ParamState::FromStacked(b, n, m, k))) / (2 * h);
  }
  return g;
}

// Largest per-column ‖H v − λ v‖ over a block.
double BlockResidual(const Matrix& H, const EigenBlock& b) {
  double worst = 0;
  for (int c = 0; c < b.vectors.cols(); ++c) {
    worst = std::max(worst, (H * b.vectors.col(c) - b.eigenvalues(c) * b.vectors.col(c)).norm());
  }
  return worst;
}

std::vector<double> SortedEigenvalues(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  std::vector<double> v(es.eigenvalues().data(), es.eigenvalues().data() + h.rows());
  std::sort(v.begin(), v.end());
  return v;
}

// ---------------------------------------------------------------------------

Outcome GradientCorrectness() {
  auto rng = MakeStream(kSeed, "acceptance/gradient");
  double worst = 0;
  for (int t = 0; t < 100; ++t) {
    const int n = Draw(rng, 1, 4), m = Draw(rng, 1, 4), k = Draw(rng, 1, 6);
    const ProblemSpec spec(UniformMatrix(rng, n, m), k, true);
    const ParamState z{UniformMatrix(rng, n, k), UniformMatrix(rng, m, k)};
    const Vector f = GradientField(spec, z).Stacked();
    const Vector fd = FiniteDifferenceField(spec, z, 1e-5);
    worst = std::max(worst, (f - fd).norm() / f.norm());
  }
  return {worst <= 1e-6, "100 instances, worst relative error " + Fmt("%.2e", worst) + " (tol 1e-6)"};
}

Outcome DissipationInequality() {
  auto rng = MakeStream(kSeed, "acceptance/dissipation");
  int violations = 0;
  double oracle_gap = 0;
  for (int t = 0; t < 500; ++t) {
    const int n = Draw(rng, 1, 4), m = Draw(rng, 1, 4);
    const int k = std::max(n, m) + Draw(rng, 0, 2);
    const ProblemSpec spec(UniformMatrix(rng, n, m, -2, 2), k);
    const ParamState z{UniformMatrix(rng, n, k), UniformMatrix(rng, m, k)};
    const double scale = DrawReal(rng, 0, 2);
    const Matrix U = scale * UniformMatrix(rng, n, k), V = scale * UniformMatrix(rng, m, k);
    const DissipationBound b = EvaluateDissipationBound(spec, z, U, V);
    // Both sides again from first principles.
    const Matrix R = spec.target() - z.P * z.Q.transpose();
    const Matrix gP = R * z.Q, gQ = R.transpose() * z.P;  // −∇L
    const double lhs = -(gP.squaredNorm() + gQ.squaredNorm()) -
                       (gP.cwiseProduct(U).sum() + gQ.cwiseProduct(V).sum());
    const double sp = SingularValues(z.P).minCoeff(), sq = SingularValues(z.Q).minCoeff();
    const double rhs = -0.5 * R.squaredNorm() * (sp * sp + sq * sq) +
                       0.5 * (U.squaredNorm() + V.squaredNorm());
    oracle_gap = std::max({oracle_gap, std::abs(lhs - b.lhs) / (1 + std::abs(lhs)),
                           std::abs(rhs - b.rhs) / (1 + std::abs(rhs))});
    if (lhs > rhs + 1e-9 * std::max(1.0, std::abs(rhs))) ++violations;
  }
  int traj_violations = 0;
  std::size_t evaluations = 0;
  for (int t = 0; t < 50; ++t) {
    auto r = MakeStream(kSeed, "acceptance/dissipation-traj", t);
    const int n = Draw(r, 1, 3), m = Draw(r, 1, 3), k = std::max(n, m) + Draw(r, 0, 1);
    const ProblemSpec spec(UniformMatrix(r, n, m, -2, 2), k);
    const ParamState z{UniformMatrix(r, n, k), UniformMatrix(r, m, k)};
    DisturbanceSpec d;
    const DisturbanceKind kinds[] = {DisturbanceKind::kSeededRandom, DisturbanceKind::kSinusoidal,
                                     DisturbanceKind::kConstant};
    d.kind = kinds[t % 3];
    d.budget = DrawReal(r, 0.05, 1.0);
    d.seed = r();
    IntegratorConfig cfg;
    cfg.t_end = 3.0;
    cfg.dt = 1e-3;
    const Trajectory traj = Simulate(spec, z, d, cfg);
    traj_violations += LossMonitorCheck(traj).violations;
    evaluations += traj.size();
  }
  const bool ok = violations == 0 && traj_violations == 0 && oracle_gap <= 1e-10;
  return {ok, "500 draws: " + std::to_string(violations) + " violations; 50 trajectories (" +
                  std::to_string(evaluations) + " evaluations): " +
                  std::to_string(traj_violations) + " violations; library vs oracle " +
                  Fmt("%.1e", oracle_gap)};
}

Outcome ScalarDichotomy() {
  const ProblemSpec base(Matrix::Ones(1, 1), 1);
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 50.0;
  cfg.record_stride = 5000;
  int saddle_fail = 0, target_fail = 0, runs = 0;
  double worst_norm = 0, worst_gap = 0;
  for (int k : {1, 3}) {
    const ProblemSpec spec(Matrix::Ones(1, 1), k);
    auto rng = MakeStream(kSeed, "acceptance/dichotomy", k);
    for (int i = 0; i < 20; ++i) {
      const Matrix P = UniformMatrix(rng, 1, k);
      const Trajectory t = Simulate(spec, {P, -P}, {}, cfg);
      const double norm = t.states.back().Norm();
      worst_norm = std::max(worst_norm, norm);
      if (!(t.times.back() == 50.0 && norm <= 1e-6)) ++saddle_fail;
      ++runs;
    }
    for (int i = 0; i < 100; ++i) {
      ParamState z;
      do {
        z = {UniformMatrix(rng, 1, k), UniformMatrix(rng, 1, k)};
      } while ((z.P + z.Q).norm() <= 0.1);
      const Trajectory t = Simulate(spec, z, {}, cfg);
      const ParamState& e = t.states.back();
      const double gap = std::abs(1.0 - (e.P * e.Q.transpose())(0, 0));
      worst_gap = std::max(worst_gap, gap);
      if (!(t.times.back() == 50.0 && gap <= 1e-6)) ++target_fail;
      ++runs;
    }
  }
  (void)base;
  return {saddle_fail == 0 && target_fail == 0,
          std::to_string(runs) + " runs; S- inits: worst final norm " + Fmt("%.1e", worst_norm) +
              " (tol 1e-6), others: worst |Y-PQ^T| " + Fmt("%.1e", worst_gap) + " (tol 1e-6)"};
}

Outcome Invariance() {
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 10.0;
  cfg.record_stride = 1;
  bool ok = true;
  std::string detail;
  for (double alpha : {0.5, 1.0, 1.9}) {
    const SafeSetParams params(alpha, 1.0);
    InvarianceStressOptions opts;
    opts.seed = DeriveSeed(kSeed, "acceptance/invariance");
    opts.k = 2;
    opts.interior_spread = 0.0;  // every run starts on the boundary
    const InvarianceStressReport r = InvarianceStressTest(params, 50, cfg, opts);
    const double expected_budget = alpha * (1.0 - alpha * alpha / 4) / std::sqrt(2.0);
    const bool this_ok = r.runs == 50 && r.escapes == 0 && r.min_margin >= -1e-9 &&
                         r.energy_violations == 0 &&
                         std::abs(r.budget - expected_budget) <= 1e-15 &&
                         r.norm == NormKind::kSumOfTwoNorms;
    ok = ok && this_ok;
    detail += "alpha=" + Fmt("%.1f", alpha) + ": escapes " + std::to_string(r.escapes) +
              ", min margin " + Fmt("%.1e", r.min_margin) + ", min energy excess " +
              Fmt("%.2e", r.min_energy_excess) + "; ";
  }
  return {ok, "50 boundary runs per alpha, budget alpha(1-alpha^2/4)/sqrt2; " + detail};
}

Outcome UltimateBound() {
  IntegratorConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 40.0;
  cfg.record_stride = 10;
  bool ok = true;
  double worst_tail = 0;
  auto rng = MakeStream(kSeed, "acceptance/ultimate");
  for (int i = 0; i < 6; ++i) {
    const int k = 1 + i % 2;
    const ProblemSpec spec(Matrix::Ones(1, 1), k);
    DisturbanceSpec d;
    d.kind = DisturbanceKind::kConstant;
    d.norm = NormKind::kFrobeniusJoint;
    d.budget = 0.1;  // ‖[U; V]‖²_F = 0.01
    if (i > 0) {
      d.U_direction = UniformMatrix(rng, 1, k);
      d.V_direction = UniformMatrix(rng, 1, k);
    }
    ParamState z{UniformMatrix(rng, 1, k, 0.5, 1.5), UniformMatrix(rng, 1, k, 0.5, 1.5)};
    const Trajectory t = Simulate(spec, z, d, cfg);
    // Tail: last 10% of recorded times, recomputed here.
    double tail = 0;
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (t.times[j] >= 0.9 * cfg.t_end) tail = std::max(tail, t.monitors.loss[j]);
    }
    const double norm_sq = t.monitors.dist_norm.back() * t.monitors.dist_norm.back();
    const UltimateBoundReport r = UltimateBoundCheck(t, 1.0);
    worst_tail = std::max(worst_tail, tail);
    ok = ok && std::abs(norm_sq - 0.01) <= 1e-12 && tail <= 0.01 * 1.05 && r.satisfied &&
         std::abs(r.predicted_limit - 0.01) <= 1e-12;
  }
  return {ok, "6 runs, alpha=1, |[U;V]|^2=0.01: worst tail max loss " + Fmt("%.3e", worst_tail) +
                  " (bound 0.0105)"};
}

Outcome OriginSpectrumCriterion() {
  auto rng = MakeStream(kSeed, "acceptance/origin");
  double worst_multiset = 0, worst_residual = 0, worst_basis = 0;
  bool counts_ok = true;
  for (int t = 0; t < 20; ++t) {
    const int n = Draw(rng, 2, 3), m = Draw(rng, 1, n - 1), k = Draw(rng, 1, 3);
    const ProblemSpec spec(RandomFullRank(rng, n, m), k, true);
    const Matrix H = Hessian(spec, ParamState::Zero(spec)).Full();
    const Vector s = SingularValues(spec.target());
    std::vector<double> expected((n - m) * k, 0.0);
    for (int i = 0; i < m; ++i) {
      for (int c = 0; c < k; ++c) {
        expected.push_back(s(i));
        expected.push_back(-s(i));
      }
    }
    std::sort(expected.begin(), expected.end());
    const std::vector<double> numeric = SortedEigenvalues(H);
    for (std::size_t i = 0; i < numeric.size(); ++i) {
      worst_multiset = std::max(worst_multiset, std::abs(numeric[i] - expected[i]));
    }
    for (const auto& omega : {Matrix(Matrix::Identity(k, k)), RandomOrthogonal(rng, k)}) {
      const SpectralReport r = OriginSpectrum(spec, omega);
      Matrix all(H.rows(), 0);
      for (const auto& b : r.blocks) {
        worst_residual = std::max(worst_residual, BlockResidual(H, b));
        Matrix grown(H.rows(), all.cols() + b.vectors.cols());
        grown << all, b.vectors;
        all = grown;
      }
      counts_ok = counts_ok && all.cols() == (n + m) * k;
      worst_basis = std::max(worst_basis, OrthonormalityError(all));
      std::vector<double> analytic = r.analytic_eigenvalues;
      for (std::size_t i = 0; i < analytic.size(); ++i) {
        worst_multiset = std::max(worst_multiset, std::abs(analytic[i] - expected[i]));
      }
    }
  }
  const bool ok = counts_ok && worst_multiset <= 1e-8 && worst_residual <= 1e-8 &&
                  worst_basis <= 1e-8;
  return {ok, "20 instances x 2 Omegas: multiset error " + Fmt("%.1e", worst_multiset) +
                  ", eigen-residual " + Fmt("%.1e", worst_residual) + ", basis orthonormality " +
                  Fmt("%.1e", worst_basis) + " (tol 1e-8)"};
}

Outcome TargetSpectrumCriterion() {
  auto rng = MakeStream(kSeed, "acceptance/target");
  bool counts_ok = true;
  double worst_residual = 0, worst_match = 0, worst_zero = 0;
  for (int t = 0; t < 20; ++t) {
    const int n = Draw(rng, 1, 3), m = Draw(rng, 1, 3);
    const int k = Draw(rng, std::max(n, m), 4);
    const ProblemSpec spec(RandomFullRank(rng, n, m), k);
    std::vector<int> keep;
    std::vector<double> balance;
    for (int i = 0; i < std::min(n, m); ++i) {
      keep.push_back(i);
      balance.push_back(DrawReal(rng, 0.2, 5.0));
    }
    const ParamState z = MakeSpuriousEquilibrium(spec, keep, balance, RandomOrthogonal(rng, k));
    const Matrix H = Hessian(spec, z).Full();
    const std::vector<double> numeric = SortedEigenvalues(H);
    int negative = 0;
    for (double l : numeric) {
      if (l < -1e-9) {
        ++negative;
      } else {
        worst_zero = std::max(worst_zero, std::abs(l));
      }
    }
    counts_ok = counts_ok && negative == m * n;
    // −(σ_Qj² + σ_Pi²) for i below rank P, −σ_Qj² for the rest of the n rows.
    const Vector sp = SingularValues(z.P), sq = SingularValues(z.Q);
    const int pbar = static_cast<int>((sp.array() > 1e-9).count());
    std::vector<double> expected;
    for (int j = 0; j < m; ++j) {
      for (int i = 0; i < n; ++i) {
        expected.push_back(-(sq(j) * sq(j) + (i < pbar ? sp(i) * sp(i) : 0.0)));
      }
    }
    std::sort(expected.begin(), expected.end());
    for (std::size_t i = 0; i < expected.size() && i < numeric.size(); ++i) {
      worst_match = std::max(worst_match, std::abs(numeric[i] - expected[i]));
    }
    const SpectralReport r = TargetSetSpectrum(spec, z);
    int columns = 0;
    for (const auto& b : r.blocks) {
      worst_residual = std::max(worst_residual, BlockResidual(H, b));
      columns += static_cast<int>(b.vectors.cols());
    }
    counts_ok = counts_ok && columns == (n + m) * k && r.counts.negative == m * n;
  }
  const bool ok = counts_ok && worst_zero <= 1e-9 && worst_residual <= 1e-8 && worst_match <= 1e-8;
  return {ok, "20 target points: mn negative counts " + std::string(counts_ok ? "exact" : "WRONG") +
                  ", worst |zero| " + Fmt("%.1e", worst_zero) + " (tol 1e-9), V1..V5 residual " +
                  Fmt("%.1e", worst_residual) + ", diagonal match " + Fmt("%.1e", worst_match) +
                  " (tol 1e-8)"};
}

Outcome EquilibriaRoundTrip() {
  auto rng = MakeStream(kSeed, "acceptance/equilibria");
  double worst_field = 0, worst_cert = 0, worst_align = 0;
  int cert_failures = 0, rank_failures = 0;
  for (int t = 0; t < 100; ++t) {
    const int n = Draw(rng, 1, 4), m = Draw(rng, 1, 4);
    const int k = Draw(rng, std::max(n, m), 5);
    const ProblemSpec spec(RandomFullRank(rng, n, m), k);
    std::vector<int> keep;
    std::vector<double> balance;
    for (int i = 0; i < std::min(n, m); ++i) {
      if (rng() % 2) {
        keep.push_back(i);
        balance.push_back(DrawReal(rng, 0.2, 5.0));
      }
    }
    const ParamState z = MakeSpuriousEquilibrium(spec, keep, balance, RandomOrthogonal(rng, k));
    const Matrix R = spec.target() - z.P * z.Q.transpose();
    worst_field = std::max(worst_field, std::sqrt((R * z.Q).squaredNorm() +
                                                  (R.transpose() * z.P).squaredNorm()));
    try {
      const EquilibriumCertificate c = CertifyEquilibrium(spec, z);
      worst_cert = std::max(worst_cert, CheckCertificate(spec, z, c).Worst());
      if (c.rank_residual + c.rank_q > m || c.rank_residual + c.rank_p > n) ++rank_failures;
    } catch (const std::exception&) {
      ++cert_failures;
    }
  }
  for (int t = 0; t < 100; ++t) {
    const int o = Draw(rng, 1, 5), q = o + Draw(rng, 0, 3), p = Draw(rng, 1, 5);
    const int a = std::min(p, Draw(rng, 0, o));
    const int b = std::min(q, Draw(rng, 0, o - a));
    const Matrix phi = RandomOrthogonal(rng, o);
    Matrix sa = Matrix::Zero(p, o), sb = Matrix::Zero(q, o);
    for (int i = 0; i < a; ++i) sa(i, i) = DrawReal(rng, 0.3, 3.0);
    for (int i = 0; i < b; ++i) sb(i, a + i) = DrawReal(rng, 0.3, 3.0);
    const Matrix A = RandomOrthogonal(rng, p) * sa * phi.transpose();
    const Matrix B = RandomOrthogonal(rng, q) * sb * phi.transpose();
    const AlignedFactors f = SvdAlignment(A, B);
    worst_align = std::max({worst_align, (f.psi_a * f.sigma_a * f.phi.transpose() - A).norm(),
                            (f.psi_b * f.sigma_b * f.phi.transpose() - B).norm(),
                            (f.sigma_a * f.sigma_b.transpose()).norm()});
    if (f.rank_a + f.rank_b > o || f.rank_a != a || f.rank_b != b) ++rank_failures;
  }
  const bool ok = worst_field <= 1e-10 && cert_failures == 0 && worst_cert <= 1e-8 &&
                  worst_align <= 1e-10 && rank_failures == 0;
  return {ok, "100 spurious equilibria: worst field " + Fmt("%.1e", worst_field) +
                  " (tol 1e-10), certify failures " + std::to_string(cert_failures) +
                  ", worst invariant " + Fmt("%.1e", worst_cert) + "; 100 aligned pairs: worst " +
                  Fmt("%.1e", worst_align) + " (tol 1e-10); rank bound failures " +
                  std::to_string(rank_failures)};
}

Outcome ImbalanceCriterion() {
  auto rng = MakeStream(kSeed, "acceptance/imbalance");
  const ProblemSpec spec(RandomFullRank(rng, 2, 2), 2);
  const ParamState z = MakeSpuriousEquilibrium(spec, {0, 1});
  const std::vector<double> xis = {1.0, 0.5, 0.1};
  const auto rows = ImbalanceStudy(spec, z, xis);
  bool ok = rows.size() == 3;
  double prev = -1, worst_loss = 0, worst_oracle = 0;
  std::string seq;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ok = ok && rows[i].max_abs > prev;
    prev = rows[i].max_abs;
    // Rescale and recompute independently.
    const ParamState s{z.P * xis[i], z.Q / xis[i]};
    const Matrix R = spec.target() - s.P * s.Q.transpose();
    const double loss = 0.5 * R.squaredNorm();
    const std::vector<double> ev = SortedEigenvalues(Hessian(spec, s).Full());
    const double max_abs = std::max(std::abs(ev.front()), std::abs(ev.back()));
    worst_loss = std::max({worst_loss, loss, rows[i].loss});
    worst_oracle = std::max(worst_oracle, std::abs(max_abs - rows[i].max_abs) / max_abs);
    seq += Fmt("%.4g", rows[i].max_abs) + (i + 1 < rows.size() ? " < " : "");
  }
  ok = ok && worst_loss <= 1e-12 && worst_oracle <= 1e-10;
  return {ok, "max|lambda| over xi=1,0.5,0.1: " + seq + "; worst loss " + Fmt("%.1e", worst_loss) +
                  " (tol 1e-12)"};
}

Outcome PhasePlaneCriterion() {
  const double y = 1.0;
  const PhasePlane plane = PhasePlaneField(y, PhaseGrid{}, {1.0, 2.0}, {0.5, 2.0});
  bool ok = plane.samples.size() == 61u * 61u;
  int on_hyperbola = 0;
  double worst_grid = 0, worst_projected = 0;
  bool reversal = false, growth = false;
  const ProblemSpec spec(Matrix::Constant(1, 1, y), 1);
  for (const auto& s : plane.samples) {
    if (std::abs(s.P * s.Q - y) <= 1e-12) {
      ++on_hyperbola;
      worst_grid = std::max(worst_grid, std::hypot(s.dP, s.dQ));
    }
    if (s.P != 0.0) {
      const ParamState proj{Matrix::Constant(1, 1, s.P), Matrix::Constant(1, 1, y / s.P)};
      worst_projected = std::max(worst_projected, GradientField(spec, proj).Norm());
    }
    if (s.P == 2.0 && s.Q == 2.0) reversal = s.dP + s.dQ < 0;
    if (s.P == 0.5 && s.Q == 0.5) growth = s.dP + s.dQ > 0;
  }
  for (const auto& c : plane.overlays) {
    if (c.kind != "target") continue;
    for (const auto& p : c.points) {
      const ParamState z{Matrix::Constant(1, 1, p[0]), Matrix::Constant(1, 1, p[1])};
      worst_projected = std::max(worst_projected, GradientField(spec, z).Norm());
    }
  }
  std::ostringstream csv;
  WritePhasePlaneCsv(csv, plane);
  const std::string text = csv.str();
  const auto lines = std::count(text.begin(), text.end(), '\n');
  ok = ok && lines == 61 * 61 + 1 && on_hyperbola >= 8 && worst_grid <= 1e-12 &&
       worst_projected <= 1e-12 && reversal && growth;
  return {ok, "61x61 on [-3,3]^2: " + std::to_string(on_hyperbola) +
                  " grid points on PQ=Y with max arrow " + Fmt("%.1e", worst_grid) +
                  ", projected max " + Fmt("%.1e", worst_projected) +
                  " (tol 1e-12); d(P+Q)/dt at (2,2) " + (reversal ? "< 0" : "NOT < 0") +
                  ", at (0.5,0.5) " + (growth ? "> 0" : "NOT > 0")};
}

std::string ReadAll(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

Outcome Determinism(const std::string& cli_arg) {
  if (cli_arg.empty() || !fs::exists(cli_arg)) return {false, "CLI binary not given or missing"};
  const std::string cli = fs::absolute(cli_arg).string();
  const fs::path root = fs::temp_directory_path() / "issgf_acceptance_determinism";
  fs::remove_all(root);
  const char* scenario = R"({
  "version": 1,
  "seed": 17,
  "problem": {"target": [[1.0, 0.3], [0.2, -0.5]], "k": 3},
  "init": {"kind": "seeded-random", "scale": 0.8},
  "disturbance": {"kind": "seeded-random", "budget": 0.2},
  "integrator": {"method": "rk4-fixed", "dt": 0.001, "t_end": 2.0, "record_stride": 10},
  "outputs": [{"format": "csv", "path": "traj.csv"}, {"format": "json", "path": "traj.json"}]
})";
  const std::vector<std::string> commands = {
      "simulate scenario.json --json > simulate.txt",
      "verify dissipation --seed 7 --count 30 --threads 2 --t-end 2 --report dissipation.json",
      "verify invariance --seed 7 --count 10 --threads 2 --t-end 5 --report invariance.json",
      "verify target-spectrum --seed 7 --count 10 --report target.json",
      "phase-plane --steps 61 --sum-levels 1 --product-levels 0.5 --out phase.csv",
      "equilibria make --target '[[2,0],[0,1]]' --k 3 --keep 0 --gamma-seed 5 --out state.json",
      "equilibria make --target '[[2,1],[1,3]]' --k 2 --keep-all --balance 0.7,1.5 "
      "--gamma-seed 5 --out target_state.json",
      "equilibria certify --state state.json --out cert.json",
      "linearize origin --target '[[1,0.5],[0,2],[1,1]]' --k 2 --omega-seed 3 --out origin.json",
      "linearize target --state target_state.json --xis 1,0.5,0.1 --out imbalance.json",
  };
  std::vector<std::string> runs[2];
  for (int pass = 0; pass < 2; ++pass) {
    const fs::path dir = root / ("run" + std::to_string(pass));
    fs::create_directories(dir);
    std::ofstream(dir / "scenario.json") << scenario;
    for (const auto& c : commands) {
      const std::string full = "(cd '" + dir.string() + "' && '" + cli + "' " + c + ") >> '" +
                               (root / "commands.log").string() + "' 2>&1";
      if (std::system(full.c_str()) != 0) return {false, "command failed: " + c};
    }
  }
  int files = 0;
  for (const auto& entry : fs::directory_iterator(root / "run0")) {
    const fs::path other = root / "run1" / entry.path().filename();
    if (!fs::exists(other) || ReadAll(entry.path()) != ReadAll(other)) {
      return {false, "exports differ: " + entry.path().filename().string()};
    }
    ++files;
  }
  fs::remove_all(root);
  return {true, std::to_string(commands.size()) + " commands run twice, " +
                    std::to_string(files) + " files byte-identical"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "gradient correctness", 5, GradientCorrectness},
      {2, "dissipation inequality", 30, DissipationInequality},
      {3, "scalar saddle/target dichotomy", 60, ScalarDichotomy},
      {4, "safe-set invariance", 120, Invariance},
      {5, "scalar ultimate bound", 10, UltimateBound},
      {6, "origin spectrum", 10, OriginSpectrumCriterion},
      {7, "target-set spectrum", 15, TargetSpectrumCriterion},
      {8, "equilibria and alignment round-trip", 20, EquilibriaRoundTrip},
      {9, "imbalance scaling", 5, ImbalanceCriterion},
      {10, "phase-plane structure", 5, PhasePlaneCriterion},
      {11, "determinism", 60, [&] { return Determinism(cli); }},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool ok = o.ok && secs <= c.limit_s;
    if (!ok) ++failed;
    std::printf("%s criterion %2d (%s): %s [%.2f s, limit %.0f s]\n", ok ? "PASS" : "FAIL", c.id,
                c.name, o.detail.c_str(), secs, c.limit_s);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
