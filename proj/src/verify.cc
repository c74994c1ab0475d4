#include "issgf/verify.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "issgf/equilibria.h"
#include "issgf/errors.h"
#include "issgf/flow_simulator.h"
#include "issgf/linearization.h"
#include "issgf/parallel.h"
#include "issgf/random.h"
#include "issgf/scalar_vector.h"

namespace issgf {

const std::vector<std::string>& VerifySuiteNames() {
  static const std::vector<std::string> names = {
      "dissipation",     "invariance", "origin-spectrum",
      "target-spectrum", "equilibria", "tensor-identities"};
  return names;
}

namespace {

// Outcome of one randomized instance. `worst` holds per-metric errors that
// the suite report aggregates by maximum.
struct InstanceResult {
  bool ok = true;
  Json diag = Json::object();
  std::map<std::string, double> worst;

  // Records `value` under `name` and fails the instance if it exceeds `tol`.
  void Check(const std::string& name, double value, double tol) {
    worst[name] = std::max(worst.count(name) ? worst[name] : 0.0, value);
    if (!(value <= tol)) {
      ok = false;
      diag["failed"].push_back(Json{{"check", name}, {"value", value}, {"tol", tol}});
    }
  }

  void Require(const std::string& name, bool cond) {
    if (!cond) {
      ok = false;
      diag["failed"].push_back(Json{{"check", name}});
    }
  }
};

using InstanceFn = std::function<InstanceResult(int, std::mt19937_64&)>;

VerifyReport RunInstances(const std::string& suite, const VerifyOptions& opts,
                          const InstanceFn& fn) {
  std::vector<InstanceResult> results(opts.count);
  ParallelFor(opts.count, opts.threads, [&](int i) {
    auto rng = MakeStream(opts.seed, "verify/" + suite, i);
    try {
      results[i] = fn(i, rng);
    } catch (const std::exception& e) {
      results[i].ok = false;
      results[i].diag["exception"] = e.what();
    }
  });
  VerifyReport r;
  r.suite = suite;
  r.instances = opts.count;
  std::map<std::string, double> worst;
  for (int i = 0; i < opts.count; ++i) {
    const auto& res = results[i];
    for (const auto& [name, v] : res.worst) {
      worst[name] = std::max(worst.count(name) ? worst[name] : 0.0, v);
    }
    if (!res.ok) {
      ++r.failures;
      if (r.failed_instances.size() < 10) {
        Json d = res.diag;
        d["instance"] = i;
        r.failed_instances.push_back(d);
      }
    }
  }
  r.details = Json::object();
  for (const auto& [name, v] : worst) r.details["max_" + name] = v;
  r.passed = r.failures == 0;
  return r;
}

double RelErr(const Matrix& a, const Matrix& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

int Draw(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

double DrawReal(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Random matrix with prescribed rank and singular values in [0.5, 2].
Matrix RandomWithRank(std::mt19937_64& rng, int rows, int cols, int rank) {
  const Matrix u = RandomOrthogonal(rng, rows);
  const Matrix v = RandomOrthogonal(rng, cols);
  Matrix s = Matrix::Zero(rows, cols);
  for (int i = 0; i < rank; ++i) s(i, i) = DrawReal(rng, 0.5, 2.0);
  return u * s * v.transpose();
}

InstanceResult TensorIdentities(int, std::mt19937_64& rng) {
  InstanceResult r;
  const int p = Draw(rng, 1, 4), q = Draw(rng, 1, 4);
  const int s = Draw(rng, 1, 4), t = Draw(rng, 1, 4);
  const Matrix M = UniformMatrix(rng, p, q);

  const Vector v = Vec(M);
  bool vec_layout = true;
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < q; ++j) vec_layout &= v(i + j * p) == M(i, j);
  }
  r.Require("vec_layout", vec_layout);
  r.Require("unvec_roundtrip", Unvec(v, p, q) == M);

  const Matrix K = CommutationMatrix(p, q);
  r.Require("commutation_is_permutation", IsPermutationMatrix(K));
  r.Require("commutation_maps_transpose", K * Vec(M.transpose()) == Vec(M));
  r.Require("commutation_transpose",
            Matrix(K.transpose()) == CommutationMatrix(q, p));

  const Matrix A = UniformMatrix(rng, p, q), B = UniformMatrix(rng, s, t);
  const Matrix C = UniformMatrix(rng, q, Draw(rng, 1, 3));
  const Matrix D = UniformMatrix(rng, t, Draw(rng, 1, 3));
  r.Check("mixed_product", RelErr(Kron(A, B) * Kron(C, D), Kron(A * C, B * D)),
          1e-12);
  const Matrix X = UniformMatrix(rng, q, s);
  const Matrix E = UniformMatrix(rng, s, Draw(rng, 1, 4));
  r.Check("vec_of_product",
          RelErr(Vec(A * X * E), Kron(E.transpose(), A) * Vec(X)), 1e-12);
  // Commuting the factors of a Kronecker product.
  r.Check("kron_commutation",
          RelErr(CommutationMatrix(p, s) * Kron(A, B) * CommutationMatrix(t, q),
                 Kron(B, A)),
          0.0);

  const int rank = Draw(rng, 0, std::min(p, q));
  const Matrix low = RandomWithRank(rng, p, q, rank);
  const SvdFactors f = SvdWithThreshold(low);
  r.Require("svd_rank", f.rank == rank);
  r.Check("svd_left_orthogonal", OrthonormalityError(f.left), 1e-12);
  r.Check("svd_right_orthogonal", OrthonormalityError(f.right), 1e-12);
  r.Check("svd_reconstruction",
          RelErr(f.left * f.singular * f.right.transpose(), low), 1e-12);

  const int d = Draw(rng, 1, 5), cols = Draw(rng, 0, d);
  const Matrix partial = RandomOrthogonal(rng, d).leftCols(cols);
  Matrix full(d, d);
  full << partial, CompleteOrthonormalBasis(partial);
  r.Check("completion_orthonormal", OrthonormalityError(full), 1e-12);
  return r;
}

InstanceResult Dissipation(int i, std::mt19937_64& rng, double t_end) {
  InstanceResult r;
  const int n = Draw(rng, 1, 4), m = Draw(rng, 1, 4);
  const int k = Draw(rng, std::max(n, m), 6);
  const ProblemSpec spec(UniformMatrix(rng, n, m), k);
  const ParamState z{UniformMatrix(rng, n, k), UniformMatrix(rng, m, k)};
  const Matrix U = UniformMatrix(rng, n, k), V = UniformMatrix(rng, m, k);
  const DissipationBound b = EvaluateDissipationBound(spec, z, U, V);
  r.Check("pointwise_excess",
          (b.lhs - b.rhs) / std::max(1.0, std::abs(b.rhs)), 1e-9);
  if (i % 10 == 0) {
    DisturbanceSpec dist;
    dist.kind = DisturbanceKind::kSeededRandom;
    dist.budget = DrawReal(rng, 0.1, 1.0);
    dist.seed = rng();
    IntegratorConfig cfg;
    cfg.t_end = std::min(t_end, 5.0);
    cfg.record_stride = 5;
    const Trajectory traj = Simulate(spec, z, dist, cfg);
    const LossMonitorReport rep = LossMonitorCheck(traj);
    r.Check("trajectory_violations", rep.violations, 0.0);
  }
  return r;
}

InstanceResult OriginSpectrumInstance(std::mt19937_64& rng,
                                      const VerifyOptions& opts) {
  InstanceResult r;
  const int n = opts.n > 0 ? opts.n : Draw(rng, 2, 3);
  const int m = opts.m > 0 ? opts.m : Draw(rng, 1, n - 1);
  const int k = opts.k > 0 ? opts.k : Draw(rng, 1, 3);
  const ProblemSpec spec(RandomWithRank(rng, n, m, std::min(n, m)), k, true);
  r.diag["dims"] = {n, m, k};
  for (int variant = 0; variant < 2; ++variant) {
    const Matrix omega =
        variant == 0 ? Matrix(Matrix::Identity(k, k)) : RandomOrthogonal(rng, k);
    const SpectralReport rep = OriginSpectrum(spec, omega, true);
    r.Check("multiset_error", rep.multiset_error, 1e-8);
    r.Check("relative_residual", rep.WorstRelativeResidual(), 1e-8);
    r.Check("orthonormality", rep.WorstOrthonormalityError(), 1e-10);
    r.Require("column_count", rep.TotalBlockColumns() == (n + m) * k);
    const int lo = std::min(n, m), hi = std::max(n, m);
    r.Require("counts", rep.counts.negative == lo * k &&
                            rep.counts.positive == lo * k &&
                            rep.counts.zero == (hi - lo) * k);
  }
  return r;
}

InstanceResult TargetSpectrumInstance(std::mt19937_64& rng,
                                      const VerifyOptions& opts) {
  InstanceResult r;
  const int n = opts.n > 0 ? opts.n : Draw(rng, 1, 3);
  const int m = opts.m > 0 ? opts.m : Draw(rng, 1, 3);
  const int k = opts.k > 0 ? opts.k : Draw(rng, std::max(n, m), 4);
  const ProblemSpec spec(RandomWithRank(rng, n, m, std::min(n, m)), k);
  std::vector<int> keep;
  std::vector<double> balance;
  for (int i = 0; i < std::min(n, m); ++i) {
    keep.push_back(i);
    balance.push_back(DrawReal(rng, 0.2, 5.0));
  }
  const ParamState z =
      MakeSpuriousEquilibrium(spec, keep, balance, RandomOrthogonal(rng, k));
  const SpectralReport rep = TargetSetSpectrum(spec, z);
  r.diag["dims"] = {n, m, k};
  r.diag["negative"] = rep.counts.negative;
  r.Require("negative_count", rep.counts.negative == m * n);
  r.Require("zero_count", rep.counts.zero == (n + m) * k - m * n &&
                              rep.counts.positive == 0);
  r.Check("multiset_error", rep.multiset_error, 1e-8);
  r.Check("relative_residual", rep.WorstRelativeResidual(), 1e-8);
  r.Check("orthonormality", rep.WorstOrthonormalityError(), 1e-10);
  r.Require("column_count", rep.TotalBlockColumns() == (n + m) * k);
  return r;
}

InstanceResult EquilibriaInstance(std::mt19937_64& rng) {
  InstanceResult r;
  // Spurious equilibrium round trip.
  {
    const int n = Draw(rng, 1, 3), m = Draw(rng, 1, 3);
    const int k = Draw(rng, std::max(n, m), 4);
    const int rank = std::min(n, m);
    const ProblemSpec spec(RandomWithRank(rng, n, m, rank), k);
    std::vector<int> keep;
    std::vector<double> balance;
    for (int i = 0; i < rank; ++i) {
      if (Draw(rng, 0, 1)) {
        keep.push_back(i);
        balance.push_back(DrawReal(rng, 0.2, 5.0));
      }
    }
    const Matrix gamma = RandomOrthogonal(rng, k);
    const ParamState z = MakeSpuriousEquilibrium(spec, keep, balance, gamma);
    r.Check("field_residual", EquilibriumResidual(spec, z), 1e-10);
    const EquilibriumCertificate cert = CertifyEquilibrium(spec, z);
    r.Check("certificate", CheckCertificate(spec, z, cert).Worst(), 1e-10);
    if (static_cast<int>(keep.size()) < rank) {
      // A dropped direction along which the loss strictly decreases.
      const SvdFactors svd = SvdWithThreshold(spec.target());
      int dropped = 0;
      while (std::count(keep.begin(), keep.end(), dropped)) ++dropped;
      const double base = Loss(spec, z);
      double best = 0.0;
      for (double sp : {1.0, -1.0}) {
        for (double sq : {1.0, -1.0}) {
          const ParamState moved{
              z.P + 1e-2 * sp * svd.left.col(dropped) * gamma.col(dropped).transpose(),
              z.Q + 1e-2 * sq * svd.right.col(dropped) * gamma.col(dropped).transpose()};
          best = std::max(best, base - Loss(spec, moved));
        }
      }
      r.Require("escape_direction", best >= 1e-6);
    }
  }
  // Synthesized aligned pair.
  {
    const int o = Draw(rng, 1, 4);
    const int a = Draw(rng, 0, o), b = Draw(rng, 0, o - a);
    const int p = Draw(rng, std::max(a, 1), 5), q = Draw(rng, o, 6);
    const Matrix phi = RandomOrthogonal(rng, o);
    const Matrix pa = RandomOrthogonal(rng, p), pb = RandomOrthogonal(rng, q);
    Matrix A = Matrix::Zero(p, o), B = Matrix::Zero(q, o);
    for (int i = 0; i < a; ++i) {
      A += DrawReal(rng, 0.5, 2.0) * pa.col(i) * phi.col(i).transpose();
    }
    for (int i = 0; i < b; ++i) {
      B += DrawReal(rng, 0.5, 2.0) * pb.col(i) * phi.col(a + i).transpose();
    }
    const AlignedFactors f = SvdAlignment(A, B);
    r.Check("align_A", RelErr(f.psi_a * f.sigma_a * f.phi.transpose(), A), 1e-10);
    r.Check("align_B", RelErr(f.psi_b * f.sigma_b * f.phi.transpose(), B), 1e-10);
    r.Check("align_cross", (f.sigma_a * f.sigma_b.transpose()).norm(), 1e-12);
    r.Check("align_orthogonal",
            std::max({OrthonormalityError(f.psi_a), OrthonormalityError(f.psi_b),
                      OrthonormalityError(f.phi)}),
            1e-10);
    r.Require("rank_sum", f.rank_a + f.rank_b <= o && f.rank_a == a &&
                              f.rank_b == b);
  }
  return r;
}

}  // namespace

VerifyReport RunVerifySuite(const std::string& suite, const VerifyOptions& opts) {
  if (opts.count < 1) throw InvalidArgument("verify: count must be >= 1");
  if (suite == "tensor-identities") {
    return RunInstances(suite, opts, TensorIdentities);
  }
  if (suite == "dissipation") {
    return RunInstances(suite, opts, [&](int i, std::mt19937_64& rng) {
      return Dissipation(i, rng, opts.t_end);
    });
  }
  if (suite == "origin-spectrum") {
    if ((opts.n > 0 && opts.m > 0 && opts.n == opts.m) ||
        (opts.n > 0 && opts.n < 2 && opts.m == 0)) {
      throw InvalidArgument("verify origin-spectrum: needs n != m (n > m by "
                            "default; n < m is handled by transposition)");
    }
    return RunInstances(suite, opts, [&](int, std::mt19937_64& rng) {
      return OriginSpectrumInstance(rng, opts);
    });
  }
  if (suite == "target-spectrum") {
    if (opts.k > 0 && opts.k < std::max(opts.n, opts.m)) {
      throw InvalidArgument("verify target-spectrum: needs k >= max(n, m)");
    }
    return RunInstances(suite, opts, [&](int, std::mt19937_64& rng) {
      return TargetSpectrumInstance(rng, opts);
    });
  }
  if (suite == "equilibria") {
    return RunInstances(suite, opts, [](int, std::mt19937_64& rng) {
      return EquilibriaInstance(rng);
    });
  }
  if (suite == "invariance") {
    const SafeSetParams params(opts.alpha, opts.y_bar);
    IntegratorConfig cfg;
    cfg.t_end = opts.t_end;
    cfg.record_stride = 10;
    InvarianceStressOptions so;
    so.seed = DeriveSeed(opts.seed, "verify/invariance");
    so.threads = opts.threads;
    const InvarianceStressReport rep =
        InvarianceStressTest(params, opts.count, cfg, so);
    VerifyReport r;
    r.suite = suite;
    r.instances = rep.runs;
    r.failures = rep.escapes + rep.energy_violations;
    r.details = InvarianceStressReportToJson(rep);
    r.passed = rep.escapes == 0 && rep.energy_violations == 0;
    return r;
  }
  std::string known;
  for (const auto& s : VerifySuiteNames()) known += (known.empty() ? "" : ", ") + s;
  throw InvalidArgument("unknown verify suite '" + suite + "' (known: " + known + ")");
}

Json VerifyReportToJson(const VerifyReport& r, const VerifyOptions& opts) {
  return Json{{"suite", r.suite},
              {"passed", r.passed},
              {"instances", r.instances},
              {"failures", r.failures},
              {"seed", opts.seed},
              {"details", r.details},
              {"failed_instances", r.failed_instances}};
}

}  // namespace issgf
