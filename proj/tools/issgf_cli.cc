// Command-line front end: simulate scenarios, run verification suites and
// export phase planes, equilibria and spectra.

#include <cerrno>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "issgf/equilibria.h"
#include "issgf/errors.h"
#include "issgf/linearization.h"
#include "issgf/random.h"
#include "issgf/scalar_vector.h"
#include "issgf/scenario.h"
#include "issgf/trajectory_io.h"
#include "issgf/verify.h"

namespace {

using namespace issgf;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

std::uint64_t DefaultSeed() {
  const char* env = std::getenv("ISSGF_SEED");
  if (env == nullptr || *env == '\0') return 0;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used);
    if (used != std::strlen(env)) throw std::invalid_argument(env);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("ISSGF_SEED must be an unsigned integer, got '") +
                      env + "'");
  }
}

void WriteFile(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write '" + path + "': " + std::strerror(errno));
  }
  out << contents;
  out.close();
  if (!out) throw IoError("error writing '" + path + "': " + std::strerror(errno));
}

Json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "': " + std::strerror(errno));
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

// Emits `j` to `path`, or to stdout when the path is empty or "-".
void EmitJson(const std::string& path, const Json& j) {
  if (path.empty() || path == "-") {
    std::cout << DumpJson(j);
  } else {
    WriteFile(path, DumpJson(j));
  }
}

Matrix ParseMatrixArg(const std::string& text, const std::string& flag) {
  try {
    return MatrixFromJson(Json::parse(text), flag);
  } catch (const Json::parse_error& e) {
    throw ConfigError(flag + ": expected a JSON matrix such as [[1,0],[0,2]]: " +
                      e.what());
  }
}

Json StateFileJson(const ProblemSpec& spec, const ParamState& z) {
  return Json{{"target", MatrixToJson(spec.target())},
              {"k", spec.k()},
              {"P", MatrixToJson(z.P)},
              {"Q", MatrixToJson(z.Q)}};
}

struct StateFile {
  ProblemSpec spec;
  ParamState state;
};

StateFile ReadStateFile(const std::string& path) {
  const Json j = ReadJsonFile(path);
  try {
    ProblemSpec spec(MatrixFromJson(j.at("target"), "target"),
                     j.at("k").get<int>());
    ParamState z{MatrixFromJson(j.at("P"), "P"), MatrixFromJson(j.at("Q"), "Q")};
    RequireConformant(spec, z);
    return {spec, z};
  } catch (const Json::exception& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

// --- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string scenario;
  bool json = false;
};

int CmdSimulate(const SimulateArgs& a) {
  const Scenario s = LoadScenarioFile(a.scenario, DefaultSeed());
  const std::string base = std::filesystem::path(a.scenario).parent_path().string();
  const ProblemSpec spec = ResolveProblem(s, base);
  const ParamState init = ResolveInit(s, spec);
  Trajectory traj;
  int code = kExitOk;
  try {
    traj = Simulate(spec, init, s.disturbance, s.integrator);
  } catch (const DivergenceError& e) {
    std::cerr << "simulation diverged at t=" << FormatDouble(e.time()) << ": "
              << e.what() << "\n";
    traj = e.partial();
    code = kExitFailure;
  }
  for (const auto& o : s.outputs) {
    const std::string path = ResolvePath(base, o.path);
    if (o.format == "csv") {
      std::ostringstream csv;
      WriteTrajectoryCsv(csv, traj);
      WriteFile(path, csv.str());
    } else {
      WriteFile(path, DumpJson(TrajectoryToJson(traj)));
    }
  }
  const SimulationSummary sum = Summarize(traj);
  if (a.json) {
    std::cout << DumpJson(SummaryToJson(sum));
  } else {
    std::cout << ToString(sum.outcome) << ", final loss "
              << FormatDouble(sum.final_loss) << " at t="
              << FormatDouble(sum.final_time) << "\n"
              << "dissipation violations: " << sum.dissipation_violations
              << "\n";
  }
  return code;
}

// --- verify -----------------------------------------------------------------

struct VerifyArgs {
  std::string suite;
  VerifyOptions opts;
  std::optional<std::uint64_t> seed;
  std::string report;
};

int CmdVerify(VerifyArgs a) {
  a.opts.seed = a.seed.value_or(DefaultSeed());
  const VerifyReport r = RunVerifySuite(a.suite, a.opts);
  EmitJson(a.report, VerifyReportToJson(r, a.opts));
  std::cerr << a.suite << ": " << (r.passed ? "pass" : "FAIL") << " ("
            << r.failures << "/" << r.instances << " failing)\n";
  return r.passed ? kExitOk : kExitFailure;
}

// --- phase-plane ------------------------------------------------------------

struct PhasePlaneArgs {
  double y_bar = 1.0;
  double lo = -3.0;
  double hi = 3.0;
  int steps = 61;
  std::vector<double> sum_levels;
  std::vector<double> product_levels;
  std::string out = "phase_plane.csv";
  std::string overlays;
};

int CmdPhasePlane(const PhasePlaneArgs& a) {
  if (a.steps < 1) throw ConfigError("--steps must be positive", "steps");
  PhaseGrid grid;
  grid.p_min = grid.q_min = a.lo;
  grid.p_max = grid.q_max = a.hi;
  grid.steps = a.steps;
  const PhasePlane plane =
      PhasePlaneField(a.y_bar, grid, a.sum_levels, a.product_levels);
  std::ostringstream csv;
  WritePhasePlaneCsv(csv, plane);
  WriteFile(a.out, csv.str());
  const std::string overlays =
      a.overlays.empty()
          ? std::filesystem::path(a.out).replace_extension(".overlays.json").string()
          : a.overlays;
  WriteFile(overlays, DumpJson(PhasePlaneOverlaysToJson(plane)));
  std::cout << "wrote " << plane.samples.size() << " samples to " << a.out
            << " and " << plane.overlays.size() << " overlay curves to "
            << overlays << "\n";
  return kExitOk;
}

// --- equilibria -------------------------------------------------------------

struct EquilibriaArgs {
  std::string target;
  std::string target_file;
  int k = 0;
  std::vector<int> keep;
  bool keep_all = false;
  std::vector<double> balance;
  std::optional<std::uint64_t> gamma_seed;
  std::string state;
  std::string out;
};

Matrix TargetFromArgs(const std::string& inline_json, const std::string& file) {
  if (!inline_json.empty() && !file.empty()) {
    throw ConfigError("give either --target or --target-file, not both");
  }
  if (!file.empty()) return MatrixFromJson(ReadJsonFile(file), "target file");
  if (inline_json.empty()) throw ConfigError("--target or --target-file required");
  return ParseMatrixArg(inline_json, "--target");
}

int CmdEquilibriaMake(const EquilibriaArgs& a) {
  const ProblemSpec spec(TargetFromArgs(a.target, a.target_file), a.k);
  std::vector<int> keep = a.keep;
  if (a.keep_all) {
    keep.clear();
    for (int i = 0; i < NumericalRank(spec.target()); ++i) keep.push_back(i);
  }
  std::optional<Matrix> gamma;
  if (a.gamma_seed) {
    auto rng = MakeStream(*a.gamma_seed, "equilibria/gamma");
    gamma = RandomOrthogonal(rng, spec.k());
  }
  const ParamState z = MakeSpuriousEquilibrium(spec, keep, a.balance, gamma);
  Json j = StateFileJson(spec, z);
  j["residual"] = EquilibriumResidual(spec, z);
  j["loss"] = Loss(spec, z);
  EmitJson(a.out, j);
  return kExitOk;
}

int CmdEquilibriaCertify(const EquilibriaArgs& a) {
  if (a.state.empty()) throw ConfigError("--state required");
  const StateFile sf = ReadStateFile(a.state);
  try {
    const EquilibriumCertificate cert = CertifyEquilibrium(sf.spec, sf.state);
    Json j = CertificateToJson(cert);
    j["check"] = CheckCertificate(sf.spec, sf.state, cert).Worst();
    j["residual"] = EquilibriumResidual(sf.spec, sf.state);
    EmitJson(a.out, j);
    return kExitOk;
  } catch (const NotAnEquilibrium& e) {
    std::cerr << "not an equilibrium: field norm " << FormatDouble(e.residual())
              << "\n";
  } catch (const CertificationFailure& e) {
    std::cerr << "certification failed: worst invariant residual "
              << FormatDouble(e.worst_residual()) << "\n";
  }
  return kExitFailure;
}

// --- linearize --------------------------------------------------------------

struct LinearizeArgs {
  std::string target;
  std::string target_file;
  int k = 0;
  std::optional<std::uint64_t> omega_seed;
  std::string state;
  std::vector<double> xis;
  std::string out;
};

bool ReportPasses(const SpectralReport& r) {
  return r.multiset_error <= 1e-8 && r.WorstRelativeResidual() <= 1e-8 &&
         r.WorstOrthonormalityError() <= 1e-10;
}

int CmdLinearizeOrigin(const LinearizeArgs& a) {
  // The origin closed form holds for any inner width.
  const ProblemSpec spec(TargetFromArgs(a.target, a.target_file), a.k, true);
  std::optional<Matrix> omega;
  if (a.omega_seed) {
    auto rng = MakeStream(*a.omega_seed, "linearize/omega");
    omega = RandomOrthogonal(rng, spec.k());
  }
  const SpectralReport r = OriginSpectrum(spec, omega, true);
  EmitJson(a.out, SpectralReportToJson(r));
  return ReportPasses(r) ? kExitOk : kExitFailure;
}

int CmdLinearizeTarget(const LinearizeArgs& a) {
  if (a.state.empty()) throw ConfigError("--state required");
  const StateFile sf = ReadStateFile(a.state);
  const SpectralReport r = TargetSetSpectrum(sf.spec, sf.state);
  Json j = SpectralReportToJson(r);
  if (!a.xis.empty()) {
    j["imbalance"] = ImbalanceTableToJson(ImbalanceStudy(sf.spec, sf.state, a.xis));
  }
  EmitJson(a.out, j);
  bool ok = ReportPasses(r);
  if (r.analytic_prediction) ok &= r.counts.negative == sf.spec.m() * sf.spec.n();
  return ok ? kExitOk : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disturbed gradient flows of overparameterized factorization"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario file");
  simulate->add_option("scenario", sim.scenario, "Scenario JSON")->required();
  simulate->add_flag("--json", sim.json, "Print the summary as JSON");

  VerifyArgs ver;
  auto* verify = app.add_subcommand("verify", "Run a randomized property suite");
  std::string suites;
  for (const auto& s : VerifySuiteNames()) suites += (suites.empty() ? "" : ", ") + s;
  verify->add_option("suite", ver.suite, "One of: " + suites)->required();
  verify->add_option("--seed", ver.seed, "Seed (default $ISSGF_SEED or 0)");
  verify->add_option("--count", ver.opts.count, "Randomized instances")
      ->check(CLI::PositiveNumber);
  verify->add_option("--threads", ver.opts.threads, "Worker threads (0 = all)")
      ->check(CLI::NonNegativeNumber);
  verify->add_option("--n", ver.opts.n, "Rows of the target (0 = random)");
  verify->add_option("--m", ver.opts.m, "Columns of the target (0 = random)");
  verify->add_option("--k", ver.opts.k, "Inner width (0 = random)");
  verify->add_option("--alpha", ver.opts.alpha, "Safe-set radius");
  verify->add_option("--ybar", ver.opts.y_bar, "Scalar target");
  verify->add_option("--t-end", ver.opts.t_end, "Simulated horizon")
      ->check(CLI::PositiveNumber);
  verify->add_option("--report", ver.report, "JSON report path (default stdout)");

  PhasePlaneArgs pp;
  auto* phase = app.add_subcommand("phase-plane", "Export the scalar phase plane");
  phase->add_option("--ybar", pp.y_bar, "Scalar target");
  phase->add_option("--min", pp.lo, "Lower bound of both axes");
  phase->add_option("--max", pp.hi, "Upper bound of both axes");
  phase->add_option("--steps", pp.steps, "Samples per axis");
  phase->add_option("--sum-levels", pp.sum_levels, "Levels c of |P + Q| = c")
      ->delimiter(',');
  phase->add_option("--product-levels", pp.product_levels, "Levels c of PQ = c")
      ->delimiter(',');
  phase->add_option("--out", pp.out, "Field CSV path");
  phase->add_option("--overlays", pp.overlays,
                    "Overlay JSON path (default <out>.overlays.json)");

  EquilibriaArgs eq;
  auto* equilibria = app.add_subcommand("equilibria", "Construct or certify equilibria");
  equilibria->require_subcommand(1);
  auto* make = equilibria->add_subcommand("make", "Build a spurious equilibrium");
  make->add_option("--target", eq.target, "Target as a JSON matrix");
  make->add_option("--target-file", eq.target_file, "Target JSON file");
  make->add_option("--k", eq.k, "Inner width")->required();
  make->add_option("--keep", eq.keep, "Kept singular indices (0-based)")
      ->delimiter(',');
  make->add_flag("--keep-all", eq.keep_all, "Keep every nonzero singular value");
  make->add_option("--balance", eq.balance, "Per-index balance factors")
      ->delimiter(',');
  make->add_option("--gamma-seed", eq.gamma_seed, "Random orthogonal Gamma");
  make->add_option("--out", eq.out, "State JSON path (default stdout)");
  auto* certify = equilibria->add_subcommand("certify", "Certify a state file");
  certify->add_option("--state", eq.state, "State JSON")->required();
  certify->add_option("--out", eq.out, "Certificate JSON path (default stdout)");

  LinearizeArgs lin;
  auto* linearize = app.add_subcommand("linearize", "Spectra of the linearization");
  linearize->require_subcommand(1);
  auto* origin = linearize->add_subcommand("origin", "Spectrum at the origin");
  origin->add_option("--target", lin.target, "Target as a JSON matrix");
  origin->add_option("--target-file", lin.target_file, "Target JSON file");
  origin->add_option("--k", lin.k, "Inner width")->required();
  origin->add_option("--omega-seed", lin.omega_seed, "Random orthogonal Omega");
  origin->add_option("--out", lin.out, "Report JSON path (default stdout)");
  auto* target = linearize->add_subcommand("target", "Spectrum on the target set");
  target->add_option("--state", lin.state, "State JSON")->required();
  target->add_option("--xis", lin.xis, "Imbalance factors")->delimiter(',');
  target->add_option("--out", lin.out, "Report JSON path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*simulate) return CmdSimulate(sim);
    if (*verify) return CmdVerify(ver);
    if (*phase) return CmdPhasePlane(pp);
    if (*make) return CmdEquilibriaMake(eq);
    if (*certify) return CmdEquilibriaCertify(eq);
    if (*origin) return CmdLinearizeOrigin(lin);
    if (*target) return CmdLinearizeTarget(lin);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UnsupportedConfiguration& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitConfig;
}
