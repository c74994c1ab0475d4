#include "issgf/scenario.h"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "issgf/equilibria.h"
#include "issgf/errors.h"
#include "issgf/random.h"
#include "issgf/trajectory_io.h"

namespace issgf {

std::string ToString(InitKind kind) {
  switch (kind) {
    case InitKind::kExplicit:
      return "explicit";
    case InitKind::kSeededRandom:
      return "seeded-random";
    case InitKind::kSpurious:
      return "spurious";
  }
  return "unknown";
}

namespace {

void RejectUnknownKeys(const Json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      const std::string field =
          where.empty() ? item.key() : where + "." + item.key();
      throw ConfigError("scenario: unknown field '" + field + "'", field);
    }
  }
}

const Json& RequireObject(const Json& j, const std::string& field) {
  if (!j.contains(field)) {
    throw ConfigError("scenario: missing field '" + field + "'", field);
  }
  const Json& v = j.at(field);
  if (!v.is_object()) {
    throw ConfigError("scenario: field '" + field + "' must be an object",
                      field);
  }
  return v;
}

// Runs `body`, rethrowing parse failures as ConfigError tagged with `field`.
template <typename Body>
auto Field(const std::string& field, Body&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const ConfigError&) {
    throw;
  } catch (const Json::exception& e) {
    throw ConfigError("scenario: field '" + field + "': " + e.what(), field);
  } catch (const InvalidArgument& e) {
    throw ConfigError("scenario: field '" + field + "': " + e.what(), field);
  }
}

ProblemSource ParseProblem(const Json& j) {
  RejectUnknownKeys(j, {"target", "dataset_csv", "n", "m", "k",
                        "allow_underparameterized"},
                    "problem");
  ProblemSource p;
  p.k = Field("problem.k", [&] { return j.at("k").get<int>(); });
  p.allow_underparameterized = Field("problem.allow_underparameterized", [&] {
    return j.value("allow_underparameterized", false);
  });
  const bool has_target = j.contains("target");
  const bool has_data = j.contains("dataset_csv");
  if (has_target == has_data) {
    throw ConfigError(
        "scenario: problem needs exactly one of 'target' or 'dataset_csv'",
        "problem");
  }
  if (has_target) {
    p.target = Field("problem.target",
                     [&] { return MatrixFromJson(j.at("target"), "target"); });
  } else {
    p.dataset_csv = Field("problem.dataset_csv",
                          [&] { return j.at("dataset_csv").get<std::string>(); });
    p.n = Field("problem.n", [&] { return j.at("n").get<int>(); });
    p.m = Field("problem.m", [&] { return j.at("m").get<int>(); });
    if (p.n < 1 || p.m < 1) {
      throw ConfigError("scenario: problem.n and problem.m must be positive",
                        "problem");
    }
  }
  if (p.k < 1) throw ConfigError("scenario: problem.k must be positive", "problem.k");
  return p;
}

InitSpec ParseInit(const Json& j) {
  InitSpec init;
  const std::string kind =
      Field("init.kind", [&] { return j.at("kind").get<std::string>(); });
  if (kind == "explicit") {
    RejectUnknownKeys(j, {"kind", "P", "Q"}, "init");
    init.kind = InitKind::kExplicit;
    init.state.P = Field("init.P", [&] { return MatrixFromJson(j.at("P"), "P"); });
    init.state.Q = Field("init.Q", [&] { return MatrixFromJson(j.at("Q"), "Q"); });
  } else if (kind == "seeded-random") {
    RejectUnknownKeys(j, {"kind", "scale"}, "init");
    init.kind = InitKind::kSeededRandom;
    init.scale = Field("init.scale", [&] { return j.value("scale", 1.0); });
    if (!(init.scale >= 0.0)) {
      throw ConfigError("scenario: init.scale must be nonnegative", "init.scale");
    }
  } else if (kind == "spurious") {
    RejectUnknownKeys(j, {"kind", "keep", "balance"}, "init");
    init.kind = InitKind::kSpurious;
    init.keep = Field("init.keep", [&] { return j.at("keep").get<std::vector<int>>(); });
    init.balance = Field("init.balance", [&] {
      return j.value("balance", std::vector<double>{});
    });
  } else {
    throw ConfigError("scenario: unknown init.kind '" + kind +
                          "' (expected explicit, seeded-random or spurious)",
                      "init.kind");
  }
  return init;
}

std::vector<OutputRequest> ParseOutputs(const Json& j) {
  if (!j.is_array()) throw ConfigError("scenario: outputs must be an array", "outputs");
  std::vector<OutputRequest> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string where = "outputs[" + std::to_string(i) + "]";
    const Json& o = j[i];
    if (!o.is_object()) throw ConfigError("scenario: " + where + " must be an object", where);
    RejectUnknownKeys(o, {"format", "path"}, where);
    OutputRequest r;
    r.format = Field(where + ".format", [&] { return o.at("format").get<std::string>(); });
    r.path = Field(where + ".path", [&] { return o.at("path").get<std::string>(); });
    if (r.format != "csv" && r.format != "json") {
      throw ConfigError("scenario: " + where + ".format must be csv or json",
                        where + ".format");
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

Scenario ParseScenario(const std::string& text, std::uint64_t default_seed) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    // Translate the byte offset into line and column.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError("scenario: syntax error at line " + std::to_string(line) +
                      ", column " + std::to_string(col) + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("scenario: top level must be an object");
  RejectUnknownKeys(j, {"version", "seed", "problem", "init", "disturbance",
                        "integrator", "outputs"},
                    "");
  Scenario s;
  s.version = Field("version", [&] { return j.at("version").get<int>(); });
  if (s.version != kScenarioVersion) {
    throw ConfigError("scenario: unsupported version " +
                          std::to_string(s.version) + " (expected " +
                          std::to_string(kScenarioVersion) + ")",
                      "version");
  }
  s.seed = Field("seed", [&] { return j.value("seed", default_seed); });
  s.problem = ParseProblem(RequireObject(j, "problem"));
  s.init = j.contains("init") ? ParseInit(RequireObject(j, "init")) : InitSpec{};
  if (j.contains("disturbance")) {
    const Json& d = RequireObject(j, "disturbance");
    s.disturbance = Field("disturbance", [&] { return DisturbanceSpecFromJson(d); });
    if (!d.contains("seed")) s.disturbance.seed = DeriveSeed(s.seed, "disturbance");
  } else {
    s.disturbance.seed = DeriveSeed(s.seed, "disturbance");
  }
  if (j.contains("integrator")) {
    const Json& c = RequireObject(j, "integrator");
    s.integrator = Field("integrator", [&] { return IntegratorConfigFromJson(c); });
  }
  if (j.contains("outputs")) s.outputs = ParseOutputs(j.at("outputs"));
  return s;
}

Scenario LoadScenarioFile(const std::string& path, std::uint64_t default_seed) {
  std::ifstream in(path);
  // A missing scenario is a configuration problem rather than an I/O fault.
  if (!in) throw ConfigError("cannot open scenario file '" + path + "'", "scenario");
  std::ostringstream text;
  text << in.rdbuf();
  if (in.bad()) throw IoError("cannot read scenario file '" + path + "'");
  return ParseScenario(text.str(), default_seed);
}

Json ScenarioToJson(const Scenario& s) {
  Json problem{{"k", s.problem.k}};
  if (s.problem.allow_underparameterized) problem["allow_underparameterized"] = true;
  if (s.problem.target) {
    problem["target"] = MatrixToJson(*s.problem.target);
  } else {
    problem["dataset_csv"] = s.problem.dataset_csv.value_or("");
    problem["n"] = s.problem.n;
    problem["m"] = s.problem.m;
  }
  Json init{{"kind", ToString(s.init.kind)}};
  switch (s.init.kind) {
    case InitKind::kExplicit:
      init["P"] = MatrixToJson(s.init.state.P);
      init["Q"] = MatrixToJson(s.init.state.Q);
      break;
    case InitKind::kSeededRandom:
      init["scale"] = s.init.scale;
      break;
    case InitKind::kSpurious:
      init["keep"] = s.init.keep;
      init["balance"] = s.init.balance;
      break;
  }
  Json outputs = Json::array();
  for (const auto& o : s.outputs) {
    outputs.push_back(Json{{"format", o.format}, {"path", o.path}});
  }
  return Json{{"version", s.version},
              {"seed", s.seed},
              {"problem", problem},
              {"init", init},
              {"disturbance", DisturbanceSpecToJson(s.disturbance)},
              {"integrator", IntegratorConfigToJson(s.integrator)},
              {"outputs", outputs}};
}

std::string ResolvePath(const std::string& base_dir, const std::string& path) {
  const std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  return (std::filesystem::path(base_dir) / p).string();
}

ProblemSpec ResolveProblem(const Scenario& s, const std::string& base_dir) {
  if (s.problem.target) {
    return Field("problem", [&] {
      return ProblemSpec(*s.problem.target, s.problem.k,
                         s.problem.allow_underparameterized);
    });
  }
  const std::string path = ResolvePath(base_dir, *s.problem.dataset_csv);
  {
    std::ifstream probe(path);
    if (!probe) throw IoError("cannot open dataset '" + path + "'");
  }
  const Dataset data = Field("problem.dataset_csv", [&] {
    return ReadDatasetCsvFile(path, s.problem.n, s.problem.m);
  });
  return Field("problem", [&] {
    return ProblemSpec(ThetaStar(data), s.problem.k,
                       s.problem.allow_underparameterized);
  });
}

ParamState ResolveInit(const Scenario& s, const ProblemSpec& spec) {
  switch (s.init.kind) {
    case InitKind::kExplicit:
      Field("init", [&] {
        RequireConformant(spec, s.init.state, "init");
        return 0;
      });
      return s.init.state;
    case InitKind::kSeededRandom: {
      auto rng = MakeStream(s.seed, "init");
      ParamState z;
      z.P = UniformMatrix(rng, spec.n(), spec.k(), -s.init.scale, s.init.scale);
      z.Q = UniformMatrix(rng, spec.m(), spec.k(), -s.init.scale, s.init.scale);
      return z;
    }
    case InitKind::kSpurious:
      return Field("init", [&] {
        return MakeSpuriousEquilibrium(spec, s.init.keep, s.init.balance);
      });
  }
  throw ConfigError("scenario: unknown init kind", "init.kind");
}

SimulationSummary Summarize(const Trajectory& traj) {
  SimulationSummary s;
  if (traj.size() == 0) return s;
  s.final_time = traj.times.back();
  s.final_loss = traj.monitors.loss.back();
  s.outcome = ClassifyOutcome(traj);
  s.converged_at = traj.converged_at;
  s.dissipation_violations = LossMonitorCheck(traj).violations;
  s.recorded_steps = traj.size();
  return s;
}

Json SummaryToJson(const SimulationSummary& s) {
  return Json{{"final_time", s.final_time},
              {"final_loss", s.final_loss},
              {"outcome", ToString(s.outcome)},
              {"converged_at",
               s.converged_at ? Json(*s.converged_at) : Json(nullptr)},
              {"dissipation_violations", s.dissipation_violations},
              {"recorded_steps", s.recorded_steps}};
}

}  // namespace issgf
