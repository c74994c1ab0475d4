#include "issgf/trajectory_io.h"

#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "issgf/errors.h"

namespace issgf {

namespace {

const char* const kCsvChannels[] = {"loss", "sigma_min_P", "sigma_min_Q",
                                    "lhs",  "rhs",         "dist_norm"};

std::vector<double>* CsvChannel(MonitorChannels* m, const std::string& name) {
  if (name == "loss") return &m->loss;
  if (name == "sigma_min_P") return &m->sigma_min_P;
  if (name == "sigma_min_Q") return &m->sigma_min_Q;
  if (name == "lhs") return &m->lhs;
  if (name == "rhs") return &m->rhs;
  if (name == "dist_norm") return &m->dist_norm;
  return nullptr;
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    if (!cell.empty() && cell.back() == '\r') cell.pop_back();
    out.push_back(cell);
  }
  return out;
}

// Parses "P_3_1" into ('P', 3, 1).
bool ParseEntryName(const std::string& name, char* which, int* row, int* col) {
  if (name.size() < 5 || (name[0] != 'P' && name[0] != 'Q') || name[1] != '_') {
    return false;
  }
  const auto sep = name.find('_', 2);
  if (sep == std::string::npos) return false;
  try {
    *row = std::stoi(name.substr(2, sep - 2));
    *col = std::stoi(name.substr(sep + 1));
  } catch (const std::exception&) {
    return false;
  }
  *which = name[0];
  return true;
}

}  // namespace

void WriteTrajectoryCsv(std::ostream& out, const Trajectory& traj) {
  const int n = traj.n(), m = traj.m(), k = traj.k;
  out << "t";
  for (const char* c : kCsvChannels) out << ',' << c;
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < n; ++i) out << ",P_" << i << '_' << j;
  for (int j = 0; j < k; ++j)
    for (int i = 0; i < m; ++i) out << ",Q_" << i << '_' << j;
  out << '\n';
  const auto& mon = traj.monitors;
  const std::vector<const std::vector<double>*> channels = {
      &mon.loss, &mon.sigma_min_P, &mon.sigma_min_Q,
      &mon.lhs,  &mon.rhs,         &mon.dist_norm};
  for (std::size_t s = 0; s < traj.size(); ++s) {
    out << FormatDouble(traj.times[s]);
    for (const auto* ch : channels) out << ',' << FormatDouble((*ch)[s]);
    const Vector p = Vec(traj.states[s].P);
    const Vector q = Vec(traj.states[s].Q);
    for (Eigen::Index i = 0; i < p.size(); ++i) out << ',' << FormatDouble(p(i));
    for (Eigen::Index i = 0; i < q.size(); ++i) out << ',' << FormatDouble(q(i));
    out << '\n';
  }
}

Trajectory ReadTrajectoryCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw InvalidArgument("trajectory CSV: missing header");
  }
  const auto header = SplitCsv(line);
  if (header.empty() || header[0] != "t") {
    throw InvalidArgument("trajectory CSV: first column must be 't'");
  }
  int n = 0, m = 0, kp = 0, kq = 0;
  struct Slot {
    char which = 0;
    int row = 0, col = 0;
    std::vector<double>* channel = nullptr;
  };
  Trajectory traj;
  std::vector<Slot> slots(header.size());
  for (std::size_t c = 1; c < header.size(); ++c) {
    Slot& s = slots[c];
    if (auto* ch = CsvChannel(&traj.monitors, header[c])) {
      s.channel = ch;
    } else if (ParseEntryName(header[c], &s.which, &s.row, &s.col)) {
      if (s.which == 'P') {
        n = std::max(n, s.row + 1);
        kp = std::max(kp, s.col + 1);
      } else {
        m = std::max(m, s.row + 1);
        kq = std::max(kq, s.col + 1);
      }
    } else {
      throw InvalidArgument("trajectory CSV: unknown column '" + header[c] + "'");
    }
  }
  if (n == 0 || m == 0 || kp != kq) {
    throw InvalidArgument("trajectory CSV: cannot infer P/Q shapes");
  }
  traj.target = Matrix::Zero(n, m);
  traj.k = kp;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = SplitCsv(line);
    if (cells.size() != header.size()) {
      throw InvalidArgument("trajectory CSV: ragged row at line " +
                            std::to_string(line_no));
    }
    ParamState z{Matrix::Zero(n, kp), Matrix::Zero(m, kp)};
    try {
      traj.times.push_back(std::stod(cells[0]));
      for (std::size_t c = 1; c < cells.size(); ++c) {
        const double v = std::stod(cells[c]);
        const Slot& s = slots[c];
        if (s.channel) {
          s.channel->push_back(v);
        } else if (s.which == 'P') {
          z.P(s.row, s.col) = v;
        } else {
          z.Q(s.row, s.col) = v;
        }
      }
    } catch (const std::logic_error&) {
      throw InvalidArgument("trajectory CSV: bad number at line " +
                            std::to_string(line_no));
    }
    traj.states.push_back(std::move(z));
  }
  return traj;
}

Json DisturbanceSpecToJson(const DisturbanceSpec& d) {
  Json j{{"kind", ToString(d.kind)},
         {"budget", d.budget},
         {"norm", ToString(d.norm)},
         {"seed", d.seed},
         {"frequency", d.frequency},
         {"phase", d.phase}};
  if (d.U_direction) {
    j["U"] = MatrixToJson(*d.U_direction);
    j["V"] = MatrixToJson(*d.V_direction);
  }
  return j;
}

DisturbanceSpec DisturbanceSpecFromJson(const Json& j) {
  if (!j.is_object()) throw InvalidArgument("disturbance: expected an object");
  DisturbanceSpec d;
  try {
    d.kind = ParseDisturbanceKind(j.value("kind", std::string("zero")));
    d.budget = j.value("budget", 0.0);
    d.norm = ParseNormKind(j.value("norm", std::string("frobenius-joint")));
    d.seed = j.value("seed", std::uint64_t{0});
    d.frequency = j.value("frequency", 1.0);
    d.phase = j.value("phase", 0.0);
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("disturbance: ") + e.what());
  }
  if (j.contains("U") || j.contains("V")) {
    if (!j.contains("U") || !j.contains("V")) {
      throw InvalidArgument("disturbance: U and V must be given together");
    }
    d.U_direction = MatrixFromJson(j["U"], "disturbance.U");
    d.V_direction = MatrixFromJson(j["V"], "disturbance.V");
  }
  d.Validate();
  return d;
}

Json IntegratorConfigToJson(const IntegratorConfig& c) {
  return Json{{"method", ToString(c.method)}, {"dt", c.dt},
              {"abs_tol", c.abs_tol},         {"rel_tol", c.rel_tol},
              {"dt_min", c.dt_min},           {"dt_max", c.dt_max},
              {"t_end", c.t_end},             {"record_stride", c.record_stride}};
}

IntegratorConfig IntegratorConfigFromJson(const Json& j) {
  if (!j.is_object()) throw InvalidArgument("integrator: expected an object");
  IntegratorConfig c;
  try {
    c.method = ParseIntegratorMethod(j.value("method", std::string("rk4-fixed")));
    c.dt = j.value("dt", c.dt);
    c.abs_tol = j.value("abs_tol", c.abs_tol);
    c.rel_tol = j.value("rel_tol", c.rel_tol);
    c.dt_min = j.value("dt_min", c.dt_min);
    c.dt_max = j.value("dt_max", c.dt_max);
    c.t_end = j.value("t_end", c.t_end);
    c.record_stride = j.value("record_stride", c.record_stride);
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("integrator: ") + e.what());
  }
  c.Validate();
  return c;
}

Json TrajectoryToJson(const Trajectory& traj) {
  const auto& mon = traj.monitors;
  Json states = Json::array();
  for (const auto& z : traj.states) {
    states.push_back(Json{{"P", MatrixToJson(z.P)}, {"Q", MatrixToJson(z.Q)}});
  }
  Json j{
      {"config",
       {{"n", traj.n()},
        {"m", traj.m()},
        {"k", traj.k},
        {"target", MatrixToJson(traj.target)},
        {"disturbance", DisturbanceSpecToJson(traj.disturbance)},
        {"integrator", IntegratorConfigToJson(traj.integrator)}}},
      {"times", VectorToJson(traj.times)},
      {"monitors",
       {{"loss", VectorToJson(mon.loss)},
        {"sigma_min_P", VectorToJson(mon.sigma_min_P)},
        {"sigma_min_Q", VectorToJson(mon.sigma_min_Q)},
        {"lhs", VectorToJson(mon.lhs)},
        {"rhs", VectorToJson(mon.rhs)},
        {"dist_norm", VectorToJson(mon.dist_norm)},
        {"dist_declared_norm", VectorToJson(mon.dist_declared_norm)},
        {"sum_norm_sq", VectorToJson(mon.sum_norm_sq)},
        {"field_norm", VectorToJson(mon.field_norm)}}},
      {"states", states}};
  j["converged_at"] = traj.converged_at ? Json(*traj.converged_at) : Json(nullptr);
  return j;
}

Trajectory TrajectoryFromJson(const Json& j) {
  Trajectory traj;
  try {
    const Json& cfg = j.at("config");
    traj.target = MatrixFromJson(cfg.at("target"), "config.target");
    traj.k = cfg.at("k").get<int>();
    traj.disturbance = DisturbanceSpecFromJson(cfg.at("disturbance"));
    traj.integrator = IntegratorConfigFromJson(cfg.at("integrator"));
    traj.times = VectorFromJson(j.at("times"), "times");
    const Json& mon = j.at("monitors");
    auto& m = traj.monitors;
    m.loss = VectorFromJson(mon.at("loss"), "loss");
    m.sigma_min_P = VectorFromJson(mon.at("sigma_min_P"), "sigma_min_P");
    m.sigma_min_Q = VectorFromJson(mon.at("sigma_min_Q"), "sigma_min_Q");
    m.lhs = VectorFromJson(mon.at("lhs"), "lhs");
    m.rhs = VectorFromJson(mon.at("rhs"), "rhs");
    m.dist_norm = VectorFromJson(mon.at("dist_norm"), "dist_norm");
    m.dist_declared_norm =
        VectorFromJson(mon.at("dist_declared_norm"), "dist_declared_norm");
    m.sum_norm_sq = VectorFromJson(mon.at("sum_norm_sq"), "sum_norm_sq");
    m.field_norm = VectorFromJson(mon.at("field_norm"), "field_norm");
    for (const auto& s : j.at("states")) {
      traj.states.push_back({MatrixFromJson(s.at("P"), "states.P"),
                             MatrixFromJson(s.at("Q"), "states.Q")});
    }
    if (!j.at("converged_at").is_null()) {
      traj.converged_at = j.at("converged_at").get<double>();
    }
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("trajectory JSON: ") + e.what());
  }
  if (traj.states.size() != traj.times.size() ||
      traj.monitors.loss.size() != traj.times.size()) {
    throw InvalidArgument("trajectory JSON: channel lengths differ");
  }
  return traj;
}

}  // namespace issgf
