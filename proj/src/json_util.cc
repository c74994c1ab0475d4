#include "issgf/json_util.h"

#include <cmath>
#include <cstdio>

#include "issgf/errors.h"

namespace issgf {

Json MatrixToJson(const Matrix& m) {
  Json data = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

Matrix MatrixFromJson(const Json& j, const std::string& field) {
  try {
    if (j.is_array()) {
      const auto rows = static_cast<Eigen::Index>(j.size());
      const auto cols = rows == 0 ? 0 : static_cast<Eigen::Index>(j[0].size());
      Matrix m(rows, cols);
      for (Eigen::Index r = 0; r < rows; ++r) {
        if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != cols) {
          throw InvalidArgument(field + ": ragged nested array");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
          m(r, c) = j[r][c].get<double>();
        }
      }
      return m;
    }
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const Json& data = j.at("data");
    if (rows < 0 || cols < 0 ||
        static_cast<Eigen::Index>(data.size()) != rows * cols) {
      throw InvalidArgument(field + ": data length does not match shape");
    }
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
      for (Eigen::Index c = 0; c < cols; ++c) {
        m(r, c) = data[r * cols + c].get<double>();
      }
    }
    return m;
  } catch (const Json::exception& e) {
    throw InvalidArgument(field + ": " + e.what());
  }
}

Json VectorToJson(const std::vector<double>& v) {
  Json out = Json::array();
  for (double x : v) {
    if (std::isfinite(x)) {
      out.push_back(x);
    } else {
      out.push_back(nullptr);
    }
  }
  return out;
}

std::vector<double> VectorFromJson(const Json& j, const std::string& field) {
  if (!j.is_array()) throw InvalidArgument(field + ": expected an array");
  std::vector<double> v;
  v.reserve(j.size());
  for (const auto& x : j) {
    if (x.is_null()) {
      v.push_back(std::nan(""));
    } else if (x.is_number()) {
      v.push_back(x.get<double>());
    } else {
      throw InvalidArgument(field + ": expected numbers");
    }
  }
  return v;
}

std::string DumpJson(const Json& j) { return j.dump(2) + "\n"; }

std::string FormatDouble(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace issgf
