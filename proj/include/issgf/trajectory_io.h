#pragma once

/// @file
/// Trajectory export and import.
///
/// CSV columns: t,loss,sigma_min_P,sigma_min_Q,lhs,rhs,dist_norm followed by
/// vec(P) as P_<row>_<col> and vec(Q) as Q_<row>_<col> (column-major order).
/// JSON carries the full record: config echo, every monitor channel, states.

#include <iosfwd>
#include <string>

#include "issgf/flow_simulator.h"
#include "issgf/json_util.h"

namespace issgf {

void WriteTrajectoryCsv(std::ostream& out, const Trajectory& traj);

/// Reads the CSV layout above. Dimensions are inferred from the column names;
/// the target is not part of the CSV and comes back as an n x m zero matrix,
/// and channels absent from the CSV come back empty.
Trajectory ReadTrajectoryCsv(std::istream& in);

Json DisturbanceSpecToJson(const DisturbanceSpec& d);
DisturbanceSpec DisturbanceSpecFromJson(const Json& j);
Json IntegratorConfigToJson(const IntegratorConfig& c);
IntegratorConfig IntegratorConfigFromJson(const Json& j);

Json TrajectoryToJson(const Trajectory& traj);
Trajectory TrajectoryFromJson(const Json& j);

}  // namespace issgf
