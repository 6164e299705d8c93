#pragma once

#include <string>

#include <json.hpp>

#include "nep/asymptotics.hpp"
#include "nep/geometry.hpp"
#include "nep/montecarlo.hpp"
#include "nep/robin_bie.hpp"

namespace nep::io {

/// Problem file schema:
///   { "head": {"kind": "unit-disk"} | {"kind": "curve", "points": [[x,y], ...]},
///     "necks": [{"angle_or_s": number, "epsilon": number, "length": number}, ...] }
/// For the unit disk, neck positions are angles in radians (== arc length);
/// for curves they are arc lengths along the boundary.
ProblemSpec problem_from_json(const nlohmann::json& j);
ProblemSpec load_problem(const std::string& path);
nlohmann::json to_json(const ProblemSpec& spec);

nlohmann::json to_json(const mc::WalkerStats& st);
nlohmann::json to_json(const bie::ComparisonRecord& rec);

/// {C: [...], C_eps, T: [[...]], F: [...], Cconst, error_order, u_at: [{x,y,u}]}
nlohmann::json asymptotic_record(const asym::AsymptoticSolution& sol,
                                 const std::vector<Vec2>& pts,
                                 const std::vector<double>& values);

}  // namespace nep::io
