#pragma once

#include <vector>

#include "json.hpp"
#include "thumbopt/config.hpp"
#include "thumbopt/reference.hpp"

namespace testsupport {

using namespace thumbopt;

inline config::RunConfig reference_config() {
    return config::parse_run_config(nlohmann::json::parse(reference::kHandJson));
}

inline const HandModel& reference_hand() {
    static const HandModel h = config::build_hand(reference_config());
    return h;
}

inline kin::TrajectorySample sample(const geom::Point3& tip, const geom::Vec3& tangent, const geom::Vec3& pad,
                                    const geom::Vec3& side) {
    return {tip, geom::UnitVec3(tangent), geom::UnitVec3(pad), geom::UnitVec3(side)};
}

inline kin::Trajectory single(const kin::TrajectorySample& s) { return kin::Trajectory({s, s}, {}); }

}  // namespace testsupport
