#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "thumbopt/geom.hpp"
#include "thumbopt/kinematics.hpp"

namespace thumbopt {

struct FingertipRadii {
    double thumb = 8.0;
    double index = 8.0;
    double middle = 8.0;
};

// The thumb is a single rigid tip rotating about the axis placed by an AxisConfig.
struct ThumbModel {
    kin::TipOffset tip{};
    // Rotation angles about the axis, ordered from the lateral side toward the precision side.
    std::vector<double> sweep;
    double pad_tilt = 0.0;
};

// Everything about the hand except the thumb axis placement.
struct HandModel {
    FingertipRadii radii{};
    ThumbModel thumb{};
    kin::Trajectory index;
    kin::Trajectory middle;
    // Index samples [manip_begin, manip_end) form the manipulation set; manip_end == 0 means all.
    std::size_t manip_begin = 0;
    std::size_t manip_end = 0;

    std::size_t manip_stop() const { return manip_end == 0 ? index.size() : manip_end; }

    kin::Trajectory thumb_trajectory(const geom::AxisConfig& cfg) const {
        return kin::thumb_trajectory(cfg, thumb.tip, thumb.sweep, thumb.pad_tilt);
    }

    void validate() const {
        if (!(radii.thumb > 0.0 && radii.index > 0.0 && radii.middle > 0.0)) {
            throw std::invalid_argument("hand model: fingertip radii must be positive");
        }
        if (thumb.sweep.size() < 2) {
            throw std::invalid_argument("hand model: thumb sweep needs at least two steps");
        }
        if (!(thumb.tip.radial > 0.0)) {
            throw kin::DegenerateThumb("hand model: thumb radial offset must be positive");
        }
        if (index.size() < 2 || middle.size() < 2) {
            throw std::invalid_argument("hand model: index and middle trajectories are required");
        }
        if (manip_begin >= manip_stop() || manip_stop() > index.size()) {
            throw std::invalid_argument("hand model: manipulation index window out of range");
        }
    }
};

}  // namespace thumbopt
