#pragma once

// Built-in copy of configs/reference_hand.json, used when no config is given.

namespace thumbopt::reference {

inline constexpr const char* kHandJson = R"json({
  "schema_version": 1,
  "units": {"length": "mm", "angle": "deg"},
  "hand": {
    "fingertip_radii": {"thumb": 8, "index": 8, "middle": 8},
    "normals": {"palm_axis": [0, 0, 1], "thumb_side": [1, 0, 0], "pad_tilt": 0},
    "thumb": {
      "tip_offset": {"radial": 100, "axial": 30, "phase": 0},
      "sweep": [0, 150],
      "steps": 100
    },
    "index": {
      "source": "four_bar",
      "linkage": {"ground": 10, "input": 45, "coupler": 12, "output": 48,
                  "coupler_point_along": 0, "coupler_point_perp": 40, "ground_angle": -126.05},
      "frame": {"origin": [22, 110, 0], "u_axis": [0, 1, 0], "v_axis": [0, 0, 1]},
      "input_angle": [0, 91.6],
      "steps": 100,
      "branch": "open"
    },
    "manipulation_window": [43, 48],
    "middle": {
      "source": "four_bar",
      "linkage": {"ground": 10, "input": 48, "coupler": 12, "output": 51,
                  "coupler_point_along": 0, "coupler_point_perp": 43, "ground_angle": -126.05},
      "frame": {"origin": [0, 115, 0], "u_axis": [0, 1, 0], "v_axis": [0, 0, 1]},
      "input_angle": [0, 91.6],
      "steps": 100,
      "branch": "open"
    }
  },
  "requirements": {
    "precision": [0, 60], "lateral": [0, 30], "tripod": [10, 80], "manipulation": [0, 30],
    "theta_min": 110, "alpha_perm": 30, "force_dir_limit": 45
  },
  "deformation": {"force_n": 10, "youngs_modulus_pa": 134300},
  "grid": {
    "x": {"range": [-40, 120], "steps": 20},
    "y": {"range": [0, 160], "steps": 20},
    "z": {"range": [-40, 120], "steps": 20},
    "roll": {"range": [-180, 180], "steps": 8},
    "pitch": {"range": [-90, 90], "steps": 15},
    "yaw": {"range": [-180, 180], "steps": 20}
  },
  "search": {"workers": 0, "top_k": 10, "pruning": true},
  "output": {"directory": "thumbopt_out", "heatmap_dims": ["x", "y"]}
}
)json";

}  // namespace thumbopt::reference
