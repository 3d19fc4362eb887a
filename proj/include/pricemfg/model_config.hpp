#pragma once

#include <string>

#include "pricemfg/problem.hpp"

namespace pricemfg {

// JSON model-config schema (all keys required; no defaults for physical
// constants):
//   { "horizon": 24.0, "n_t": 480, "x_min": -6.0, "x_max": 14.0, "n_x": 201,
//     "c": 1.0, "epsilon": 0.0,
//     "potential": {"kind": "zero" | "quadratic", "eta": .., "kappa": ..}
//                  | {"kind": "tabulated", "values": [..]},
//     "terminal": {"kind": "quadratic", "gamma": .., "zeta": ..}
//                 | {"kind": "tabulated", "values": [..]},
//     "initial": {"kind": "gaussian", "mean": .., "sigma": ..}
//                | {"kind": "tabulated", "values": [..]},
//     "supply": {"path": "file.csv"} | {"inline": {"times": [..], "values": [..]},
//                "interpolation": "cubic" | "linear"} }
ModelProblem parse_model_config(const std::string& json_text);
ModelProblem load_model_config(const std::string& path);

}  // namespace pricemfg
