#pragma once

#include "mtlf/rdlstm.hpp"
#include "mtlf/trainer.hpp"

#include <filesystem>
#include <string>

// JSON checkpoints. Network file:
//   { "format": "mtlf-network", "version": 1, "m": 40, "dilations": [1,3,6,12],
//     "arrays": { "<name>": { "shape": [rows, cols], "data": [row-major values] } } }
// Array names: layer<L>.W_<g>, layer<L>.V_<g>, layer<L>.b_<g> for L = 1..4 and
// g in f, i, g, o; out.W and out.b. A model file ("mtlf-model") embeds the
// network object under "network" plus "ets": { id: { "alpha_raw", "beta_raw",
// "init_season_raw": [12] } }, "ids" and per-series "snapshots".

namespace mtlf {

inline constexpr int kCheckpointVersion = 1;

std::string network_to_json(const NetworkParams& params);
NetworkParams network_from_json(const std::string& text);

std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const std::string& text);

void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);

} // namespace mtlf
