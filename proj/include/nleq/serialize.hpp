// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <nlohmann/json_fwd.hpp>

#include "nleq/analysis.hpp"
#include "nleq/demapper.hpp"
#include "nleq/sdnne.hpp"
#include "nleq/volterra.hpp"

// JSON model files. A saved equalizer is an object with a "kind" tag:
// "vnle" bundles the Volterra model with its demapper, "sdnne" holds the
// network with row-major weight matrices, biases, masks and activation tag.
namespace nleq {

nlohmann::json volterra_to_json(const volterra::VolterraModel& model);
volterra::VolterraModel volterra_from_json(const nlohmann::json& j);

nlohmann::json mla_to_json(const demap::MlaDemapper& d);
demap::MlaDemapper mla_from_json(const nlohmann::json& j);

nlohmann::json mlp_to_json(const sdnne::MlpModel& model);
sdnne::MlpModel mlp_from_json(const nlohmann::json& j);

nlohmann::json rate_report_to_json(const analysis::RateReport& r);
nlohmann::json complexity_report_to_json(const analysis::ComplexityReport& r);

void save_json(const nlohmann::json& j, const std::filesystem::path& path);
nlohmann::json load_json(const std::filesystem::path& path);

}  // namespace nleq
