#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "regret/assumptions.hpp"
#include "regret/estimation.hpp"
#include "regret/types.hpp"
#include "regret/vstats.hpp"

namespace regret {

using json = nlohmann::ordered_json;

/// Flat object keyed "v_{y}{t}{d}" and "rho_{t}{d}".
json to_json(const VStatTable& v);
json to_json(const IdentifiedVStats& id);
json to_json(const Interval& iv);
json to_json(const RegretInterval& r);
json to_json(const UncertaintySet& s);
json to_json(const RegretReport& r);

/// One row per group x measure x method. The pooled run is group "all".
std::string report_csv(const RegretReport& r);

/// Writes `text` to `path`, replacing any existing file.
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace regret
