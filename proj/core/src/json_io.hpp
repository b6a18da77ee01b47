#pragma once

#include <json.hpp>

#include "qsync/scenario.hpp"

namespace qsync::detail {

nlohmann::ordered_json scenario_json(const Scenario& scenario);

}  // namespace qsync::detail
