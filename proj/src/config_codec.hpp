#pragma once

#include <string>

#include "elodec/config.hpp"
#include "json_util.hpp"

namespace elodec::detail {

Json config_to_json(const RunConfig& config);
RunConfig config_from_json(const Json& j, const std::string& where);

Json world_to_json(const WorldSpec& world);
WorldSpec world_from_json(const Json& j, const std::string& where);

}  // namespace elodec::detail
