#pragma once

// JSON encoding of a single tool task, shared by suite files and run records.

#include <string>

#include "elodec/tool_world.hpp"
#include "json_util.hpp"

namespace elodec::detail {

Json task_to_json(const ToolTask& task);
// Throws FormatError prefixed with `where`; the task is validated.
ToolTask task_from_json(const Json& j, std::string where);

}  // namespace elodec::detail
