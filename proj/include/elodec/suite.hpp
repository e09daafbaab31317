#pragma once

// Tool-world task suites: versioned JSON documents (docs/formats.md) and a
// seeded generator for the shipped easy / medium / hard tiers.

#include <cstdint>
#include <string>
#include <vector>

#include "elodec/tool_world.hpp"

namespace elodec {

struct TaskSuite {
  std::string name;
  std::vector<ToolTask> tasks;
};

// Throw FormatError (VersionMismatch for another version) naming the
// offending task and field. Every task is validated.
TaskSuite parse_suite(const std::string& json_text);
TaskSuite read_suite(const std::string& path);

std::string serialize_suite(const TaskSuite& suite);
void write_suite(const std::string& path, const TaskSuite& suite);

struct TierShape {
  std::uint32_t required_groups = 3;
  std::uint32_t distractors = 4;
};

// "easy", "medium" or "hard"; throws std::invalid_argument otherwise.
TierShape tier_shape(const std::string& tier);

// Fault settings applied by the generator.
struct FaultProfile {
  double unavailable_share = 0.05;  // per tool
  double flaky_share = 0.2;         // per tool
  double flaky_probability = 0.3;
  double hallucination_rate = 0.1;
};

// Each required group holds one or two interchangeable tools (best worth
// 4.0, the alternative 2.8); distractors are worth nothing. Success needs
// every group covered plus Finish. Every group keeps at least one tool that
// is not permanently unavailable.
TaskSuite generate_suite(const std::string& tier, std::uint32_t task_count, std::uint64_t seed,
                         const FaultProfile& faults = {});

}  // namespace elodec
