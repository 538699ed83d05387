#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "qpn/buffers.hpp"
#include "qpn/engine.hpp"

namespace qpn {

inline constexpr int kScenarioVersion = 1;
inline constexpr int kTraceVersion = 1;

/// A scenario file: a buffer spec plus how to drive it. See README.md for
/// the JSON schema.
struct ScenarioDoc {
  int version = kScenarioVersion;
  BufferSpec spec;
  Scheduler scheduler = AddressDriven{};
  std::uint64_t seed = 0;
  bool enumerate = false;
  /// Places counted by enumeration signatures; empty means all places.
  std::vector<std::string> projection;

  friend bool operator==(const ScenarioDoc&, const ScenarioDoc&) = default;
};

/// Strict parse: unknown fields, and fields that do not apply to the buffer
/// kind, are rejected. The spec is validated by building its net. Syntax
/// errors carry a line number, semantic errors the offending field
/// ("addresses[2]", "payloads.d1", "scheduler.script[0]", ...).
ScenarioDoc parse_scenario(std::string_view text);

/// Canonical JSON for a scenario; parse_scenario(emit_scenario(d)) == d.
std::string emit_scenario(const ScenarioDoc& doc);

/// Key-sorted JSON of a trace, including the per-step count table.
std::string emit_trace(const Trace& trace);

/// Inverse of emit_trace. Throws ScenarioError on malformed input.
Trace parse_trace(std::string_view text);

/// Token counts per place: row 0 is the initial marking, row i the marking
/// after event i.
std::vector<std::vector<std::size_t>> marking_table(const Trace& trace);

/// Fixed-width text rendering of marking_table with the fired transition
/// in the last column.
std::string emit_marking_table(const Trace& trace);

std::string emit_enumeration(const EnumerationResult& result);

}  // namespace qpn
