#pragma once

// JSON serialization of analysis results plus the config hashing used by the
// CLI reports. Shapes are documented in docs/report.schema.json; every field
// here is deterministic for a fixed config and seed, so identical runs emit
// identical JSON.

#include <cstdint>
#include <string>

#include "json.hpp"

#include "invextopo/certify.hpp"
#include "invextopo/games.hpp"
#include "invextopo/minimax.hpp"
#include "invextopo/mountainpass.hpp"
#include "invextopo/topology.hpp"

namespace invextopo {

inline constexpr std::string_view kToolkitVersion = "1.0.0";
inline constexpr int kReportSchemaVersion = 1;

nlohmann::json to_json(const Certificate& cert);
nlohmann::json to_json(const SublevelReport& report);
nlohmann::json to_json(const MinimumEstimate& est);
nlohmann::json to_json(const PassResult& result);
nlohmann::json to_json(const FlowTrace& trace);
nlohmann::json to_json(const SolutionClassification& cls);
nlohmann::json to_json(const ModulusEstimate& est);
nlohmann::json to_json(const RationalizabilityTrace& trace);
nlohmann::json to_json(const NashResult& result);

// FNV-1a (64-bit) over the canonical sorted-key dump of a config document.
// Two configs hash alike iff their canonical serializations agree, so any
// semantic field change moves the hash.
std::uint64_t config_hash(const nlohmann::json& config);
std::string config_hash_hex(const nlohmann::json& config);

}  // namespace invextopo
