#ifndef RESIOT_SCENARIO_IO_HPP
#define RESIOT_SCENARIO_IO_HPP

#include <optional>
#include <string>

#include <json.hpp>

#include "resiot/protocol.hpp"

// Scenario files are JSON with // comments allowed. Reports serialize to a
// stable JSON document plus a CSV run summary; both are byte-reproducible for
// a given (scenario, seed).
namespace resiot::io {

proto::Scenario scenario_from_json(const nlohmann::json& j,
                                   const std::optional<perf::TimingTable>& timings_override);
proto::Scenario load_scenario_file(const std::string& path,
                                   const std::optional<perf::TimingTable>& timings_override);

nlohmann::json report_to_json(const proto::ScenarioReport& report, uint64_t seed);
std::string report_runs_csv(const proto::ScenarioReport& report);
// SHA-256 over the canonical message encodings, in transcript order.
std::string transcript_hash_hex(const proto::ScenarioReport& report);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

// "paper", "host", or a timings-file path.
perf::TimingTable resolve_timings(const std::string& spec);

}  // namespace resiot::io

#endif
