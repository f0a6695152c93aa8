#include <doctest.h>

#include <json.hpp>

#include "resiot/scenario_io.hpp"

using namespace resiot;
using nlohmann::json;

namespace {

const char* kScenarioText = R"json({
  // two devices, one happy authentication run and one injected fault
  "seed": 42,
  "anonymous_attachment": true,
  "abe_universe": 4,
  "fabric": { "device_device_ms": 56.0, "device_sa_roundtrip_ms": 243.0 },
  "devices": [ { "id": "Di" }, { "id": "Dj" } ],
  "sas": [
    { "id": "SAi" },
    { "id": "SAj", "abe_policy": "thresh(1, 0)" }
  ],
  "attachments": [
    { "device": "Di", "sa": "SAi" },
    { "device": "Dj", "sa": "SAj" }
  ],
  "runs": [
    { "kind": "rsf-gs", "initiator": "Di", "responder": "Dj",
      "initiator_sa": "SAi", "responder_sa": "SAj", "expect": "accept" },
    { "kind": "rsf-abe", "initiator": "Di", "responder": "Dj",
      "initiator_sa": "SAi", "responder_sa": "SAj",
      "data_text": "hello fabric", "attrs": [0], "expect": "delivered" }
  ],
  "faults": []
})json";

}  // namespace

TEST_CASE("scenario json with comments parses and runs") {
    json j = json::parse(kScenarioText, nullptr, true, true);
    proto::Scenario sc = io::scenario_from_json(j, std::nullopt);
    CHECK(sc.seed == 42);
    CHECK(sc.runs.size() == 2);
    CHECK(sc.runs[1].data == to_bytes("hello fabric"));
    proto::ScenarioReport report = proto::run_scenario(sc);
    CHECK(report.all_expectations_met);
}

TEST_CASE("scenario parsing rejects broken entries with a path") {
    json j = json::parse(kScenarioText, nullptr, true, true);
    j["runs"][0]["kind"] = "rsf-unknown";
    CHECK_THROWS_WITH_AS((void)io::scenario_from_json(j, std::nullopt),
                         "scenario: runs[0].kind: expected rsf-gs or rsf-abe", Error);

    json j2 = json::parse(kScenarioText, nullptr, true, true);
    j2.erase("seed");
    CHECK_THROWS_WITH_AS((void)io::scenario_from_json(j2, std::nullopt),
                         "scenario: seed: missing (seed is mandatory)", Error);

    json j3 = json::parse(kScenarioText, nullptr, true, true);
    j3["faults"].push_back({{"run", 0}, {"message", "auth_resp"}, {"action", "explode"}});
    CHECK_THROWS_AS((void)io::scenario_from_json(j3, std::nullopt), Error);
}

TEST_CASE("report json and csv are stable and carry the run table") {
    json j = json::parse(kScenarioText, nullptr, true, true);
    proto::Scenario sc = io::scenario_from_json(j, std::nullopt);
    proto::ScenarioReport report = proto::run_scenario(sc);
    json rj = io::report_to_json(report, sc.seed);
    CHECK(rj["seed"] == 42);
    CHECK(rj["runs"].size() == 2);
    CHECK(rj["runs"][0]["outcome"] == "accept");
    CHECK(rj["runs"][1]["outcome"] == "delivered");
    CHECK(rj["transcript_hash"].get<std::string>().size() == 64);
    for (const auto& t : rj["transcript"]) {
        CHECK(t.contains("payload_hex"));
        CHECK(t.contains("send_ms"));
    }
    // secret markers are harness-internal and never serialized
    CHECK(rj.dump().find("secret") == std::string::npos);

    std::string csv = io::report_runs_csv(report);
    CHECK(csv.rfind("run,kind,initiator,responder,outcome,failed_step,reason,elapsed_ms,"
                    "expected,matched\n",
                    0) == 0);
    CHECK(csv.find("0,rsf-gs,Di,Dj,accept,0,,1035.874,accept,1") != std::string::npos);
}

TEST_CASE("timings resolve by spec") {
    perf::TimingTable paper = io::resolve_timings("paper");
    CHECK(paper.provenance == "paper");
    CHECK_THROWS_AS((void)io::resolve_timings("/nonexistent/timings.json"), Error);
}
