#include "resiot/scenario_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace resiot::io {

using nlohmann::json;
using proto::FaultRule;
using proto::RunSpec;
using proto::Scenario;

namespace {

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    throw Error(Errc::validation, "scenario: " + path + ": " + what);
}

Bytes run_data_from_json(const json& run, const std::string& at) {
    if (run.contains("data_text")) return to_bytes(run.at("data_text").get<std::string>());
    if (run.contains("data_hex")) {
        auto bytes = from_hex(run.at("data_hex").get<std::string>());
        if (!bytes) bad(at + ".data_hex", "invalid hex");
        return *bytes;
    }
    return {};
}

}  // namespace

Scenario scenario_from_json(const json& j,
                            const std::optional<perf::TimingTable>& timings_override) {
    Scenario sc;
    if (!j.contains("seed")) bad("seed", "missing (seed is mandatory)");
    sc.seed = j.at("seed").get<uint64_t>();
    sc.anonymous_attachment = j.value("anonymous_attachment", true);
    sc.charge_compute = j.value("charge_compute", true);
    sc.abe_universe = j.value("abe_universe", 4u);
    if (j.contains("fabric")) {
        const json& f = j.at("fabric");
        sc.fabric.device_device_ms = f.value("device_device_ms", sc.fabric.device_device_ms);
        sc.fabric.device_sa_roundtrip_ms =
            f.value("device_sa_roundtrip_ms", sc.fabric.device_sa_roundtrip_ms);
        sc.fabric.step_timeout_ms = f.value("step_timeout_ms", sc.fabric.step_timeout_ms);
        sc.fabric.latency_jitter_ms = f.value("latency_jitter_ms", sc.fabric.latency_jitter_ms);
    }
    if (timings_override) {
        sc.timings = *timings_override;
    } else {
        sc.timings = resolve_timings(j.value("timings", std::string("paper")));
    }

    if (!j.contains("devices")) bad("devices", "missing");
    for (size_t i = 0; i < j.at("devices").size(); ++i) {
        const json& d = j.at("devices")[i];
        proto::DeviceSpec spec;
        if (!d.contains("id")) bad("devices[" + std::to_string(i) + "]", "missing id");
        spec.id = d.at("id").get<std::string>();
        spec.wrong_aaa_secret = d.value("wrong_aaa_secret", false);
        sc.devices.push_back(std::move(spec));
    }
    if (!j.contains("sas")) bad("sas", "missing");
    for (size_t i = 0; i < j.at("sas").size(); ++i) {
        const json& s = j.at("sas")[i];
        proto::SaSpec spec;
        if (!s.contains("id")) bad("sas[" + std::to_string(i) + "]", "missing id");
        spec.id = s.at("id").get<std::string>();
        spec.group_member = s.value("group_member", true);
        spec.rogue_group = s.value("rogue_group", false);
        spec.abe_policy = s.value("abe_policy", std::string());
        sc.sas.push_back(std::move(spec));
    }
    for (size_t i = 0; i < j.value("attachments", json::array()).size(); ++i) {
        const json& a = j.at("attachments")[i];
        std::string at = "attachments[" + std::to_string(i) + "]";
        if (!a.contains("device") || !a.contains("sa")) bad(at, "needs device and sa");
        sc.attachments.emplace_back(a.at("device").get<std::string>(),
                                    a.at("sa").get<std::string>());
    }
    if (!j.contains("runs")) bad("runs", "missing");
    for (size_t i = 0; i < j.at("runs").size(); ++i) {
        const json& r = j.at("runs")[i];
        std::string at = "runs[" + std::to_string(i) + "]";
        RunSpec run;
        std::string kind = r.value("kind", std::string());
        if (kind == "rsf-gs") {
            run.kind = RunSpec::Kind::rsf_gs;
        } else if (kind == "rsf-abe") {
            run.kind = RunSpec::Kind::rsf_abe;
        } else {
            bad(at + ".kind", "expected rsf-gs or rsf-abe");
        }
        for (const char* field : {"initiator", "responder", "initiator_sa", "responder_sa"})
            if (!r.contains(field)) bad(at, std::string("missing ") + field);
        run.initiator = r.at("initiator").get<std::string>();
        run.responder = r.at("responder").get<std::string>();
        run.initiator_sa = r.at("initiator_sa").get<std::string>();
        run.responder_sa = r.at("responder_sa").get<std::string>();
        run.data = run_data_from_json(r, at);
        if (r.contains("attrs"))
            for (const auto& a : r.at("attrs")) run.attrs.push_back(a.get<uint32_t>());
        if (r.contains("expect")) {
            auto expect = proto::outcome_from_name(r.at("expect").get<std::string>());
            if (!expect) bad(at + ".expect", "unknown outcome name");
            run.expect = *expect;
        }
        sc.runs.push_back(std::move(run));
    }
    for (size_t i = 0; i < j.value("faults", json::array()).size(); ++i) {
        const json& f = j.at("faults")[i];
        std::string at = "faults[" + std::to_string(i) + "]";
        FaultRule rule;
        if (!f.contains("run")) bad(at, "missing run");
        rule.run_index = f.at("run").get<uint32_t>();
        auto kind = proto::kind_from_name(f.value("message", std::string()));
        if (!kind) bad(at + ".message", "unknown message kind");
        rule.message = *kind;
        rule.occurrence = f.value("occurrence", 1u);
        std::string action = f.value("action", std::string());
        if (action == "drop") {
            rule.action = FaultRule::Action::drop;
        } else if (action == "bit_flip") {
            rule.action = FaultRule::Action::bit_flip;
            if (!f.contains("field")) bad(at, "bit_flip needs field");
            rule.field = f.at("field").get<std::string>();
            rule.bit = f.value("bit", 0u);
        } else if (action == "replay") {
            rule.action = FaultRule::Action::replay;
            if (!f.contains("from_run")) bad(at, "replay needs from_run");
            rule.from_run = f.at("from_run").get<uint32_t>();
        } else if (action == "duplicate") {
            rule.action = FaultRule::Action::duplicate;
        } else {
            bad(at + ".action", "expected drop, bit_flip, replay or duplicate");
        }
        sc.faults.push_back(rule);
    }
    sc.validate();
    return sc;
}

Scenario load_scenario_file(const std::string& path,
                            const std::optional<perf::TimingTable>& timings_override) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io, "cannot open scenario file: " + path);
    json j;
    try {
        j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw Error(Errc::parse, "scenario file " + path + ": " + e.what());
    }
    return scenario_from_json(j, timings_override);
}

std::string transcript_hash_hex(const proto::ScenarioReport& report) {
    ByteWriter w;
    for (const auto& entry : report.transcript) {
        w.u64(entry.seq);
        w.blob(entry.delivered.encode());
        w.u8(entry.deliver_time_ms ? 1 : 0);
    }
    auto digest = sha256(w.bytes());
    return to_hex(digest);
}

json report_to_json(const proto::ScenarioReport& report, uint64_t seed) {
    json j;
    j["seed"] = seed;
    j["all_expectations_met"] = report.all_expectations_met;
    j["messages"] = {{"sent", report.messages_sent},
                     {"delivered", report.messages_delivered},
                     {"dropped", report.messages_dropped}};
    json attachments = json::array();
    for (const auto& a : report.attachments) {
        attachments.push_back({{"device", a.device},
                               {"sa", a.sa},
                               {"wire_id", a.wire_id},
                               {"ok", a.ok},
                               {"established_at_ms", a.established_at_ms},
                               {"run", a.run_index},
                               {"key_fingerprint", a.key_fingerprint}});
    }
    j["attachments"] = attachments;
    json runs = json::array();
    for (size_t i = 0; i < report.runs.size(); ++i) {
        const auto& r = report.runs[i];
        json run;
        run["run"] = i;
        run["kind"] = r.spec.kind == RunSpec::Kind::rsf_gs ? "rsf-gs" : "rsf-abe";
        run["initiator"] = r.spec.initiator;
        run["responder"] = r.spec.responder;
        run["initiator_sa"] = r.spec.initiator_sa;
        run["responder_sa"] = r.spec.responder_sa;
        run["outcome"] = std::string(proto::outcome_name(r.outcome.result));
        run["failed_step"] = r.outcome.failed_step;
        run["reason"] = r.outcome.reason;
        run["started_at_ms"] = r.started_at_ms;
        run["finished_at_ms"] = r.finished_at_ms;
        run["elapsed_ms"] = r.elapsed_ms;
        run["expected"] =
            r.spec.expect ? json(std::string(proto::outcome_name(*r.spec.expect))) : json();
        run["expectation_met"] = r.expectation_met;
        run["session_id"] = r.session_id;
        if (!r.delivered_data.empty()) run["delivered_data_hex"] = to_hex(r.delivered_data);
        runs.push_back(std::move(run));
    }
    j["runs"] = runs;
    json transcript = json::array();
    for (const auto& entry : report.transcript) {
        json t;
        t["seq"] = entry.seq;
        t["run"] = entry.run_index;
        t["kind"] = std::string(proto::kind_name(entry.delivered.kind));
        t["sender"] = entry.delivered.sender;
        t["receiver"] = entry.delivered.receiver;
        t["session_id"] = entry.delivered.session_id;
        t["send_ms"] = entry.send_time_ms;
        t["deliver_ms"] = entry.deliver_time_ms ? json(*entry.deliver_time_ms) : json();
        t["dropped"] = !entry.deliver_time_ms.has_value();
        t["mutated"] = entry.mutated;
        t["payload_hex"] = to_hex(entry.delivered.payload.encode());
        if (entry.mutated) t["original_payload_hex"] = to_hex(entry.original_payload.encode());
        transcript.push_back(std::move(t));
    }
    j["transcript"] = transcript;
    j["transcript_hash"] = transcript_hash_hex(report);
    return j;
}

std::string report_runs_csv(const proto::ScenarioReport& report) {
    std::ostringstream os;
    os << "run,kind,initiator,responder,outcome,failed_step,reason,elapsed_ms,expected,matched\n";
    for (size_t i = 0; i < report.runs.size(); ++i) {
        const auto& r = report.runs[i];
        os << i << ',' << (r.spec.kind == RunSpec::Kind::rsf_gs ? "rsf-gs" : "rsf-abe") << ','
           << r.spec.initiator << ',' << r.spec.responder << ','
           << proto::outcome_name(r.outcome.result) << ',' << r.outcome.failed_step << ','
           << r.outcome.reason << ',';
        os.setf(std::ios::fixed);
        os.precision(3);
        os << r.elapsed_ms << ','
           << (r.spec.expect ? std::string(proto::outcome_name(*r.spec.expect)) : std::string())
           << ',' << (r.expectation_met ? 1 : 0) << '\n';
    }
    return os.str();
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io, "cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot write file: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(Errc::io, "write failed: " + path);
}

perf::TimingTable resolve_timings(const std::string& spec) {
    if (spec == "paper") return perf::TimingTable::paper();
    if (spec == "host") {
        perf::MicrobenchConfig cfg;
        return perf::microbench(cfg);
    }
    return perf::TimingTable::load_file(spec);
}

}  // namespace resiot::io
