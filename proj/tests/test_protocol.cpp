#include <doctest.h>

#include "resiot/protocol.hpp"

using namespace resiot;
using namespace resiot::proto;

namespace {

Bytes marker_bytes(uint64_t seed) {
    Drbg rng(seed, "test-marker");
    return rng.bytes(24);
}

const RunReport& single_run(const ScenarioReport& report) {
    REQUIRE(report.runs.size() == 1);
    return report.runs[0];
}

}  // namespace

TEST_CASE("rsf-gs happy path accepts and matches the composed processing time") {
    PairwiseConfig cfg;
    cfg.seed = 1;
    ScenarioReport report = run_rsf_gs(cfg);
    const RunReport& run = single_run(report);
    CHECK(run.outcome.result == RunOutcome::Result::accept);
    CHECK(run.outcome.failed_step == 0);

    perf::TimingTable t = perf::TimingTable::paper();
    double sign_leg = perf::compose_rsf_time(
        t.device_leg_ms(), perf::predict_sf_time(perf::gs_sign_formula(), t.sa), t.latency);
    double verify_leg = perf::compose_rsf_time(
        t.device_leg_ms(), perf::predict_sf_time(perf::gs_verify_formula(), t.sa), t.latency);
    CHECK(run.elapsed_ms == doctest::Approx(sign_leg + verify_leg).epsilon(1e-12));
    CHECK(run.elapsed_ms == doctest::Approx(1035.874).epsilon(1e-9));
}

TEST_CASE("rsf-gs message sequence follows the construction order") {
    PairwiseConfig cfg;
    cfg.seed = 2;
    ScenarioReport report = run_rsf_gs(cfg);
    std::vector<MsgKind> protocol_kinds;
    for (const auto& entry : report.transcript)
        if (kind_step(entry.delivered.kind) > 0) protocol_kinds.push_back(entry.delivered.kind);
    std::vector<MsgKind> expected = {MsgKind::auth_req,   MsgKind::sign_req,
                                     MsgKind::sign_resp,  MsgKind::auth_resp,
                                     MsgKind::verify_req, MsgKind::verify_resp};
    CHECK(protocol_kinds == expected);
}

TEST_CASE("rsf-abe happy path delivers the payload intact") {
    PairwiseConfig cfg;
    cfg.seed = 3;
    cfg.data = marker_bytes(77);
    cfg.attrs = {0};
    ScenarioReport report = run_rsf_abe(cfg);
    const RunReport& run = single_run(report);
    CHECK(run.outcome.result == RunOutcome::Result::delivered);
    CHECK(run.delivered_data == cfg.data);

    // elapsed = init exchange + encrypt leg + decrypt leg, per the cost model
    perf::TimingTable t = perf::TimingTable::paper();
    uint32_t n = static_cast<uint32_t>(cfg.attrs.size());
    double expected =
        2 * t.latency.device_device_ms +
        perf::compose_rsf_time(t.device_leg_ms(),
                               perf::predict_sf_time(perf::abe_encrypt_formula(n), t.sa),
                               t.latency) +
        perf::compose_rsf_time(t.device_leg_ms(),
                               perf::predict_sf_time(perf::abe_decrypt_formula(n), t.sa),
                               t.latency);
    CHECK(run.elapsed_ms == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("rsf-abe denies when the key policy is unsatisfied; receiver learns nothing") {
    PairwiseConfig cfg;
    cfg.seed = 4;
    cfg.data = marker_bytes(78);
    cfg.attrs = {0};
    cfg.responder_sa_policy = "thresh(1, 1)";  // needs attr 1, ciphertext has 0
    ScenarioReport report = run_rsf_abe(cfg);
    const RunReport& run = single_run(report);
    CHECK(run.outcome.result == RunOutcome::Result::denied);
    CHECK(run.outcome.failed_step == 6);
    CHECK(run.delivered_data.empty());
    // the plaintext never appears in the responder-side device view either
    std::string data_hex = to_hex(cfg.data);
    for (const auto& entry : report.view("Dj")) {
        CHECK(to_hex(entry.delivered.payload.encode()).find(data_hex) == std::string::npos);
    }
}

TEST_CASE("fault: bit-flipped signature rejects at the verification step") {
    PairwiseConfig cfg;
    cfg.seed = 5;
    FaultRule rule;
    rule.run_index = 0;
    rule.message = MsgKind::sign_resp;
    rule.action = FaultRule::Action::bit_flip;
    rule.field = "sigma";
    rule.bit = 123;
    cfg.faults = {rule};
    ScenarioReport report = run_rsf_gs(cfg);
    const RunReport& run = single_run(report);
    CHECK(run.outcome.result == RunOutcome::Result::reject);
    CHECK(run.outcome.failed_step == 6);
}

TEST_CASE("fault: replaced nonce makes the recomputed message mismatch at step 6") {
    PairwiseConfig cfg;
    cfg.seed = 6;
    FaultRule rule;
    rule.run_index = 0;
    rule.message = MsgKind::auth_req;
    rule.action = FaultRule::Action::bit_flip;
    rule.field = "nonce";
    rule.bit = 3;
    cfg.faults = {rule};
    ScenarioReport report = run_rsf_gs(cfg);
    const RunReport& run = single_run(report);
    CHECK(run.outcome.result == RunOutcome::Result::reject);
    CHECK(run.outcome.failed_step == 6);
    CHECK(run.outcome.reason == "signature-rejected");
}

TEST_CASE("fault: dropped response times out with a step label") {
    PairwiseConfig cfg;
    cfg.seed = 7;
    FaultRule rule;
    rule.run_index = 0;
    rule.message = MsgKind::auth_resp;
    rule.action = FaultRule::Action::drop;
    cfg.faults = {rule};
    ScenarioReport report = run_rsf_gs(cfg);
    const RunReport& run = single_run(report);
    CHECK(run.outcome.result == RunOutcome::Result::aborted);
    CHECK(run.outcome.reason == "timeout");
    CHECK(run.outcome.failed_step == 4);
    CHECK(report.messages_dropped == 1);
    CHECK(report.messages_sent == report.messages_delivered + report.messages_dropped);
}

TEST_CASE("fault: replaying a prior session's wrapped signature is rejected") {
    Scenario sc;
    sc.seed = 8;
    sc.devices = {{"Di"}, {"Dj"}};
    sc.sas = {{"SAi", true, false, ""}, {"SAj", true, false, ""}};
    sc.attachments = {{"Di", "SAi"}, {"Dj", "SAj"}};
    RunSpec run;
    run.kind = RunSpec::Kind::rsf_gs;
    run.initiator = "Di";
    run.responder = "Dj";
    run.initiator_sa = "SAi";
    run.responder_sa = "SAj";
    sc.runs = {run, run};
    FaultRule rule;
    rule.run_index = 1;
    rule.message = MsgKind::auth_resp;
    rule.action = FaultRule::Action::replay;
    rule.from_run = 0;
    sc.faults = {rule};
    ScenarioReport report = run_scenario(sc);
    REQUIRE(report.runs.size() == 2);
    CHECK(report.runs[0].outcome.result == RunOutcome::Result::accept);
    CHECK(report.runs[1].outcome.result == RunOutcome::Result::reject);
    CHECK(report.runs[1].outcome.failed_step == 5);  // session keys differ
    CHECK(report.runs[1].outcome.reason == "decrypt-failed");
}

TEST_CASE("fault: duplicated message violates step order and aborts") {
    PairwiseConfig cfg;
    cfg.seed = 9;
    FaultRule rule;
    rule.run_index = 0;
    rule.message = MsgKind::auth_req;
    rule.action = FaultRule::Action::duplicate;
    cfg.faults = {rule};
    ScenarioReport report = run_rsf_gs(cfg);
    const RunReport& run = single_run(report);
    CHECK(run.outcome.result == RunOutcome::Result::aborted);
    CHECK(run.outcome.reason == "unexpected-message");
}

TEST_CASE("a signing credential from a foreign group fails verification") {
    PairwiseConfig cfg;
    cfg.seed = 10;
    cfg.responder_sa_rogue_group = true;
    ScenarioReport report = run_rsf_gs(cfg);
    const RunReport& run = single_run(report);
    CHECK(run.outcome.result == RunOutcome::Result::reject);
    CHECK(run.outcome.failed_step == 6);
}

TEST_CASE("unattached devices are refused offload service") {
    PairwiseConfig gs_cfg;
    gs_cfg.seed = 11;
    gs_cfg.attach_responder = false;  // D_j cannot reach SA_j legitimately
    ScenarioReport gs_report = run_rsf_gs(gs_cfg);
    CHECK(single_run(gs_report).outcome.result == RunOutcome::Result::aborted);
    CHECK(single_run(gs_report).outcome.reason == "offload-refused");
    CHECK(single_run(gs_report).outcome.failed_step == 3);

    PairwiseConfig abe_cfg;
    abe_cfg.seed = 12;
    abe_cfg.data = marker_bytes(90);
    abe_cfg.attach_initiator = false;
    ScenarioReport abe_report = run_rsf_abe(abe_cfg);
    CHECK(single_run(abe_report).outcome.result == RunOutcome::Result::aborted);
    CHECK(single_run(abe_report).outcome.reason == "offload-refused");
}

TEST_CASE("tampered wrapped transfer fails authenticated decryption") {
    PairwiseConfig cfg;
    cfg.seed = 13;
    cfg.data = marker_bytes(91);
    FaultRule rule;
    rule.run_index = 0;
    rule.message = MsgKind::data_transfer;
    rule.action = FaultRule::Action::bit_flip;
    rule.field = "e_i_dprime";
    rule.bit = 999;
    cfg.faults = {rule};
    ScenarioReport report = run_rsf_abe(cfg);
    const RunReport& run = single_run(report);
    CHECK(run.outcome.result == RunOutcome::Result::protocol_failure);
    CHECK(run.outcome.failed_step == 5);
    CHECK(run.outcome.reason == "decrypt-failed");
}

TEST_CASE("attachment with a wrong AAA secret fails closed") {
    Scenario sc;
    sc.seed = 14;
    sc.devices = {{"Di"}, {"Dj", /*wrong_aaa_secret=*/true}};
    sc.sas = {{"SAi", true, false, ""}, {"SAj", true, false, ""}};
    sc.attachments = {{"Di", "SAi"}, {"Dj", "SAj"}};
    RunSpec run;
    run.kind = RunSpec::Kind::rsf_gs;
    run.initiator = "Di";
    run.responder = "Dj";
    run.initiator_sa = "SAi";
    run.responder_sa = "SAj";
    sc.runs = {run};
    ScenarioReport report = run_scenario(sc);
    bool saw_failed_attach = false;
    for (const auto& a : report.attachments)
        if (a.device == "Dj") {
            CHECK_FALSE(a.ok);
            saw_failed_attach = true;
        }
    CHECK(saw_failed_attach);
    CHECK(report.runs[0].outcome.result == RunOutcome::Result::aborted);
    CHECK(report.runs[0].outcome.reason == "offload-refused");
}

TEST_CASE("two devices attached to one agent hold independent session keys") {
    Scenario sc;
    sc.seed = 15;
    sc.devices = {{"Da"}, {"Db"}};
    sc.sas = {{"SA", true, false, ""}};
    sc.attachments = {{"Da", "SA"}, {"Db", "SA"}};
    sc.anonymous_attachment = false;  // setup-time attachments
    ScenarioReport report = run_scenario([&] {
        Scenario with_run = sc;
        RunSpec run;
        run.kind = RunSpec::Kind::rsf_gs;
        run.initiator = "Da";
        run.responder = "Db";
        run.initiator_sa = "SA";
        run.responder_sa = "SA";
        with_run.runs = {run};
        return with_run;
    }());
    REQUIRE(report.attachments.size() == 2);
    CHECK(report.attachments[0].ok);
    CHECK(report.attachments[1].ok);
    CHECK(report.attachments[0].key_fingerprint != report.attachments[1].key_fingerprint);
}

TEST_CASE("transcript views expose exactly what each principal touched") {
    PairwiseConfig cfg;
    cfg.seed = 16;
    Scenario sc;
    // three SAs; the third never participates
    sc.seed = 16;
    sc.devices = {{"Di"}, {"Dj"}};
    sc.sas = {{"SAi", true, false, ""}, {"SAj", true, false, ""}, {"SAz", true, false, ""}};
    sc.attachments = {{"Di", "SAi"}, {"Dj", "SAj"}};
    RunSpec run;
    run.kind = RunSpec::Kind::rsf_gs;
    run.initiator = "Di";
    run.responder = "Dj";
    run.initiator_sa = "SAi";
    run.responder_sa = "SAj";
    sc.runs = {run};
    ScenarioReport report = run_scenario(sc);

    CHECK(report.view("SAz").empty());  // non-participant view is empty
    CHECK_THROWS_AS((void)report.view("nobody"), Error);  // unknown principal

    // D_i touches auth_req, auth_resp, verify_req, verify_resp
    std::vector<MsgKind> di_kinds;
    for (const auto& entry : report.view("Di"))
        if (kind_step(entry.delivered.kind) > 0) di_kinds.push_back(entry.delivered.kind);
    std::vector<MsgKind> expected = {MsgKind::auth_req, MsgKind::auth_resp, MsgKind::verify_req,
                                     MsgKind::verify_resp};
    CHECK(di_kinds == expected);

    // SA_j sees the encrypted nonce and the signature, never the nonce itself
    const RunReport& rr = report.runs[0];
    const Bytes* nonce = nullptr;
    for (const auto& [label, value] : rr.secret_markers)
        if (label == "nonce_i") nonce = &value;
    REQUIRE(nonce);
    std::string nonce_hex = to_hex(*nonce);
    auto sa_view = report.view("SAj");
    CHECK_FALSE(sa_view.empty());
    bool saw_e_j = false;
    for (const auto& entry : sa_view) {
        if (entry.delivered.payload.find("e_j")) saw_e_j = true;
        CHECK(to_hex(entry.delivered.payload.encode()).find(nonce_hex) == std::string::npos);
    }
    CHECK(saw_e_j);
}

TEST_CASE("session keys and plaintext never appear in any agent-visible bytes") {
    PairwiseConfig cfg;
    cfg.seed = 17;
    cfg.data = marker_bytes(99);
    for (auto report : {run_rsf_gs(cfg), run_rsf_abe(cfg)}) {
        const RunReport& run = report.runs[0];
        REQUIRE_FALSE(run.secret_markers.empty());
        for (const std::string sa : {"SAi", "SAj"}) {
            std::string haystack;
            for (const auto& entry : report.view(sa))
                haystack += to_hex(entry.delivered.payload.encode());
            for (const auto& [label, value] : run.secret_markers) {
                INFO("marker ", label, " leaked to ", sa);
                CHECK(haystack.find(to_hex(value)) == std::string::npos);
            }
        }
    }
}
