#ifndef RESIOT_PROTOCOL_HPP
#define RESIOT_PROTOCOL_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "resiot/abe.hpp"
#include "resiot/bytes.hpp"
#include "resiot/perf_model.hpp"

// Wire-level domain model for the two offloaded security-function protocols:
// anonymous authentication over offloaded group signatures (rsf-gs, steps
// 1-6) and attribute-based access control over offloaded ABE (rsf-abe, steps
// 1-7), plus the pre-shared-key attachment stub that stands in for the
// AAA-based attachment procedure.
namespace resiot::proto {

enum class MsgKind : uint8_t {
    attach_req,
    attach_challenge,
    attach_resp,
    auth_req,
    sign_req,
    sign_resp,
    auth_resp,
    verify_req,
    verify_resp,
    abac_init,
    enc_req,
    enc_resp,
    data_transfer,
    dec_req,
    dec_resp,
    ack,
};

std::string_view kind_name(MsgKind kind);
std::optional<MsgKind> kind_from_name(std::string_view name);
// Protocol step the message belongs to in the construction's numbering;
// attachment messages return 0.
int kind_step(MsgKind kind);

// Ordered named byte fields; the deterministic wire encoding of a message
// body. Field order is fixed by the sender's construction order.
struct Payload {
    std::vector<std::pair<std::string, Bytes>> fields;

    void set(std::string name, Bytes value);
    const Bytes* find(std::string_view name) const;
    Bytes* find_mutable(std::string_view name);

    Bytes encode() const;
    static std::optional<Payload> decode(std::span<const uint8_t> in);
    bool operator==(const Payload&) const = default;
};

struct Message {
    MsgKind kind = MsgKind::attach_req;
    uint64_t session_id = 0;
    std::string sender;
    std::string receiver;
    Payload payload;

    // Fixed header + payload, deterministic; transcripts hash this.
    Bytes encode() const;
};

enum class Role { device, security_agent, key_authority, aaa_stub };

struct RunOutcome {
    enum class Result {
        pending,
        accept,            // rsf-gs
        reject,            // rsf-gs
        delivered,         // rsf-abe
        denied,            // rsf-abe, policy unsatisfied
        protocol_failure,  // rsf-abe, integrity/ack mismatch
        aborted,           // timeout, refusal, step-order violation
    };
    Result result = Result::pending;
    int failed_step = 0;  // 0 when clean
    std::string reason;

    bool final() const { return result != Result::pending; }
};

std::string_view outcome_name(RunOutcome::Result result);
std::optional<RunOutcome::Result> outcome_from_name(std::string_view name);

// --- scenario description ----------------------------------------------------

struct FabricConfig {
    double device_device_ms = 56.0;
    // Measured as a request+response budget; each one-way hop charges half.
    double device_sa_roundtrip_ms = 243.0;
    double step_timeout_ms = 5000.0;
    // Uniform [0, jitter) added per hop, drawn from the scenario seed. Off by
    // default; acceptance runs with constants.
    double latency_jitter_ms = 0.0;
};

struct DeviceSpec {
    std::string id;
    // Device-side copy of the AAA secret diverges from the AAA registry,
    // so attachment fails closed.
    bool wrong_aaa_secret = false;
};

struct SaSpec {
    std::string id;
    bool group_member = true;
    // Signing credential from an independent group; verification against the
    // scenario group must fail.
    bool rogue_group = false;
    std::string abe_policy;  // empty: no decryption key provisioned
};

struct RunSpec {
    enum class Kind { rsf_gs, rsf_abe };
    Kind kind = Kind::rsf_gs;
    std::string initiator;      // D_i
    std::string responder;      // D_j
    std::string initiator_sa;   // SA_i
    std::string responder_sa;   // SA_j
    Bytes data;                 // rsf-abe payload
    std::vector<abe::AttrId> attrs;  // rsf-abe ciphertext descriptor
    std::optional<RunOutcome::Result> expect;
};

struct FaultRule {
    // duplicate delivers the message twice; the second copy lands out of
    // order and must abort the session.
    enum class Action { bit_flip, drop, replay, duplicate };
    uint32_t run_index = 0;
    MsgKind message = MsgKind::auth_req;
    uint32_t occurrence = 1;  // nth message of that kind within the run
    Action action = Action::drop;
    std::string field;   // bit_flip target
    uint32_t bit = 0;    // bit index within the field
    uint32_t from_run = 0;  // replay source
};

struct Scenario {
    uint64_t seed = 0;
    FabricConfig fabric;
    bool anonymous_attachment = true;
    bool charge_compute = true;  // advance the clock by modeled crypto costs
    uint32_t abe_universe = 4;
    std::vector<DeviceSpec> devices;
    std::vector<SaSpec> sas;
    std::vector<std::pair<std::string, std::string>> attachments;  // device, sa
    std::vector<RunSpec> runs;
    std::vector<FaultRule> faults;
    perf::TimingTable timings = perf::TimingTable::paper();

    // Throws Error(validation) naming the offending entry.
    void validate() const;
};

// --- reports ------------------------------------------------------------------

struct TranscriptEntry {
    uint64_t seq = 0;
    int run_index = -1;  // -1 for attachment traffic outside any run
    double send_time_ms = 0;
    std::optional<double> deliver_time_ms;  // empty when dropped
    bool mutated = false;
    Message delivered;  // payload after fault application
    Payload original_payload;  // sender-side payload (pre-fault)
};

struct AttachmentReport {
    std::string device;
    std::string sa;
    std::string wire_id;
    bool ok = false;
    double established_at_ms = 0;
    int run_index = -1;  // -1: scenario-setup attachment
    std::string key_fingerprint;  // sha256 of the session key, hex
};

struct RunReport {
    RunSpec spec;
    RunOutcome outcome;
    double started_at_ms = 0;
    double finished_at_ms = 0;
    double elapsed_ms = 0;
    bool expectation_met = true;
    Bytes delivered_data;  // rsf-abe receiver-side payload, empty otherwise
    uint64_t session_id = 0;
    // Values that must never show up in an agent-visible transcript: session
    // nonces, derived keys, payload plaintext. Harness-internal; not part of
    // the serialized report.
    std::vector<std::pair<std::string, Bytes>> secret_markers;
};

struct ScenarioReport {
    std::vector<RunReport> runs;
    std::vector<AttachmentReport> attachments;
    std::vector<TranscriptEntry> transcript;
    std::vector<std::pair<std::string, Role>> principals;
    uint64_t messages_sent = 0;
    uint64_t messages_delivered = 0;
    uint64_t messages_dropped = 0;
    bool all_expectations_met = true;

    // Messages a principal sent or received, in delivery/send order.
    // Pseudonymous wire ids resolve to their device. Throws
    // Error(validation) for an id that is not a scenario principal.
    std::vector<TranscriptEntry> view(const std::string& principal) const;
};

ScenarioReport run_scenario(const Scenario& scenario);

// Canned single-run wrappers.
struct PairwiseConfig {
    uint64_t seed = 0;
    bool anonymous_attachment = true;
    bool attach_initiator = true;  // false: leave D_i unattached
    bool attach_responder = true;
    bool responder_sa_rogue_group = false;
    std::string responder_sa_policy = "thresh(1, 0)";
    std::vector<abe::AttrId> attrs = {0};
    Bytes data;
    std::vector<FaultRule> faults;
};

ScenarioReport run_rsf_gs(const PairwiseConfig& config);
ScenarioReport run_rsf_abe(const PairwiseConfig& config);

}  // namespace resiot::proto

#endif
