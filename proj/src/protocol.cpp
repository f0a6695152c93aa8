#include "resiot/protocol.hpp"

#include <algorithm>

namespace resiot::proto {

namespace {

struct KindInfo {
    MsgKind kind;
    std::string_view name;
    int step;
};

// Step numbers follow the construction figures: rsf-gs 1-6, rsf-abe 1-7.
constexpr KindInfo kKinds[] = {
    {MsgKind::attach_req, "attach_req", 0},
    {MsgKind::attach_challenge, "attach_challenge", 0},
    {MsgKind::attach_resp, "attach_resp", 0},
    {MsgKind::auth_req, "auth_req", 1},
    {MsgKind::sign_req, "sign_req", 2},
    {MsgKind::sign_resp, "sign_resp", 3},
    {MsgKind::auth_resp, "auth_resp", 4},
    {MsgKind::verify_req, "verify_req", 5},
    {MsgKind::verify_resp, "verify_resp", 6},
    {MsgKind::abac_init, "abac_init", 1},
    {MsgKind::enc_req, "enc_req", 2},
    {MsgKind::enc_resp, "enc_resp", 3},
    {MsgKind::data_transfer, "data_transfer", 4},
    {MsgKind::dec_req, "dec_req", 5},
    {MsgKind::dec_resp, "dec_resp", 6},
    {MsgKind::ack, "ack", 7},
};

}  // namespace

std::string_view kind_name(MsgKind kind) {
    for (const auto& info : kKinds)
        if (info.kind == kind) return info.name;
    return "unknown";
}

std::optional<MsgKind> kind_from_name(std::string_view name) {
    for (const auto& info : kKinds)
        if (info.name == name) return info.kind;
    return std::nullopt;
}

int kind_step(MsgKind kind) {
    for (const auto& info : kKinds)
        if (info.kind == kind) return info.step;
    return 0;
}

void Payload::set(std::string name, Bytes value) {
    fields.emplace_back(std::move(name), std::move(value));
}

const Bytes* Payload::find(std::string_view name) const {
    for (const auto& [k, v] : fields)
        if (k == name) return &v;
    return nullptr;
}

Bytes* Payload::find_mutable(std::string_view name) {
    for (auto& [k, v] : fields)
        if (k == name) return &v;
    return nullptr;
}

Bytes Payload::encode() const {
    ByteWriter w;
    w.u32(static_cast<uint32_t>(fields.size()));
    for (const auto& [name, value] : fields) {
        w.str(name);
        w.blob(value);
    }
    return w.take();
}

std::optional<Payload> Payload::decode(std::span<const uint8_t> in) {
    try {
        ByteReader r(in);
        Payload p;
        uint32_t n = r.u32();
        if (n > 1024) return std::nullopt;
        for (uint32_t i = 0; i < n; ++i) {
            std::string name = r.str();
            Bytes value = r.blob();
            p.fields.emplace_back(std::move(name), std::move(value));
        }
        if (!r.done()) return std::nullopt;
        return p;
    } catch (const Error&) {
        return std::nullopt;
    }
}

Bytes Message::encode() const {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(kind));
    w.u64(session_id);
    w.str(sender);
    w.str(receiver);
    w.blob(payload.encode());
    return w.take();
}

std::string_view outcome_name(RunOutcome::Result result) {
    switch (result) {
        case RunOutcome::Result::pending: return "pending";
        case RunOutcome::Result::accept: return "accept";
        case RunOutcome::Result::reject: return "reject";
        case RunOutcome::Result::delivered: return "delivered";
        case RunOutcome::Result::denied: return "denied";
        case RunOutcome::Result::protocol_failure: return "protocol_failure";
        case RunOutcome::Result::aborted: return "aborted";
    }
    return "unknown";
}

std::optional<RunOutcome::Result> outcome_from_name(std::string_view name) {
    for (auto r : {RunOutcome::Result::pending, RunOutcome::Result::accept,
                   RunOutcome::Result::reject, RunOutcome::Result::delivered,
                   RunOutcome::Result::denied, RunOutcome::Result::protocol_failure,
                   RunOutcome::Result::aborted}) {
        if (outcome_name(r) == name) return r;
    }
    return std::nullopt;
}

void Scenario::validate() const {
    auto has_device = [&](const std::string& id) {
        return std::any_of(devices.begin(), devices.end(),
                           [&](const DeviceSpec& d) { return d.id == id; });
    };
    auto has_sa = [&](const std::string& id) {
        return std::any_of(sas.begin(), sas.end(), [&](const SaSpec& s) { return s.id == id; });
    };
    if (devices.empty()) throw Error(Errc::validation, "scenario: no devices declared");
    if (sas.empty()) throw Error(Errc::validation, "scenario: no security agents declared");
    for (const auto& d : devices)
        if (d.id.empty()) throw Error(Errc::validation, "scenario: device with empty id");
    for (const auto& s : sas) {
        if (s.id.empty()) throw Error(Errc::validation, "scenario: sa with empty id");
        if (has_device(s.id))
            throw Error(Errc::validation, "scenario: id used for both device and sa: " + s.id);
        if (!s.abe_policy.empty()) {
            abe::AccessPolicy policy = abe::parse_policy(s.abe_policy);
            policy.validate(abe_universe);
        }
    }
    for (size_t i = 0; i < attachments.size(); ++i) {
        const auto& [dev, sa] = attachments[i];
        if (!has_device(dev))
            throw Error(Errc::validation,
                        "scenario: attachments[" + std::to_string(i) + "]: unknown device " + dev);
        if (!has_sa(sa))
            throw Error(Errc::validation,
                        "scenario: attachments[" + std::to_string(i) + "]: unknown sa " + sa);
    }
    for (size_t i = 0; i < runs.size(); ++i) {
        const auto& run = runs[i];
        std::string at = "scenario: runs[" + std::to_string(i) + "]: ";
        if (!has_device(run.initiator)) throw Error(Errc::validation, at + "unknown initiator");
        if (!has_device(run.responder)) throw Error(Errc::validation, at + "unknown responder");
        if (run.initiator == run.responder)
            throw Error(Errc::validation, at + "initiator and responder must differ");
        if (!has_sa(run.initiator_sa)) throw Error(Errc::validation, at + "unknown initiator_sa");
        if (!has_sa(run.responder_sa)) throw Error(Errc::validation, at + "unknown responder_sa");
        if (run.kind == RunSpec::Kind::rsf_abe) {
            if (run.attrs.empty()) throw Error(Errc::validation, at + "rsf-abe needs attributes");
            for (auto a : run.attrs)
                if (a >= abe_universe)
                    throw Error(Errc::validation, at + "attribute outside universe");
        }
    }
    auto kind_family = [](MsgKind kind) {
        if (kind_step(kind) == 0) return 2;  // attachment traffic, either protocol
        return kind >= MsgKind::abac_init ? 1 : 0;
    };
    for (size_t i = 0; i < faults.size(); ++i) {
        const auto& f = faults[i];
        std::string at = "scenario: faults[" + std::to_string(i) + "]: ";
        if (f.run_index >= runs.size()) throw Error(Errc::validation, at + "run index out of range");
        int family = kind_family(f.message);
        int run_family = runs[f.run_index].kind == RunSpec::Kind::rsf_abe ? 1 : 0;
        if (family != 2 && family != run_family)
            throw Error(Errc::validation,
                        at + "message " + std::string(kind_name(f.message)) +
                            " does not occur in the targeted run's protocol");
        if (f.action == FaultRule::Action::replay && f.from_run >= runs.size())
            throw Error(Errc::validation, at + "replay source run out of range");
        if (f.action == FaultRule::Action::bit_flip && f.field.empty())
            throw Error(Errc::validation, at + "bit_flip needs a field name");
        if (f.occurrence == 0) throw Error(Errc::validation, at + "occurrence is 1-based");
    }
    timings.validate();
}

std::vector<TranscriptEntry> ScenarioReport::view(const std::string& principal) const {
    bool known = std::any_of(principals.begin(), principals.end(),
                             [&](const auto& p) { return p.first == principal; });
    if (!known) throw Error(Errc::validation, "transcript view: unknown principal " + principal);
    // Pseudonymous wire ids resolve back to their device for view assembly;
    // what the wire shows stays untouched inside the entries.
    auto owner = [this](const std::string& wire) -> std::string {
        for (const auto& attachment : attachments)
            if (attachment.wire_id == wire) return attachment.device;
        return wire;
    };
    std::vector<TranscriptEntry> out;
    for (const auto& entry : transcript) {
        if (owner(entry.delivered.sender) == principal) {
            out.push_back(entry);
        } else if (owner(entry.delivered.receiver) == principal && entry.deliver_time_ms) {
            out.push_back(entry);
        }
    }
    return out;
}

}  // namespace resiot::proto
