#include <algorithm>
#include <functional>
#include <queue>

#include "resiot/group_sig.hpp"
#include "resiot/protocol.hpp"
#include "resiot/suite.hpp"

// The deterministic discrete-event harness and the two RSF state machines
// that run on top of it. Everything is single-threaded: one event loop per
// scenario, runs executed serially, all randomness forked from the scenario
// seed.
namespace resiot::proto {

namespace {

constexpr size_t kNonceLen = 16;
constexpr size_t kHintLen = 16;

// --- event loop ---------------------------------------------------------------

struct Event {
    double time;
    uint64_t seq;
    std::function<void()> fn;
};

struct EventOrder {
    bool operator()(const Event& a, const Event& b) const {
        if (a.time != b.time) return a.time > b.time;
        return a.seq > b.seq;  // equal-time events fire in schedule order
    }
};

class EventLoop {
public:
    double now() const { return now_; }

    void schedule_in(double dt, std::function<void()> fn) {
        queue_.push(Event{now_ + dt, next_seq_++, std::move(fn)});
    }

    void run() {
        while (!queue_.empty()) {
            Event ev = queue_.top();
            queue_.pop();
            now_ = ev.time;  // time never decreases: dt >= 0 everywhere
            ev.fn();
        }
    }

private:
    double now_ = 0;
    uint64_t next_seq_ = 0;
    std::priority_queue<Event, std::vector<Event>, EventOrder> queue_;
};

// --- engine --------------------------------------------------------------------

using Result = RunOutcome::Result;

Bytes mac_bytes(const std::array<uint8_t, 32>& key, std::string_view domain, uint64_t session,
                std::initializer_list<const Bytes*> parts) {
    ByteWriter w;
    w.str(domain);
    w.u64(session);
    for (const Bytes* part : parts) w.blob(*part);
    auto h = hmac_sha256(key, w.bytes());
    return Bytes(h.begin(), h.end());
}

Bytes encode_attrs(const std::vector<abe::AttrId>& attrs) {
    ByteWriter w;
    w.u32(static_cast<uint32_t>(attrs.size()));
    for (auto a : attrs) w.u32(a);
    return w.take();
}

std::optional<std::vector<abe::AttrId>> decode_attrs(const Bytes& in) {
    try {
        ByteReader r(in);
        uint32_t n = r.u32();
        if (n > 65536) return std::nullopt;
        std::vector<abe::AttrId> out;
        for (uint32_t i = 0; i < n; ++i) out.push_back(r.u32());
        if (!r.done()) return std::nullopt;
        return out;
    } catch (const Error&) {
        return std::nullopt;
    }
}

class Engine {
public:
    explicit Engine(const Scenario& scenario)
        : sc_(scenario),
          suite_(BilinearSuite::standard()),
          root_rng_(scenario.seed, "scenario"),
          jitter_rng_(scenario.seed ^ 0x6a69747465720000ULL) {}

    ScenarioReport run() {
        sc_.validate();
        provision();
        task_index_ = 0;
        loop_.schedule_in(0, [this] { next_task(); });
        loop_.run();
        finalize_report();
        return std::move(report_);
    }

private:
    // --- provisioning ---------------------------------------------------------

    struct DeviceState {
        DeviceSpec spec;
        std::array<uint8_t, 32> aaa_key{};  // device-side copy, possibly wrong
        Drbg rng{0, "unset"};
        // sa id -> (wire id, session key) as believed by the device
        std::map<std::string, std::pair<std::string, SessionKey>> attachments;
    };

    struct SaState {
        SaSpec spec;
        Drbg rng{0, "unset"};
        std::optional<gs::MemberKey> member;
        gs::GroupPublicKey signing_gpk;  // group the member key belongs to
        std::optional<abe::AbeDecryptionKey> abe_key;
        std::map<std::string, SessionKey> registry;  // wire id -> session key
        struct PendingAttach {
            Bytes nonce_d, nonce_sa, hint;
        };
        std::map<std::string, PendingAttach> pending;
    };

    void provision() {
        auto [gpk, issuer] = gs::setup(suite_, root_rng_.fork("gkms-gs").next_u64());
        gpk_ = gpk;
        issuer_ = std::move(issuer);
        auto [rgpk, rissuer] = gs::setup(suite_, root_rng_.fork("gkms-gs-rogue").next_u64());
        rogue_gpk_ = rgpk;
        rogue_issuer_ = std::move(rissuer);
        auto [apk, amsk] = abe::setup(suite_, sc_.abe_universe, root_rng_.fork("gkms-abe").next_u64());
        abe_pk_ = std::move(apk);
        abe_msk_ = std::move(amsk);

        uint32_t member_index = 1;
        for (const auto& spec : sc_.sas) {
            SaState sa;
            sa.spec = spec;
            sa.rng = root_rng_.fork("sa-" + spec.id);
            if (spec.group_member) {
                if (spec.rogue_group) {
                    sa.member = gs::enroll(suite_, rogue_issuer_, member_index);
                    sa.signing_gpk = rogue_gpk_;
                } else {
                    sa.member = gs::enroll(suite_, issuer_, member_index);
                    sa.signing_gpk = gpk_;
                }
                ++member_index;
            }
            if (!spec.abe_policy.empty()) {
                abe::AccessPolicy policy = abe::parse_policy(spec.abe_policy);
                sa.abe_key = abe::keygen(suite_, abe_msk_, policy,
                                         root_rng_.fork("abe-key-" + spec.id).next_u64());
            }
            wire_owner_[spec.id] = spec.id;
            sa_role_[spec.id] = true;
            sas_.emplace(spec.id, std::move(sa));
        }
        for (const auto& spec : sc_.devices) {
            DeviceState dev;
            dev.spec = spec;
            dev.rng = root_rng_.fork("dev-" + spec.id);
            Drbg key_rng = root_rng_.fork("aaa-" + spec.id);
            key_rng.fill(dev.aaa_key);
            aaa_registry_[spec.id] = dev.aaa_key;
            if (spec.wrong_aaa_secret) {
                Drbg wrong = root_rng_.fork("aaa-wrong-" + spec.id);
                wrong.fill(dev.aaa_key);
            }
            wire_owner_[spec.id] = spec.id;
            sa_role_[spec.id] = false;
            devices_.emplace(spec.id, std::move(dev));
        }
        for (const auto& spec : sc_.runs) {
            RunState run;
            run.spec = spec;
            run.index = static_cast<uint32_t>(runs_.size());
            run.rng = root_rng_.fork("run-" + std::to_string(run.index));
            run.session_id = run.rng.next_u64();
            runs_.push_back(std::move(run));
        }
    }

    // --- cost model -----------------------------------------------------------

    double device_leg_ms() const { return sc_.charge_compute ? sc_.timings.device_leg_ms() : 0; }
    double device_dh_ms() const { return sc_.charge_compute ? sc_.timings.device_dh_ms : 0; }
    double device_sym_ms() const { return sc_.charge_compute ? sc_.timings.device_sym_ms : 0; }
    double sa_cost_ms(const perf::OpCountFormula& formula) const {
        return sc_.charge_compute ? perf::predict_sf_time(formula, sc_.timings.sa) : 0;
    }

    double hop_latency(const std::string& from, const std::string& to) {
        bool from_sa = sa_role_.at(from);
        bool to_sa = sa_role_.at(to);
        double base = (from_sa || to_sa) ? sc_.fabric.device_sa_roundtrip_ms / 2.0
                                         : sc_.fabric.device_device_ms;
        if (sc_.fabric.latency_jitter_ms > 0)
            base += jitter_rng_.next_unit() * sc_.fabric.latency_jitter_ms;
        return base;
    }

    // --- fabric ----------------------------------------------------------------

    void send(int run_index, MsgKind kind, const std::string& sender_wire,
              const std::string& receiver, Payload payload, double busy_ms) {
        Message msg;
        msg.kind = kind;
        msg.session_id = run_index >= 0 ? runs_[run_index].session_id : 0;
        msg.sender = sender_wire;
        msg.receiver = receiver;
        msg.payload = payload;

        TranscriptEntry entry;
        entry.seq = next_transcript_seq_++;
        entry.run_index = run_index;
        entry.send_time_ms = loop_.now() + busy_ms;
        entry.original_payload = payload;
        ++report_.messages_sent;

        Payload delivered = payload;
        bool mutated = false;
        bool dropped = false;
        bool duplicate = false;
        if (run_index >= 0) {
            uint32_t occ = ++occurrence_[{static_cast<uint32_t>(run_index), kind}];
            archive_[{static_cast<uint32_t>(run_index), kind, occ}] = payload;
            for (const auto& rule : sc_.faults) {
                if (rule.run_index != static_cast<uint32_t>(run_index) || rule.message != kind ||
                    rule.occurrence != occ)
                    continue;
                switch (rule.action) {
                    case FaultRule::Action::drop:
                        dropped = true;
                        break;
                    case FaultRule::Action::bit_flip: {
                        Bytes* field = delivered.find_mutable(rule.field);
                        if (field && !field->empty()) {
                            uint32_t bit = rule.bit % (field->size() * 8);
                            (*field)[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
                            mutated = true;
                        }
                        break;
                    }
                    case FaultRule::Action::replay: {
                        auto it = archive_.find({rule.from_run, kind, 1});
                        if (it != archive_.end()) {
                            delivered = it->second;
                            mutated = true;
                        }
                        break;
                    }
                    case FaultRule::Action::duplicate:
                        duplicate = true;
                        break;
                }
            }
        }

        msg.payload = delivered;
        entry.delivered = msg;
        entry.mutated = mutated;
        if (dropped) {
            ++report_.messages_dropped;
            report_.transcript.push_back(std::move(entry));
            return;
        }
        double latency = hop_latency(sender_wire, receiver);
        double deliver_at = busy_ms + latency;
        entry.deliver_time_ms = loop_.now() + deliver_at;
        report_.transcript.push_back(entry);
        loop_.schedule_in(deliver_at, [this, msg] {
            ++report_.messages_delivered;
            dispatch(msg);
        });
        if (duplicate) {
            ++report_.messages_sent;
            TranscriptEntry dup = entry;
            dup.seq = next_transcript_seq_++;
            dup.mutated = true;
            report_.transcript.push_back(dup);
            loop_.schedule_in(deliver_at, [this, msg] {
                ++report_.messages_delivered;
                dispatch(msg);
            });
        }
    }

    // --- task sequencing --------------------------------------------------------

    void next_task() {
        if (task_index_ < initial_attach_tasks_.size()) {
            auto [dev, sa] = initial_attach_tasks_[task_index_++];
            begin_attach(dev, sa, -1, [this](bool) { next_task(); });
            return;
        }
        size_t run_index = task_index_ - initial_attach_tasks_.size();
        if (run_index >= runs_.size()) return;
        ++task_index_;
        begin_run(static_cast<int>(run_index));
    }

    // --- attachment stub ---------------------------------------------------------

    struct AttachContext {
        std::string device, sa, wire;
        Bytes nonce_d;
        int run_index;
        std::function<void(bool)> done;
        bool finished = false;
    };

    bool pair_authorized(const std::string& dev, const std::string& sa) const {
        return std::any_of(sc_.attachments.begin(), sc_.attachments.end(),
                           [&](const auto& p) { return p.first == dev && p.second == sa; });
    }

    void begin_attach(const std::string& device_id, const std::string& sa_id, int run_index,
                      std::function<void(bool)> done) {
        DeviceState& dev = devices_.at(device_id);
        auto ctx = std::make_shared<AttachContext>();
        ctx->device = device_id;
        ctx->sa = sa_id;
        ctx->run_index = run_index;
        ctx->done = std::move(done);
        ctx->wire = sc_.anonymous_attachment
                        ? "anon-" + to_hex(dev.rng.bytes(8))
                        : device_id;
        ctx->nonce_d = dev.rng.bytes(kNonceLen);
        wire_owner_[ctx->wire] = device_id;
        sa_role_[ctx->wire] = false;
        attach_ctx_[ctx->wire] = ctx;

        Bytes hint_full = mac_bytes(dev.aaa_key, "aaa-hint", 0, {&ctx->nonce_d});
        Bytes hint(hint_full.begin(), hint_full.begin() + kHintLen);
        Payload p;
        p.set("nonce_d", ctx->nonce_d);
        p.set("hint", hint);
        send(run_index, MsgKind::attach_req, ctx->wire, sa_id, std::move(p), 0);
        double timeout = sc_.fabric.step_timeout_ms;
        loop_.schedule_in(timeout, [this, ctx] {
            if (!ctx->finished) finish_attach(*ctx, false, SessionKey{});
        });
    }

    void finish_attach(AttachContext& ctx, bool ok, const SessionKey& key) {
        if (ctx.finished) return;
        ctx.finished = true;
        AttachmentReport rep;
        rep.device = ctx.device;
        rep.sa = ctx.sa;
        rep.wire_id = ctx.wire;
        rep.ok = ok;
        rep.established_at_ms = loop_.now();
        rep.run_index = ctx.run_index;
        if (ok) rep.key_fingerprint = to_hex(sha256(key.key));
        report_.attachments.push_back(rep);
        if (ok) devices_.at(ctx.device).attachments[ctx.sa] = {ctx.wire, key};
        auto done = std::move(ctx.done);
        if (done) done(ok);
    }

    void handle_attach_req(const Message& msg) {
        SaState& sa = sas_.at(msg.receiver);
        const Bytes* nonce_d = msg.payload.find("nonce_d");
        const Bytes* hint = msg.payload.find("hint");
        if (!nonce_d || !hint) return;
        SaState::PendingAttach pending;
        pending.nonce_d = *nonce_d;
        pending.hint = *hint;
        pending.nonce_sa = sa.rng.bytes(kNonceLen);
        Payload p;
        p.set("nonce_sa", pending.nonce_sa);
        sa.pending[msg.sender] = std::move(pending);
        send(run_of_wire(msg.sender), MsgKind::attach_challenge, msg.receiver, msg.sender,
             std::move(p), 0);
    }

    void handle_attach_challenge(const Message& msg) {
        auto it = attach_ctx_.find(msg.receiver);
        if (it == attach_ctx_.end() || it->second->finished) return;
        AttachContext& ctx = *it->second;
        DeviceState& dev = devices_.at(ctx.device);
        const Bytes* nonce_sa = msg.payload.find("nonce_sa");
        if (!nonce_sa) return;
        Bytes wire_bytes = to_bytes(ctx.wire);
        Bytes sa_bytes = to_bytes(ctx.sa);
        Bytes proof =
            mac_bytes(dev.aaa_key, "aaa-proof", 0, {&ctx.nonce_d, nonce_sa, &wire_bytes, &sa_bytes});
        Payload p;
        p.set("proof", proof);
        send(ctx.run_index, MsgKind::attach_resp, ctx.wire, ctx.sa, std::move(p), 0);
    }

    // The SA hands (hint, nonces, proof) to the AAA stub over its assumed
    // secure channel; the stub resolves the device by hint and checks the
    // proof against the registered secret.
    void handle_attach_resp(const Message& msg) {
        SaState& sa = sas_.at(msg.receiver);
        auto pending_it = sa.pending.find(msg.sender);
        if (pending_it == sa.pending.end()) return;
        SaState::PendingAttach pending = pending_it->second;
        sa.pending.erase(pending_it);
        const Bytes* proof = msg.payload.find("proof");
        if (!proof) return;

        Bytes wire_bytes = to_bytes(msg.sender);
        Bytes sa_bytes = to_bytes(msg.receiver);
        bool ok = false;
        SessionKey session_key;
        for (const auto& [device_id, key] : aaa_registry_) {
            Bytes hint_full = mac_bytes(key, "aaa-hint", 0, {&pending.nonce_d});
            if (!std::equal(pending.hint.begin(), pending.hint.end(), hint_full.begin())) continue;
            Bytes expect = mac_bytes(key, "aaa-proof", 0,
                                     {&pending.nonce_d, &pending.nonce_sa, &wire_bytes, &sa_bytes});
            if (expect == *proof) {
                Bytes key_material = mac_bytes(key, "attach-key", 0,
                                               {&pending.nonce_d, &pending.nonce_sa, &wire_bytes,
                                                &sa_bytes});
                std::copy(key_material.begin(), key_material.end(), session_key.key.begin());
                ok = true;
            }
            break;  // hint identified the claimed device; proof decides
        }
        if (ok) sa.registry[msg.sender] = session_key;
        auto ctx_it = attach_ctx_.find(msg.sender);
        if (ctx_it != attach_ctx_.end()) finish_attach(*ctx_it->second, ok, session_key);
    }

    // --- run orchestration --------------------------------------------------------

    struct RunState {
        RunSpec spec;
        uint32_t index = 0;
        uint64_t session_id = 0;
        Drbg rng{0, "unset"};
        RunOutcome outcome;
        double started_at = -1;
        double finished_at = -1;
        // linear stage machine: the next expected protocol message
        MsgKind expected_kind = MsgKind::auth_req;
        std::string expected_receiver;
        uint64_t stage_serial = 0;
        // initiator side
        DhKeypair dh_i;
        Bytes nonce_i;
        SessionKey k_i;
        // responder side
        DhKeypair dh_j;
        SessionKey k_j;
        // rsf-abe state
        Bytes ack_marker;
        Bytes delivered_data;
    };

    RunState* run_of(int index) {
        return index >= 0 && index < static_cast<int>(runs_.size()) ? &runs_[index] : nullptr;
    }

    int run_of_wire(const std::string& wire) const {
        auto it = attach_ctx_.find(wire);
        return it != attach_ctx_.end() ? it->second->run_index : -1;
    }

    void begin_run(int index) {
        RunState& run = runs_[index];
        std::vector<std::pair<std::string, std::string>> pairs;
        if (run.spec.kind == RunSpec::Kind::rsf_gs) {
            pairs = {{run.spec.responder, run.spec.responder_sa},
                     {run.spec.initiator, run.spec.initiator_sa}};
        } else {
            pairs = {{run.spec.initiator, run.spec.initiator_sa},
                     {run.spec.responder, run.spec.responder_sa}};
        }
        // Anonymous mode re-attaches authorized pairs with a fresh pseudonym
        // before every run; identity mode relies on the scenario-level
        // attachments established up front.
        std::vector<std::pair<std::string, std::string>> todo;
        if (sc_.anonymous_attachment) {
            for (const auto& pair : pairs)
                if (pair_authorized(pair.first, pair.second)) todo.push_back(pair);
        }
        attach_chain(index, std::make_shared<std::vector<std::pair<std::string, std::string>>>(
                                std::move(todo)),
                     0);
    }

    void attach_chain(int run_index,
                      std::shared_ptr<std::vector<std::pair<std::string, std::string>>> todo,
                      size_t pos) {
        if (pos >= todo->size()) {
            start_protocol(run_index);
            return;
        }
        const auto& [dev, sa] = (*todo)[pos];
        begin_attach(dev, sa, run_index,
                     [this, run_index, todo, pos](bool) { attach_chain(run_index, todo, pos + 1); });
    }

    // Wire id + MAC key a device uses toward an SA; unattached devices fall
    // back to their bare id and an all-zero key, which the SA refuses.
    std::pair<std::string, SessionKey> device_channel(const std::string& device_id,
                                                      const std::string& sa_id) {
        DeviceState& dev = devices_.at(device_id);
        auto it = dev.attachments.find(sa_id);
        if (it != dev.attachments.end()) return it->second;
        return {device_id, SessionKey{}};
    }

    void set_stage(RunState& run, MsgKind kind, const std::string& receiver) {
        run.expected_kind = kind;
        run.expected_receiver = receiver;
        ++run.stage_serial;
        uint64_t serial = run.stage_serial;
        uint32_t index = run.index;
        loop_.schedule_in(sc_.fabric.step_timeout_ms, [this, index, serial] {
            RunState& r = runs_[index];
            if (!r.outcome.final() && r.stage_serial == serial)
                abort_run(r, kind_step(r.expected_kind), "timeout");
        });
    }

    void finish_run(RunState& run, Result result, int failed_step, const std::string& reason) {
        if (run.outcome.final()) return;  // outcome set exactly once
        run.outcome.result = result;
        run.outcome.failed_step = failed_step;
        run.outcome.reason = reason;
        run.finished_at = loop_.now();
        ++run.stage_serial;  // disarm timeouts
        loop_.schedule_in(0, [this] { next_task(); });
    }

    void abort_run(RunState& run, int step, const std::string& reason) {
        finish_run(run, Result::aborted, step, reason);
    }

    // --- rsf-gs ---------------------------------------------------------------------

    void start_protocol(int index) {
        RunState& run = runs_[index];
        run.started_at = loop_.now();
        if (run.spec.kind == RunSpec::Kind::rsf_gs)
            gs_step1(run);
        else
            abe_step1(run);
    }

    // 1) D_i -> D_j: auth_req = {DH_X, Nonce_i}
    void gs_step1(RunState& run) {
        Drbg dh_rng_i = run.rng.fork("dh-i");
        run.dh_i = suite_.dh_generate(dh_rng_i);
        run.nonce_i = run.rng.bytes(kNonceLen);
        Payload p;
        p.set("dh_x", bn::encode_g1(run.dh_i.pub));
        p.set("nonce", run.nonce_i);
        set_stage(run, MsgKind::auth_req, run.spec.responder);
        send(run.index, MsgKind::auth_req, run.spec.initiator, run.spec.responder, std::move(p), 0);
    }

    // 2) D_j derives K, E_j = E_K(Nonce_i), offloads signing to SA_j.
    void gs_on_auth_req(RunState& run, const Message& msg) {
        const Bytes* dh_x = msg.payload.find("dh_x");
        const Bytes* nonce = msg.payload.find("nonce");
        if (!dh_x || !nonce) return abort_run(run, 2, "missing-field");
        auto peer = bn::decode_g1(*dh_x);
        if (!peer || peer->infinity) return abort_run(run, 2, "malformed-dh");
        Drbg dh_rng_j = run.rng.fork("dh-j");
        run.dh_j = suite_.dh_generate(dh_rng_j);
        run.k_j = suite_.dh_agree(run.dh_j, *peer);
        // E_j must be bit-reproducible by D_i: nonce fixed by Nonce_i.
        Ciphertext e_j =
            suite_.sym_encrypt_with_nonce(run.k_j, suite_.derive_nonce(*nonce, "ej"), *nonce);
        Bytes e_j_bytes = e_j.encode();

        auto [wire, key] = device_channel(run.spec.responder, run.spec.responder_sa);
        Bytes tag = mac_bytes(key.key, "sign-req", run.session_id, {&e_j_bytes});
        Payload p;
        p.set("e_j", e_j_bytes);
        p.set("tag", tag);
        set_stage(run, MsgKind::sign_req, run.spec.responder_sa);
        send(run.index, MsgKind::sign_req, wire, run.spec.responder_sa, std::move(p),
             device_leg_ms());
    }

    // 3) SA_j signs E_j with its group credential.
    void gs_on_sign_req(RunState& run, const Message& msg) {
        SaState& sa = sas_.at(msg.receiver);
        const Bytes* e_j = msg.payload.find("e_j");
        const Bytes* tag = msg.payload.find("tag");
        if (!e_j || !tag) return abort_run(run, 2, "missing-field");
        auto reg = sa.registry.find(msg.sender);
        bool authorized =
            reg != sa.registry.end() &&
            *tag == mac_bytes(reg->second.key, "sign-req", run.session_id, {e_j});
        if (!authorized || !sa.member) {
            Payload p;
            p.set("refused", to_bytes("unattached"));
            set_stage(run, MsgKind::sign_resp, run.spec.responder);
            send(run.index, MsgKind::sign_resp, msg.receiver, msg.sender, std::move(p), 0);
            return;
        }
        gs::GroupSignature sigma =
            gs::sign(suite_, sa.signing_gpk, *sa.member, *e_j, sa.rng.next_u64());
        Payload p;
        p.set("sigma", sigma.encode());
        set_stage(run, MsgKind::sign_resp, run.spec.responder);
        send(run.index, MsgKind::sign_resp, msg.receiver, msg.sender, std::move(p),
             sa_cost_ms(perf::gs_sign_formula()));
    }

    // 4) D_j wraps sigma for D_i: auth_resp = {DH_Y, E'_j}.
    void gs_on_sign_resp(RunState& run, const Message& msg) {
        if (msg.payload.find("refused")) return abort_run(run, 3, "offload-refused");
        const Bytes* sigma = msg.payload.find("sigma");
        if (!sigma) return abort_run(run, 4, "missing-field");
        Ciphertext e_j_prime = suite_.sym_encrypt_with_nonce(
            run.k_j, suite_.derive_nonce(run.nonce_i, "ejp"), *sigma);
        Payload p;
        p.set("dh_y", bn::encode_g1(run.dh_j.pub));
        p.set("e_j_prime", e_j_prime.encode());
        set_stage(run, MsgKind::auth_resp, run.spec.initiator);
        send(run.index, MsgKind::auth_resp, run.spec.responder, run.spec.initiator, std::move(p),
             0);
    }

    // 5) D_i recovers sigma, recomputes E_j, offloads verification to SA_i.
    void gs_on_auth_resp(RunState& run, const Message& msg) {
        const Bytes* dh_y = msg.payload.find("dh_y");
        const Bytes* e_j_prime = msg.payload.find("e_j_prime");
        if (!dh_y || !e_j_prime) return abort_run(run, 5, "missing-field");
        auto peer = bn::decode_g1(*dh_y);
        if (!peer || peer->infinity) return abort_run(run, 5, "malformed-dh");
        run.k_i = suite_.dh_agree(run.dh_i, *peer);
        auto ct = Ciphertext::decode(*e_j_prime);
        if (!ct) return abort_run(run, 5, "malformed-ciphertext");
        auto sigma = suite_.sym_decrypt(run.k_i, *ct);
        if (!sigma) return finish_run(run, Result::reject, 5, "decrypt-failed");
        // The signed object is E_j; D_i reconstructs it from its own Nonce_i.
        Ciphertext e_j = suite_.sym_encrypt_with_nonce(
            run.k_i, suite_.derive_nonce(run.nonce_i, "ej"), run.nonce_i);
        Bytes e_j_bytes = e_j.encode();

        auto [wire, key] = device_channel(run.spec.initiator, run.spec.initiator_sa);
        ByteWriter mac_in;
        mac_in.blob(e_j_bytes);
        mac_in.blob(*sigma);
        Bytes mac_input = mac_in.take();
        Bytes tag = mac_bytes(key.key, "verify-req", run.session_id, {&mac_input});
        Payload p;
        p.set("message", e_j_bytes);
        p.set("sigma", *sigma);
        p.set("tag", tag);
        set_stage(run, MsgKind::verify_req, run.spec.initiator_sa);
        send(run.index, MsgKind::verify_req, wire, run.spec.initiator_sa, std::move(p),
             device_leg_ms());
    }

    // 6) SA_i verifies sigma against the recomputed E_j.
    void gs_on_verify_req(RunState& run, const Message& msg) {
        SaState& sa = sas_.at(msg.receiver);
        const Bytes* message = msg.payload.find("message");
        const Bytes* sigma = msg.payload.find("sigma");
        const Bytes* tag = msg.payload.find("tag");
        if (!message || !sigma || !tag) return abort_run(run, 5, "missing-field");
        ByteWriter mac_in;
        mac_in.blob(*message);
        mac_in.blob(*sigma);
        Bytes mac_input = mac_in.take();
        auto reg = sa.registry.find(msg.sender);
        bool authorized = reg != sa.registry.end() &&
                          *tag == mac_bytes(reg->second.key, "verify-req", run.session_id,
                                            {&mac_input});
        Payload p;
        if (!authorized) {
            p.set("refused", to_bytes("unattached"));
            set_stage(run, MsgKind::verify_resp, run.spec.initiator);
            send(run.index, MsgKind::verify_resp, msg.receiver, msg.sender, std::move(p), 0);
            return;
        }
        gs::VerifyStatus status = gs::verify_encoded(suite_, gpk_, *message, *sigma);
        p.set("ok", Bytes{status == gs::VerifyStatus::ok ? uint8_t{1} : uint8_t{0}});
        p.set("detail", to_bytes(status == gs::VerifyStatus::ok          ? "ok"
                                 : status == gs::VerifyStatus::malformed ? "malformed"
                                                                         : "bad-signature"));
        set_stage(run, MsgKind::verify_resp, run.spec.initiator);
        send(run.index, MsgKind::verify_resp, msg.receiver, msg.sender, std::move(p),
             sa_cost_ms(perf::gs_verify_formula()));
    }

    void gs_on_verify_resp(RunState& run, const Message& msg) {
        if (msg.payload.find("refused")) return abort_run(run, 6, "offload-refused");
        const Bytes* ok = msg.payload.find("ok");
        if (!ok || ok->size() != 1) return abort_run(run, 6, "missing-field");
        if ((*ok)[0] == 1) return finish_run(run, Result::accept, 0, "");
        const Bytes* detail = msg.payload.find("detail");
        std::string reason = "signature-rejected";
        if (detail && *detail == to_bytes("malformed")) reason = "signature-malformed";
        finish_run(run, Result::reject, 6, reason);
    }

    // --- rsf-abe -----------------------------------------------------------------

    // 1) Both devices exchange DH halves (abac_init both ways).
    void abe_step1(RunState& run) {
        Drbg dh_rng_i = run.rng.fork("dh-i");
        run.dh_i = suite_.dh_generate(dh_rng_i);
        Payload p;
        p.set("dh", bn::encode_g1(run.dh_i.pub));
        set_stage(run, MsgKind::abac_init, run.spec.responder);
        send(run.index, MsgKind::abac_init, run.spec.initiator, run.spec.responder, std::move(p),
             0);
    }

    void abe_on_init(RunState& run, const Message& msg) {
        const Bytes* dh = msg.payload.find("dh");
        if (!dh) return abort_run(run, 1, "missing-field");
        auto peer = bn::decode_g1(*dh);
        if (!peer || peer->infinity) return abort_run(run, 1, "malformed-dh");
        if (wire_owner_.at(msg.receiver) == run.spec.responder) {
            Drbg dh_rng_j = run.rng.fork("dh-j");
        run.dh_j = suite_.dh_generate(dh_rng_j);
            run.k_j = suite_.dh_agree(run.dh_j, *peer);
            Payload p;
            p.set("dh", bn::encode_g1(run.dh_j.pub));
            set_stage(run, MsgKind::abac_init, run.spec.initiator);
            send(run.index, MsgKind::abac_init, run.spec.responder, run.spec.initiator,
                 std::move(p), device_dh_ms());
            return;
        }
        // initiator completes the exchange and enters step 2
        run.k_i = suite_.dh_agree(run.dh_i, *peer);
        abe_step2(run);
    }

    // 2) D_i -> SA_i: E_i = E_K(data || ack) plus the attribute descriptor.
    void abe_step2(RunState& run) {
        run.ack_marker = run.rng.bytes(kNonceLen);
        ByteWriter inner;
        inner.blob(run.spec.data);
        inner.blob(run.ack_marker);
        Ciphertext e_i = suite_.sym_encrypt_with_nonce(
            run.k_i, suite_.derive_nonce(run.rng.bytes(kNonceLen), "ei"), inner.bytes());
        Bytes e_i_bytes = e_i.encode();
        Bytes attrs = encode_attrs(run.spec.attrs);

        auto [wire, key] = device_channel(run.spec.initiator, run.spec.initiator_sa);
        ByteWriter mac_in;
        mac_in.blob(attrs);
        mac_in.blob(e_i_bytes);
        Bytes mac_input = mac_in.take();
        Bytes tag = mac_bytes(key.key, "enc-req", run.session_id, {&mac_input});
        Payload p;
        p.set("attrs", attrs);
        p.set("e_i", e_i_bytes);
        p.set("tag", tag);
        set_stage(run, MsgKind::enc_req, run.spec.initiator_sa);
        send(run.index, MsgKind::enc_req, wire, run.spec.initiator_sa, std::move(p),
             device_dh_ms() + device_sym_ms());
    }

    // 3) SA_i: E'_i = ABEnc(pk, attrs, E_i).
    void abe_on_enc_req(RunState& run, const Message& msg) {
        SaState& sa = sas_.at(msg.receiver);
        const Bytes* attrs_enc = msg.payload.find("attrs");
        const Bytes* e_i = msg.payload.find("e_i");
        const Bytes* tag = msg.payload.find("tag");
        if (!attrs_enc || !e_i || !tag) return abort_run(run, 2, "missing-field");
        ByteWriter mac_in;
        mac_in.blob(*attrs_enc);
        mac_in.blob(*e_i);
        Bytes mac_input = mac_in.take();
        auto reg = sa.registry.find(msg.sender);
        bool authorized =
            reg != sa.registry.end() &&
            *tag == mac_bytes(reg->second.key, "enc-req", run.session_id, {&mac_input});
        if (!authorized) {
            Payload p;
            p.set("refused", to_bytes("unattached"));
            set_stage(run, MsgKind::enc_resp, run.spec.initiator);
            send(run.index, MsgKind::enc_resp, msg.receiver, msg.sender, std::move(p), 0);
            return;
        }
        auto attrs = decode_attrs(*attrs_enc);
        if (!attrs) return abort_run(run, 3, "malformed-attrs");
        abe::AbeCiphertext ct;
        try {
            ct = abe::encrypt(suite_, abe_pk_, *attrs, *e_i, sa.rng.next_u64());
        } catch (const Error&) {
            return abort_run(run, 3, "encrypt-failed");
        }
        Payload p;
        p.set("e_i_prime", ct.encode());
        set_stage(run, MsgKind::enc_resp, run.spec.initiator);
        send(run.index, MsgKind::enc_resp, msg.receiver, msg.sender, std::move(p),
             sa_cost_ms(perf::abe_encrypt_formula(static_cast<uint32_t>(attrs->size()))));
    }

    // 4) D_i -> D_j: E''_i = E_K(E'_i).
    void abe_on_enc_resp(RunState& run, const Message& msg) {
        if (msg.payload.find("refused")) return abort_run(run, 3, "offload-refused");
        const Bytes* e_i_prime = msg.payload.find("e_i_prime");
        if (!e_i_prime) return abort_run(run, 4, "missing-field");
        Ciphertext e_i_dprime = suite_.sym_encrypt_with_nonce(
            run.k_i, suite_.derive_nonce(run.rng.bytes(kNonceLen), "eii"), *e_i_prime);
        Payload p;
        p.set("e_i_dprime", e_i_dprime.encode());
        set_stage(run, MsgKind::data_transfer, run.spec.responder);
        send(run.index, MsgKind::data_transfer, run.spec.initiator, run.spec.responder,
             std::move(p), 0);
    }

    // 5) D_j unwraps E''_i and forwards E'_i to SA_j.
    void abe_on_data_transfer(RunState& run, const Message& msg) {
        const Bytes* e_i_dprime = msg.payload.find("e_i_dprime");
        if (!e_i_dprime) return abort_run(run, 5, "missing-field");
        auto ct = Ciphertext::decode(*e_i_dprime);
        if (!ct) return finish_run(run, Result::protocol_failure, 5, "malformed-ciphertext");
        auto e_i_prime = suite_.sym_decrypt(run.k_j, *ct);
        if (!e_i_prime) return finish_run(run, Result::protocol_failure, 5, "decrypt-failed");
        auto [wire, key] = device_channel(run.spec.responder, run.spec.responder_sa);
        Bytes tag = mac_bytes(key.key, "dec-req", run.session_id, {&*e_i_prime});
        Payload p;
        p.set("e_i_prime", *e_i_prime);
        p.set("tag", tag);
        set_stage(run, MsgKind::dec_req, run.spec.responder_sa);
        send(run.index, MsgKind::dec_req, wire, run.spec.responder_sa, std::move(p),
             device_sym_ms());
    }

    // 6) SA_j runs ABDec with its key-policy credential.
    void abe_on_dec_req(RunState& run, const Message& msg) {
        SaState& sa = sas_.at(msg.receiver);
        const Bytes* e_i_prime = msg.payload.find("e_i_prime");
        const Bytes* tag = msg.payload.find("tag");
        if (!e_i_prime || !tag) return abort_run(run, 5, "missing-field");
        auto reg = sa.registry.find(msg.sender);
        bool authorized =
            reg != sa.registry.end() &&
            *tag == mac_bytes(reg->second.key, "dec-req", run.session_id, {e_i_prime});
        Payload p;
        if (!authorized || !sa.abe_key) {
            p.set("refused", to_bytes("unattached"));
            set_stage(run, MsgKind::dec_resp, run.spec.responder);
            send(run.index, MsgKind::dec_resp, msg.receiver, msg.sender, std::move(p), 0);
            return;
        }
        auto ct = abe::AbeCiphertext::decode(*e_i_prime);
        if (!ct) {
            p.set("error", to_bytes("malformed-ciphertext"));
            set_stage(run, MsgKind::dec_resp, run.spec.responder);
            send(run.index, MsgKind::dec_resp, msg.receiver, msg.sender, std::move(p), 0);
            return;
        }
        abe::DecryptResult res = abe::decrypt(suite_, *sa.abe_key, *ct);
        double cost = sa_cost_ms(perf::abe_decrypt_formula(static_cast<uint32_t>(ct->attrs.size())));
        if (res.status == abe::DecryptStatus::ok)
            p.set("e_i", res.payload);
        else if (res.status == abe::DecryptStatus::policy_unsatisfied)
            p.set("denied", to_bytes("policy-unsatisfied"));
        else
            p.set("error", to_bytes("malformed-ciphertext"));
        set_stage(run, MsgKind::dec_resp, run.spec.responder);
        send(run.index, MsgKind::dec_resp, msg.receiver, msg.sender, std::move(p), cost);
    }

    // 7) D_j recovers data || ack and confirms toward D_i.
    void abe_on_dec_resp(RunState& run, const Message& msg) {
        Payload p;
        if (msg.payload.find("refused")) return abort_run(run, 6, "offload-refused");
        if (msg.payload.find("denied")) {
            p.set("status", to_bytes("denied"));
            set_stage(run, MsgKind::ack, run.spec.initiator);
            send(run.index, MsgKind::ack, run.spec.responder, run.spec.initiator, std::move(p), 0);
            return;
        }
        if (msg.payload.find("error"))
            return finish_run(run, Result::protocol_failure, 6, "malformed-ciphertext");
        const Bytes* e_i = msg.payload.find("e_i");
        if (!e_i) return abort_run(run, 6, "missing-field");
        auto ct = Ciphertext::decode(*e_i);
        if (!ct) return finish_run(run, Result::protocol_failure, 7, "malformed-ciphertext");
        auto inner = suite_.sym_decrypt(run.k_j, *ct);
        if (!inner) return finish_run(run, Result::protocol_failure, 7, "decrypt-failed");
        Bytes data, ack;
        try {
            ByteReader r(*inner);
            data = r.blob();
            ack = r.blob();
            if (!r.done()) throw Error(Errc::parse, "trailing");
        } catch (const Error&) {
            return finish_run(run, Result::protocol_failure, 7, "malformed-payload");
        }
        run.delivered_data = data;
        p.set("status", to_bytes("ok"));
        p.set("ack", ack);
        set_stage(run, MsgKind::ack, run.spec.initiator);
        send(run.index, MsgKind::ack, run.spec.responder, run.spec.initiator, std::move(p), 0);
    }

    void abe_on_ack(RunState& run, const Message& msg) {
        const Bytes* status = msg.payload.find("status");
        if (!status) return abort_run(run, 7, "missing-field");
        if (*status == to_bytes("denied"))
            return finish_run(run, Result::denied, 6, "policy-unsatisfied");
        const Bytes* ack = msg.payload.find("ack");
        if (!ack || *ack != run.ack_marker)
            return finish_run(run, Result::protocol_failure, 7, "ack-mismatch");
        finish_run(run, Result::delivered, 0, "");
    }

    // --- dispatch -------------------------------------------------------------------

    void dispatch(const Message& msg) {
        switch (msg.kind) {
            case MsgKind::attach_req: return handle_attach_req(msg);
            case MsgKind::attach_challenge: return handle_attach_challenge(msg);
            case MsgKind::attach_resp: return handle_attach_resp(msg);
            default: break;
        }
        // protocol messages are bound to the single in-flight run
        RunState* run_ptr = nullptr;
        for (auto& run : runs_)
            if (run.session_id == msg.session_id) run_ptr = &run;
        if (!run_ptr || run_ptr->outcome.final()) return;
        RunState& run = *run_ptr;
        std::string receiver_principal = wire_owner_.count(msg.receiver)
                                             ? wire_owner_.at(msg.receiver)
                                             : msg.receiver;
        std::string expected_principal = wire_owner_.count(run.expected_receiver)
                                             ? wire_owner_.at(run.expected_receiver)
                                             : run.expected_receiver;
        if (msg.kind != run.expected_kind || receiver_principal != expected_principal)
            return abort_run(run, kind_step(run.expected_kind), "unexpected-message");

        switch (msg.kind) {
            case MsgKind::auth_req: return gs_on_auth_req(run, msg);
            case MsgKind::sign_req: return gs_on_sign_req(run, msg);
            case MsgKind::sign_resp: return gs_on_sign_resp(run, msg);
            case MsgKind::auth_resp: return gs_on_auth_resp(run, msg);
            case MsgKind::verify_req: return gs_on_verify_req(run, msg);
            case MsgKind::verify_resp: return gs_on_verify_resp(run, msg);
            case MsgKind::abac_init: return abe_on_init(run, msg);
            case MsgKind::enc_req: return abe_on_enc_req(run, msg);
            case MsgKind::enc_resp: return abe_on_enc_resp(run, msg);
            case MsgKind::data_transfer: return abe_on_data_transfer(run, msg);
            case MsgKind::dec_req: return abe_on_dec_req(run, msg);
            case MsgKind::dec_resp: return abe_on_dec_resp(run, msg);
            case MsgKind::ack: return abe_on_ack(run, msg);
            default: return;
        }
    }

    void finalize_report() {
        for (const auto& spec : sc_.devices) report_.principals.emplace_back(spec.id, Role::device);
        for (const auto& spec : sc_.sas)
            report_.principals.emplace_back(spec.id, Role::security_agent);
        report_.all_expectations_met = true;
        for (auto& run : runs_) {
            RunReport rep;
            rep.spec = run.spec;
            if (!run.outcome.final()) {
                run.outcome.result = Result::aborted;
                run.outcome.failed_step = kind_step(run.expected_kind);
                run.outcome.reason = "incomplete";
            }
            rep.outcome = run.outcome;
            rep.started_at_ms = run.started_at;
            rep.finished_at_ms = run.finished_at;
            rep.elapsed_ms = (run.finished_at >= 0 && run.started_at >= 0)
                                 ? run.finished_at - run.started_at
                                 : 0;
            rep.session_id = run.session_id;
            rep.delivered_data = run.delivered_data;
            SessionKey unset;
            if (!run.nonce_i.empty()) rep.secret_markers.emplace_back("nonce_i", run.nonce_i);
            if (!(run.k_i == unset))
                rep.secret_markers.emplace_back("session_key_i",
                                                Bytes(run.k_i.key.begin(), run.k_i.key.end()));
            if (!(run.k_j == unset))
                rep.secret_markers.emplace_back("session_key_j",
                                                Bytes(run.k_j.key.begin(), run.k_j.key.end()));
            if (!run.spec.data.empty()) rep.secret_markers.emplace_back("data", run.spec.data);
            if (!run.ack_marker.empty()) rep.secret_markers.emplace_back("ack", run.ack_marker);
            rep.expectation_met = !run.spec.expect || *run.spec.expect == run.outcome.result;
            report_.all_expectations_met &= rep.expectation_met;
            report_.runs.push_back(std::move(rep));
        }
    }

    const Scenario& sc_;
    const BilinearSuite& suite_;
    EventLoop loop_;
    Drbg root_rng_;
    SimRng jitter_rng_;

    gs::GroupPublicKey gpk_;
    gs::GroupIssuerKey issuer_;
    gs::GroupPublicKey rogue_gpk_;
    gs::GroupIssuerKey rogue_issuer_;
    abe::AbePublicKey abe_pk_;
    abe::AbeMasterKey abe_msk_;

    std::map<std::string, DeviceState> devices_;
    std::map<std::string, SaState> sas_;
    std::map<std::string, std::array<uint8_t, 32>> aaa_registry_;
    std::map<std::string, std::string> wire_owner_;  // wire id -> principal id
    std::map<std::string, bool> sa_role_;            // wire id -> is SA
    std::map<std::string, std::shared_ptr<AttachContext>> attach_ctx_;

    std::vector<RunState> runs_;
    std::vector<std::pair<std::string, std::string>> initial_attach_tasks_;
    size_t task_index_ = 0;
    uint64_t next_transcript_seq_ = 0;
    std::map<std::pair<uint32_t, MsgKind>, uint32_t> occurrence_;
    std::map<std::tuple<uint32_t, MsgKind, uint32_t>, Payload> archive_;
    ScenarioReport report_;

public:
    void plan_initial_attachments() {
        if (!sc_.anonymous_attachment) initial_attach_tasks_ = sc_.attachments;
    }
};

}  // namespace

ScenarioReport run_scenario(const Scenario& scenario) {
    Engine engine(scenario);
    engine.plan_initial_attachments();
    return engine.run();
}

namespace {

Scenario pairwise_scenario(RunSpec::Kind kind, const PairwiseConfig& config) {
    Scenario sc;
    sc.seed = config.seed;
    sc.anonymous_attachment = config.anonymous_attachment;
    sc.devices = {{"Di"}, {"Dj"}};
    SaSpec sa_i{"SAi", true, false, ""};
    SaSpec sa_j{"SAj", true, config.responder_sa_rogue_group, config.responder_sa_policy};
    sc.sas = {sa_i, sa_j};
    if (config.attach_initiator) sc.attachments.push_back({"Di", "SAi"});
    if (config.attach_responder) sc.attachments.push_back({"Dj", "SAj"});
    RunSpec run;
    run.kind = kind;
    run.initiator = "Di";
    run.responder = "Dj";
    run.initiator_sa = "SAi";
    run.responder_sa = "SAj";
    run.data = config.data;
    run.attrs = config.attrs;
    sc.runs.push_back(run);
    sc.faults = config.faults;
    return sc;
}

}  // namespace

ScenarioReport run_rsf_gs(const PairwiseConfig& config) {
    return run_scenario(pairwise_scenario(RunSpec::Kind::rsf_gs, config));
}

ScenarioReport run_rsf_abe(const PairwiseConfig& config) {
    return run_scenario(pairwise_scenario(RunSpec::Kind::rsf_abe, config));
}

}  // namespace resiot::proto
