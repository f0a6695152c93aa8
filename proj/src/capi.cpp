#include "resiot.h"

#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "resiot/abe.hpp"
#include "resiot/group_sig.hpp"
#include "resiot/scenario_io.hpp"
#include "resiot/suite.hpp"

namespace {

using namespace resiot;
namespace fs = std::filesystem;

thread_local std::string g_last_error;

resiot_status status_of(Errc code) {
    switch (code) {
        case Errc::ok: return RESIOT_OK;
        case Errc::usage: return RESIOT_ERR_USAGE;
        case Errc::io: return RESIOT_ERR_IO;
        case Errc::parse: return RESIOT_ERR_PARSE;
        case Errc::validation: return RESIOT_ERR_VALIDATION;
        case Errc::crypto: return RESIOT_ERR_CRYPTO;
        case Errc::expectation: return RESIOT_ERR_EXPECTATION;
        case Errc::internal: return RESIOT_ERR_INTERNAL;
    }
    return RESIOT_ERR_INTERNAL;
}

template <typename F>
resiot_status guarded(F&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        g_last_error = e.what();
        return status_of(e.code());
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return RESIOT_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return RESIOT_ERR_INTERNAL;
    }
}

resiot_status fail(resiot_status status, std::string message) {
    g_last_error = std::move(message);
    return status;
}

fs::path ensure_out_dir(const char* out_dir) {
    if (!out_dir || !*out_dir) throw Error(Errc::usage, "output directory is required");
    fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(Errc::io, "cannot create output directory: " + dir.string());
    return dir;
}

perf::TimingTable timings_or(const char* spec, const char* fallback) {
    return io::resolve_timings(spec && *spec ? spec : fallback);
}

resiot_status copy_out(const Bytes& data, uint8_t* buf, size_t* len) {
    if (!len) return fail(RESIOT_ERR_USAGE, "length pointer is required");
    if (!buf || *len < data.size()) {
        *len = data.size();
        return fail(RESIOT_ERR_BUFFER, "output buffer too small");
    }
    std::copy(data.begin(), data.end(), buf);
    *len = data.size();
    return RESIOT_OK;
}

// --- queue sweep grid parsing -------------------------------------------------

std::vector<double> parse_number_list(const std::string& text, double service_ms,
                                      const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        if (token.empty()) throw Error(Errc::usage, "grid: empty entry in " + what);
        bool scaled = token.back() == 'x';
        std::string num = scaled ? token.substr(0, token.size() - 1) : token;
        size_t used = 0;
        double v;
        try {
            v = std::stod(num, &used);
        } catch (const std::exception&) {
            throw Error(Errc::usage, "grid: bad number '" + token + "' in " + what);
        }
        if (used != num.size()) throw Error(Errc::usage, "grid: bad number '" + token + "'");
        out.push_back(scaled ? v * service_ms : v);
    }
    if (out.empty()) throw Error(Errc::usage, "grid: " + what + " is empty");
    return out;
}

std::vector<double> parse_ck_spec(const std::string& text) {
    // either "a,b,c" or "start:end:step"
    if (text.find(':') != std::string::npos) {
        double start, end, step;
        if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &start, &end, &step) != 3 || step <= 0)
            throw Error(Errc::usage, "grid: ck range must be start:end:step");
        std::vector<double> out;
        for (double v = start; v <= end + 1e-9; v += step) out.push_back(v);
        return out;
    }
    std::vector<double> out;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        try {
            out.push_back(std::stod(token));
        } catch (const std::exception&) {
            throw Error(Errc::usage, "grid: bad ck value '" + token + "'");
        }
    }
    if (out.empty()) throw Error(Errc::usage, "grid: ck list is empty");
    return out;
}

struct GridSpec {
    std::vector<double> ck;
    std::vector<double> texp_ms;
    double service_ms;
};

GridSpec parse_grid(const char* spec, double default_service_ms) {
    std::string text = spec && *spec ? spec : "ck=0.1:1.0:0.1;texp=2x,5x,10x";
    GridSpec grid;
    grid.service_ms = default_service_ms;
    std::map<std::string, std::string> parts;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ';')) {
        auto eq = part.find('=');
        if (eq == std::string::npos) throw Error(Errc::usage, "grid: expected key=value parts");
        parts[part.substr(0, eq)] = part.substr(eq + 1);
    }
    if (parts.count("service")) {
        try {
            grid.service_ms = std::stod(parts["service"]);
        } catch (const std::exception&) {
            throw Error(Errc::usage, "grid: bad service value");
        }
    }
    if (!parts.count("ck")) throw Error(Errc::usage, "grid: missing ck=");
    if (!parts.count("texp")) throw Error(Errc::usage, "grid: missing texp=");
    grid.ck = parse_ck_spec(parts["ck"]);
    grid.texp_ms = parse_number_list(parts["texp"], grid.service_ms, "texp");
    for (double c : grid.ck)
        if (c <= 0 || c > 1.0)
            throw Error(Errc::usage, "grid: ck values must lie in (0, 1]");
    return grid;
}

}  // namespace

// --- handles -----------------------------------------------------------------

struct resiot_group {
    gs::GroupPublicKey gpk;
    gs::GroupIssuerKey issuer;
    std::map<uint32_t, gs::MemberKey> members;
};

struct resiot_abe {
    abe::AbePublicKey pk;
    abe::AbeMasterKey msk;
    std::map<uint32_t, abe::AbeDecryptionKey> keys;
    uint32_t next_key_id = 1;
};

extern "C" {

const char* resiot_version(void) { return "1.0.0"; }

const char* resiot_last_error(void) { return g_last_error.c_str(); }

resiot_status resiot_keygen_group(uint32_t member_count, uint64_t seed, const char* out_dir) {
    return guarded([&]() -> resiot_status {
        if (member_count == 0) return fail(RESIOT_ERR_USAGE, "member count must be >= 1");
        fs::path dir = ensure_out_dir(out_dir);
        const auto& suite = BilinearSuite::standard();
        auto [gpk, issuer] = gs::setup(suite, seed);
        std::vector<gs::MemberKey> members;
        for (uint32_t i = 1; i <= member_count; ++i)
            members.push_back(gs::enroll(suite, issuer, i));
        auto write = [&](const fs::path& name, const Bytes& data) {
            io::write_text_file((dir / name).string(),
                                std::string_view(reinterpret_cast<const char*>(data.data()),
                                                 data.size()));
        };
        write("group_public.key", gpk.encode());
        write("group_issuer.key", issuer.encode());
        char name[32];
        for (const auto& member : members) {
            std::snprintf(name, sizeof(name), "member_%03u.key", member.index);
            write(name, member.encode());
        }
        return RESIOT_OK;
    });
}

resiot_status resiot_keygen_abe(uint32_t universe_size, const char* const* policies,
                                size_t policy_count, uint64_t seed, const char* out_dir) {
    return guarded([&]() -> resiot_status {
        fs::path dir = ensure_out_dir(out_dir);
        const auto& suite = BilinearSuite::standard();
        auto [pk, msk] = abe::setup(suite, universe_size, seed);
        auto write = [&](const fs::path& name, const Bytes& data) {
            io::write_text_file((dir / name).string(),
                                std::string_view(reinterpret_cast<const char*>(data.data()),
                                                 data.size()));
        };
        write("abe_public.key", pk.encode());
        write("abe_master.key", msk.encode());
        Drbg rng(seed, "abe-keygen-files");
        char name[32];
        for (size_t i = 0; i < policy_count; ++i) {
            if (!policies || !policies[i]) return fail(RESIOT_ERR_USAGE, "null policy string");
            abe::AccessPolicy policy = abe::parse_policy(policies[i]);
            policy.validate(universe_size);
            abe::AbeDecryptionKey key = abe::keygen(suite, msk, policy, rng.next_u64());
            std::snprintf(name, sizeof(name), "abe_key_%02zu.key", i + 1);
            write(name, key.encode());
        }
        return RESIOT_OK;
    });
}

resiot_status resiot_run_scenario(const char* scenario_path, const char* timings_spec,
                                  int has_seed_override, uint64_t seed_override,
                                  const char* out_dir, resiot_run_summary* summary) {
    return guarded([&]() -> resiot_status {
        if (!scenario_path) return fail(RESIOT_ERR_USAGE, "scenario path is required");
        fs::path dir = ensure_out_dir(out_dir);
        std::optional<perf::TimingTable> override;
        if (timings_spec && *timings_spec) override = io::resolve_timings(timings_spec);
        proto::Scenario scenario = io::load_scenario_file(scenario_path, override);
        if (has_seed_override) scenario.seed = seed_override;
        proto::ScenarioReport report = proto::run_scenario(scenario);

        nlohmann::json j = io::report_to_json(report, scenario.seed);
        io::write_text_file((dir / "report.json").string(), j.dump(2) + "\n");
        io::write_text_file((dir / "runs.csv").string(), io::report_runs_csv(report));

        if (summary) {
            summary->runs = static_cast<uint32_t>(report.runs.size());
            uint32_t matched = 0;
            for (const auto& run : report.runs) matched += run.expectation_met ? 1 : 0;
            summary->matched = matched;
            summary->mismatched = summary->runs - matched;
        }
        if (!report.all_expectations_met)
            return fail(RESIOT_ERR_EXPECTATION, "one or more runs missed the expected outcome");
        return RESIOT_OK;
    });
}

resiot_status resiot_cost_table(const char* timings_spec, const char* out_dir) {
    return guarded([&]() -> resiot_status {
        fs::path dir = ensure_out_dir(out_dir);
        perf::TimingTable timings = timings_or(timings_spec, "paper");
        perf::CostTable table = perf::build_cost_table(timings);
        io::write_text_file((dir / "cost_table.txt").string(), perf::cost_table_text(table));
        io::write_text_file((dir / "cost_table.csv").string(), perf::cost_table_csv(table));
        io::write_text_file((dir / "cost_table.json").string(),
                            perf::cost_table_json(table).dump(2) + "\n");
        return RESIOT_OK;
    });
}

resiot_status resiot_queue_sweep(const char* grid_spec, const char* timings_spec,
                                 uint64_t requests, uint64_t seed, const char* out_dir) {
    return guarded([&]() -> resiot_status {
        fs::path dir = ensure_out_dir(out_dir);
        perf::TimingTable timings = timings_or(timings_spec, "paper");
        double service = perf::predict_sf_time(perf::gs_sign_formula(), timings.sa);
        GridSpec grid = parse_grid(grid_spec, service);
        if (requests == 0) requests = 100000;
        auto points = perf::queue_sweep(grid.ck, grid.texp_ms, grid.service_ms, requests, seed);
        io::write_text_file((dir / "queue_sweep.csv").string(), perf::sweep_csv(points));
        return RESIOT_OK;
    });
}

resiot_status resiot_microbench(int repetitions, uint64_t seed, const char* out_dir) {
    return guarded([&]() -> resiot_status {
        fs::path dir = ensure_out_dir(out_dir);
        perf::MicrobenchConfig cfg;
        if (repetitions > 0) cfg.repetitions = repetitions;
        cfg.seed = seed;
        perf::TimingTable table = perf::microbench(cfg);
        io::write_text_file((dir / "host_timings.json").string(), table.to_json().dump(2) + "\n");
        return RESIOT_OK;
    });
}

resiot_status resiot_group_new(uint64_t seed, uint32_t member_count, resiot_group** out) {
    return guarded([&]() -> resiot_status {
        if (!out) return fail(RESIOT_ERR_USAGE, "output pointer is required");
        if (member_count == 0) return fail(RESIOT_ERR_USAGE, "member count must be >= 1");
        const auto& suite = BilinearSuite::standard();
        auto handle = std::make_unique<resiot_group>();
        auto [gpk, issuer] = gs::setup(suite, seed);
        handle->gpk = gpk;
        handle->issuer = std::move(issuer);
        for (uint32_t i = 1; i <= member_count; ++i)
            handle->members.emplace(i, gs::enroll(suite, handle->issuer, i));
        *out = handle.release();
        return RESIOT_OK;
    });
}

void resiot_group_free(resiot_group* group) { delete group; }

resiot_status resiot_group_sign(const resiot_group* group, uint32_t member_index,
                                const uint8_t* message, size_t message_len, uint64_t seed,
                                uint8_t* sig, size_t* sig_len) {
    return guarded([&]() -> resiot_status {
        if (!group) return fail(RESIOT_ERR_USAGE, "null group handle");
        auto it = group->members.find(member_index);
        if (it == group->members.end())
            return fail(RESIOT_ERR_VALIDATION, "member index not enrolled");
        std::span<const uint8_t> msg(message, message_len);
        gs::GroupSignature signature =
            gs::sign(BilinearSuite::standard(), group->gpk, it->second, msg, seed);
        return copy_out(signature.encode(), sig, sig_len);
    });
}

resiot_status resiot_group_verify(const resiot_group* group, const uint8_t* message,
                                  size_t message_len, const uint8_t* sig, size_t sig_len) {
    return guarded([&]() -> resiot_status {
        if (!group) return fail(RESIOT_ERR_USAGE, "null group handle");
        gs::VerifyStatus status =
            gs::verify_encoded(BilinearSuite::standard(), group->gpk,
                               std::span<const uint8_t>(message, message_len),
                               std::span<const uint8_t>(sig, sig_len));
        if (status == gs::VerifyStatus::ok) return RESIOT_OK;
        return fail(RESIOT_ERR_CRYPTO, status == gs::VerifyStatus::malformed
                                           ? "malformed signature encoding"
                                           : "signature verification failed");
    });
}

resiot_status resiot_group_open(const resiot_group* group, const uint8_t* message,
                                size_t message_len, const uint8_t* sig, size_t sig_len,
                                uint32_t* member_index) {
    return guarded([&]() -> resiot_status {
        if (!group || !member_index) return fail(RESIOT_ERR_USAGE, "null argument");
        auto signature = gs::GroupSignature::decode(std::span<const uint8_t>(sig, sig_len));
        if (!signature) return fail(RESIOT_ERR_PARSE, "malformed signature encoding");
        auto opened = gs::open(BilinearSuite::standard(), group->issuer,
                               std::span<const uint8_t>(message, message_len), *signature);
        if (!opened) return fail(RESIOT_ERR_CRYPTO, "signature does not open");
        *member_index = *opened;
        return RESIOT_OK;
    });
}

resiot_status resiot_abe_new(uint64_t seed, uint32_t universe_size, resiot_abe** out) {
    return guarded([&]() -> resiot_status {
        if (!out) return fail(RESIOT_ERR_USAGE, "output pointer is required");
        auto handle = std::make_unique<resiot_abe>();
        auto [pk, msk] = abe::setup(BilinearSuite::standard(), universe_size, seed);
        handle->pk = std::move(pk);
        handle->msk = std::move(msk);
        *out = handle.release();
        return RESIOT_OK;
    });
}

void resiot_abe_free(resiot_abe* abe) { delete abe; }

resiot_status resiot_abe_keygen(resiot_abe* handle, const char* policy, uint64_t seed,
                                uint32_t* key_id) {
    return guarded([&]() -> resiot_status {
        if (!handle || !policy || !key_id) return fail(RESIOT_ERR_USAGE, "null argument");
        abe::AccessPolicy parsed = abe::parse_policy(policy);
        abe::AbeDecryptionKey key = abe::keygen(BilinearSuite::standard(), handle->msk, parsed, seed);
        uint32_t id = handle->next_key_id++;
        handle->keys.emplace(id, std::move(key));
        *key_id = id;
        return RESIOT_OK;
    });
}

resiot_status resiot_abe_encrypt(const resiot_abe* handle, const uint32_t* attrs,
                                 size_t attr_count, const uint8_t* payload, size_t payload_len,
                                 uint64_t seed, uint8_t* ct, size_t* ct_len) {
    return guarded([&]() -> resiot_status {
        if (!handle) return fail(RESIOT_ERR_USAGE, "null abe handle");
        std::vector<abe::AttrId> attr_vec(attrs, attrs + attr_count);
        abe::AbeCiphertext ciphertext =
            abe::encrypt(BilinearSuite::standard(), handle->pk, std::move(attr_vec),
                         std::span<const uint8_t>(payload, payload_len), seed);
        return copy_out(ciphertext.encode(), ct, ct_len);
    });
}

resiot_status resiot_abe_decrypt(const resiot_abe* handle, uint32_t key_id, const uint8_t* ct,
                                 size_t ct_len, uint8_t* payload, size_t* payload_len) {
    return guarded([&]() -> resiot_status {
        if (!handle) return fail(RESIOT_ERR_USAGE, "null abe handle");
        auto it = handle->keys.find(key_id);
        if (it == handle->keys.end()) return fail(RESIOT_ERR_VALIDATION, "unknown key id");
        auto ciphertext = abe::AbeCiphertext::decode(std::span<const uint8_t>(ct, ct_len));
        if (!ciphertext) return fail(RESIOT_ERR_PARSE, "malformed ciphertext encoding");
        abe::DecryptResult res =
            abe::decrypt(BilinearSuite::standard(), it->second, *ciphertext);
        if (res.status == abe::DecryptStatus::policy_unsatisfied)
            return fail(RESIOT_ERR_POLICY, "ciphertext attributes do not satisfy the key policy");
        if (res.status != abe::DecryptStatus::ok)
            return fail(RESIOT_ERR_CRYPTO, "ciphertext integrity check failed");
        return copy_out(res.payload, payload, payload_len);
    });
}

}  // extern "C"
