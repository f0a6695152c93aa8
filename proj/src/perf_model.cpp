#include "resiot/perf_model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "resiot/suite.hpp"

namespace resiot::perf {

using nlohmann::json;

namespace {

const char* kPhases[4] = {"gs_sign", "gs_verify", "abe_encrypt", "abe_decrypt"};

void check_nonneg(double v, const char* name) {
    if (!(v >= 0) || std::isnan(v))
        throw Error(Errc::validation, std::string("timing value must be >= 0: ") + name);
}

std::string fmt_ms(double v) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(3);
    os << v;
    std::string s = os.str();
    while (s.size() > 1 && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

}  // namespace

void PrimitiveTimings::validate() const {
    check_nonneg(pairing_ms, "pairing_ms");
    check_nonneg(exp_g1_ms, "exp_g1_ms");
    check_nonneg(mul_g1_ms, "mul_g1_ms");
    check_nonneg(exp_g2_ms, "exp_g2_ms");
    check_nonneg(mul_g2_ms, "mul_g2_ms");
    check_nonneg(exp_gt_ms, "exp_gt_ms");
    check_nonneg(mul_gt_ms, "mul_gt_ms");
}

void LatencyConstants::validate() const {
    check_nonneg(device_device_ms, "device_device_ms");
    check_nonneg(device_sa_roundtrip_ms, "device_sa_roundtrip_ms");
}

OpCountFormula gs_sign_formula() {
    OpCountFormula f;
    f.name = "gs_sign";
    f.exp_g1 = 9;
    f.mul_g1 = 3;
    f.exp_gt = 3;
    f.pairing = 3;
    return f;
}

OpCountFormula gs_verify_formula() {
    OpCountFormula f;
    f.name = "gs_verify";
    f.exp_g1 = 8;
    f.mul_g1 = 4;
    f.exp_gt = 5;
    f.pairing = 4;
    return f;
}

OpCountFormula abe_encrypt_formula(uint32_t n_attrs) {
    OpCountFormula f;
    f.name = "abe_encrypt";
    f.exp_g1 = static_cast<double>(n_attrs) + 1;
    f.mul_g1 = 1;
    return f;
}

OpCountFormula abe_decrypt_formula(uint32_t n_attrs) {
    OpCountFormula f;
    f.name = "abe_decrypt";
    double logn = n_attrs <= 1 ? 0 : std::ceil(std::log2(static_cast<double>(n_attrs)));
    f.pairing = logn;
    f.mul_gt = logn;
    return f;
}

double predict_sf_time(const OpCountFormula& formula, const PrimitiveTimings& t) {
    return formula.pairing * t.pairing_ms + formula.exp_g1 * t.exp_g1_ms +
           formula.mul_g1 * t.mul_g1_ms + formula.exp_g2 * t.exp_g2_ms +
           formula.mul_g2 * t.mul_g2_ms + formula.exp_gt * t.exp_gt_ms +
           formula.mul_gt * t.mul_gt_ms;
}

double compose_sf_time(double t_sf_device_ms, const LatencyConstants& lat) {
    return t_sf_device_ms + lat.device_device_ms;
}

double compose_rsf_time(double t_rsf_device_ms, double t_sf_sa_ms, const LatencyConstants& lat) {
    return t_rsf_device_ms + t_sf_sa_ms + lat.device_device_ms + lat.device_sa_roundtrip_ms;
}

double reduction_percent(double t_sf_ms, double t_rsf_ms) {
    if (!(t_sf_ms > 0)) throw Error(Errc::validation, "reduction_percent: T_SF must be > 0");
    return 100.0 * (t_sf_ms - t_rsf_ms) / t_sf_ms;
}

// ---------------------------------------------------------------------------
// TimingTable

void TimingTable::validate() const {
    device.validate();
    sa.validate();
    check_nonneg(device_dh_ms, "device_dh_ms");
    check_nonneg(device_sym_ms, "device_sym_ms");
    latency.validate();
}

namespace {

json timings_to_json(const PrimitiveTimings& t) {
    return json{{"pairing_ms", t.pairing_ms}, {"exp_g1_ms", t.exp_g1_ms},
                {"mul_g1_ms", t.mul_g1_ms},   {"exp_g2_ms", t.exp_g2_ms},
                {"mul_g2_ms", t.mul_g2_ms},   {"exp_gt_ms", t.exp_gt_ms},
                {"mul_gt_ms", t.mul_gt_ms}};
}

PrimitiveTimings timings_from_json(const json& j) {
    PrimitiveTimings t;
    t.pairing_ms = j.at("pairing_ms").get<double>();
    t.exp_g1_ms = j.at("exp_g1_ms").get<double>();
    t.mul_g1_ms = j.at("mul_g1_ms").get<double>();
    t.exp_g2_ms = j.at("exp_g2_ms").get<double>();
    t.mul_g2_ms = j.at("mul_g2_ms").get<double>();
    t.exp_gt_ms = j.at("exp_gt_ms").get<double>();
    t.mul_gt_ms = j.at("mul_gt_ms").get<double>();
    return t;
}

std::map<std::string, double> cellmap_from_json(const json& j) {
    std::map<std::string, double> out;
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = it.value().get<double>();
    return out;
}

}  // namespace

json TimingTable::to_json() const {
    json j;
    j["version"] = version;
    j["provenance"] = provenance;
    j["device"] = timings_to_json(device);
    j["sa"] = timings_to_json(sa);
    j["device_dh_ms"] = device_dh_ms;
    j["device_sym_ms"] = device_sym_ms;
    j["latency"] = {{"device_device_ms", latency.device_device_ms},
                    {"device_sa_roundtrip_ms", latency.device_sa_roundtrip_ms}};
    if (published) {
        json p;
        p["abe_attribute_count"] = published->abe_attribute_count;
        p["t_sf_device"] = published->t_sf_device;
        p["t_sf_sa"] = published->t_sf_sa;
        p["t_sf_total"] = published->t_sf_total;
        p["t_rsf_total"] = published->t_rsf_total;
        p["reduction_pct"] = published->reduction_pct;
        j["published"] = p;
    }
    return j;
}

TimingTable TimingTable::from_json(const json& j) {
    TimingTable t;
    t.version = j.value("version", 1);
    t.provenance = j.value("provenance", "file");
    t.device = timings_from_json(j.at("device"));
    t.sa = timings_from_json(j.at("sa"));
    t.device_dh_ms = j.at("device_dh_ms").get<double>();
    t.device_sym_ms = j.at("device_sym_ms").get<double>();
    const json& lat = j.at("latency");
    t.latency.device_device_ms = lat.at("device_device_ms").get<double>();
    t.latency.device_sa_roundtrip_ms = lat.at("device_sa_roundtrip_ms").get<double>();
    if (j.contains("published")) {
        PublishedCells cells;
        const json& p = j.at("published");
        cells.abe_attribute_count = p.value("abe_attribute_count", 50u);
        cells.t_sf_device = cellmap_from_json(p.at("t_sf_device"));
        cells.t_sf_sa = cellmap_from_json(p.at("t_sf_sa"));
        cells.t_sf_total = cellmap_from_json(p.at("t_sf_total"));
        cells.t_rsf_total = cellmap_from_json(p.at("t_rsf_total"));
        cells.reduction_pct = cellmap_from_json(p.at("reduction_pct"));
        t.published = std::move(cells);
    }
    t.validate();
    return t;
}

// Generated from data/paper_timings.json at configure time.
const char* embedded_paper_timings_json();

TimingTable TimingTable::paper() {
    json j = json::parse(embedded_paper_timings_json(), nullptr, true, /*ignore_comments=*/true);
    return from_json(j);
}

TimingTable TimingTable::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io, "cannot open timings file: " + path);
    json j;
    try {
        j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::exception& e) {
        throw Error(Errc::parse, "timings file " + path + ": " + e.what());
    }
    try {
        TimingTable t = from_json(j);
        if (t.provenance.empty() || t.provenance == "file") t.provenance = path;
        return t;
    } catch (const json::exception& e) {
        throw Error(Errc::parse, "timings file " + path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Cost table

namespace {

OpCountFormula phase_formula(const std::string& phase, uint32_t n_attrs) {
    if (phase == "gs_sign") return gs_sign_formula();
    if (phase == "gs_verify") return gs_verify_formula();
    if (phase == "abe_encrypt") return abe_encrypt_formula(n_attrs);
    if (phase == "abe_decrypt") return abe_decrypt_formula(n_attrs);
    throw Error(Errc::internal, "unknown phase: " + phase);
}

std::optional<double> published_cell(const std::optional<TimingTable::PublishedCells>& cells,
                                     const std::map<std::string, double> TimingTable::PublishedCells::*field,
                                     const std::string& phase) {
    if (!cells) return std::nullopt;
    const auto& m = (*cells).*field;
    auto it = m.find(phase);
    if (it == m.end()) return std::nullopt;
    return it->second;
}

}  // namespace

CostTable build_cost_table(const TimingTable& timings) {
    timings.validate();
    CostTable table;
    table.provenance = timings.provenance;
    table.abe_attribute_count =
        timings.published ? timings.published->abe_attribute_count : 50u;

    for (const char* phase_name : kPhases) {
        std::string phase = phase_name;
        OpCountFormula formula = phase_formula(phase, table.abe_attribute_count);
        CostRow row;
        row.phase = phase;
        row.t_sf_device_pred = predict_sf_time(formula, timings.device);
        row.t_sf_sa_pred = predict_sf_time(formula, timings.sa);
        row.t_sf_device_published =
            published_cell(timings.published, &TimingTable::PublishedCells::t_sf_device, phase);
        row.t_sf_sa_published =
            published_cell(timings.published, &TimingTable::PublishedCells::t_sf_sa, phase);

        double device_used = row.t_sf_device_published.value_or(row.t_sf_device_pred);
        double sa_used = row.t_sf_sa_published.value_or(row.t_sf_sa_pred);
        row.t_sf_total = compose_sf_time(device_used, timings.latency);
        row.t_rsf_pred = compose_rsf_time(timings.device_leg_ms(), sa_used, timings.latency);
        row.t_rsf_published =
            published_cell(timings.published, &TimingTable::PublishedCells::t_rsf_total, phase);
        double rsf_used = row.t_rsf_published.value_or(row.t_rsf_pred);
        row.reduction_pct = reduction_percent(row.t_sf_total, rsf_used);

        if (row.t_sf_device_published &&
            std::abs(*row.t_sf_device_published - row.t_sf_device_pred) > 0.05) {
            row.flags.push_back("device SF cell " + fmt_ms(*row.t_sf_device_published) +
                                " ms is not reproducible from the op-count formula; "
                                "reconstruction gives " +
                                fmt_ms(row.t_sf_device_pred) + " ms");
        }
        if (row.t_sf_sa_published && std::abs(*row.t_sf_sa_published - row.t_sf_sa_pred) > 0.05) {
            row.flags.push_back("sa SF cell " + fmt_ms(*row.t_sf_sa_published) +
                                " ms differs from reconstruction " + fmt_ms(row.t_sf_sa_pred) +
                                " ms");
        }
        if (row.t_rsf_published && std::abs(*row.t_rsf_published - row.t_rsf_pred) > 0.0005) {
            row.flags.push_back("published T_RSF " + fmt_ms(*row.t_rsf_published) +
                                " ms differs from the additive composition " +
                                fmt_ms(row.t_rsf_pred) + " ms (residual " +
                                fmt_ms(*row.t_rsf_published - row.t_rsf_pred) + " ms)");
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string cost_table_text(const CostTable& table) {
    std::ostringstream os;
    os << "cost table (timing source: " << table.provenance
       << ", abe attributes: " << table.abe_attribute_count << ")\n";
    os << "  quantity          ";
    for (const auto& row : table.rows) {
        os << "  " << row.phase;
        for (size_t i = row.phase.size(); i < 12; ++i) os << ' ';
    }
    os << '\n';
    auto line = [&](const std::string& label, auto getter) {
        os << "  " << label;
        for (size_t i = label.size(); i < 18; ++i) os << ' ';
        for (const auto& row : table.rows) {
            std::string cell = getter(row);
            os << "  " << cell;
            for (size_t i = cell.size(); i < 12; ++i) os << ' ';
        }
        os << '\n';
    };
    line("t_SF_device [ms]", [](const CostRow& r) {
        return fmt_ms(r.t_sf_device_published.value_or(r.t_sf_device_pred));
    });
    line("t_SF_sa [ms]", [](const CostRow& r) {
        return fmt_ms(r.t_sf_sa_published.value_or(r.t_sf_sa_pred));
    });
    line("T_SF [ms]", [](const CostRow& r) { return fmt_ms(r.t_sf_total); });
    line("T_RSF [ms]", [](const CostRow& r) { return fmt_ms(r.t_rsf_pred); });
    line("reduction [%]", [](const CostRow& r) { return fmt_ms(r.reduction_pct); });
    for (const auto& row : table.rows) {
        for (const auto& flag : row.flags) os << "  note [" << row.phase << "]: " << flag << '\n';
    }
    return os.str();
}

// Row provenance vocabulary: "paper" when every printed cell matches the
// published table, "reconstructed" when a flagged cell is replaced by the
// formula's value, "host-measured" for benchmark-sourced tables.
std::string row_provenance(const CostTable& table, const CostRow& row) {
    if (table.provenance == "host-measured") return "host-measured";
    if (!row.flags.empty()) return "reconstructed";
    return table.provenance;
}

std::string cost_table_csv(const CostTable& table) {
    std::ostringstream os;
    os << "phase,t_sf_device_ms,t_sf_sa_ms,t_sf_total_ms,t_rsf_ms,reduction_pct,provenance,flags\n";
    for (const auto& row : table.rows) {
        os << row.phase << ',' << fmt_ms(row.t_sf_device_published.value_or(row.t_sf_device_pred))
           << ',' << fmt_ms(row.t_sf_sa_published.value_or(row.t_sf_sa_pred)) << ','
           << fmt_ms(row.t_sf_total) << ',' << fmt_ms(row.t_rsf_pred) << ','
           << fmt_ms(row.reduction_pct) << ',' << row_provenance(table, row) << ',';
        os << '"';
        for (size_t i = 0; i < row.flags.size(); ++i) {
            if (i) os << "; ";
            os << row.flags[i];
        }
        os << '"' << '\n';
    }
    return os.str();
}

json cost_table_json(const CostTable& table) {
    json rows = json::array();
    for (const auto& row : table.rows) {
        json r;
        r["phase"] = row.phase;
        r["provenance"] = row_provenance(table, row);
        r["t_sf_device_pred_ms"] = row.t_sf_device_pred;
        r["t_sf_sa_pred_ms"] = row.t_sf_sa_pred;
        if (row.t_sf_device_published) r["t_sf_device_published_ms"] = *row.t_sf_device_published;
        if (row.t_sf_sa_published) r["t_sf_sa_published_ms"] = *row.t_sf_sa_published;
        r["t_sf_total_ms"] = row.t_sf_total;
        r["t_rsf_pred_ms"] = row.t_rsf_pred;
        if (row.t_rsf_published) r["t_rsf_published_ms"] = *row.t_rsf_published;
        r["reduction_pct"] = row.reduction_pct;
        r["flags"] = row.flags;
        rows.push_back(r);
    }
    return json{{"provenance", table.provenance},
                {"abe_attribute_count", table.abe_attribute_count},
                {"rows", rows}};
}

// ---------------------------------------------------------------------------
// Queue simulation

void QueueConfig::validate() const {
    if (!(scaled_rate > 0) || scaled_rate > 1.0)
        throw Error(Errc::validation, "queue: scaled rate c_k must be in (0, 1]");
    if (!(service_ms > 0)) throw Error(Errc::validation, "queue: service time must be > 0");
    if (!(expiration_ms > 0)) throw Error(Errc::validation, "queue: expiration must be > 0");
    if (requests == 0) throw Error(Errc::validation, "queue: horizon must be > 0");
}

QueueReport simulate_queue(const QueueConfig& config) {
    config.validate();
    SimRng rng(config.seed);
    const double lambda = config.scaled_rate / config.service_ms;
    const double service = config.service_ms;
    const double t_exp = config.expiration_ms;

    QueueReport report;
    report.requests = config.requests;
    double arrival = 0;
    double server_free_at = 0;
    double wait_sum = 0;

    for (uint64_t i = 0; i < config.requests; ++i) {
        arrival += config.deterministic_arrivals ? 1.0 / lambda : rng.next_exponential(lambda);
        double start = std::max(arrival, server_free_at);
        double deadline = arrival + t_exp;
        if (start > deadline) {
            ++report.abandoned_in_queue;  // expired while waiting, never served
            continue;
        }
        server_free_at = start + service;
        if (config.deadline_scope == QueueConfig::DeadlineScope::total &&
            server_free_at - arrival > t_exp) {
            ++report.expired_in_service;  // occupied the server but missed
            continue;
        }
        ++report.successes;
        wait_sum += start - arrival;
    }
    report.success_rate =
        static_cast<double>(report.successes) / static_cast<double>(report.requests);
    if (report.successes > 0) {
        report.mean_wait_ms = wait_sum / static_cast<double>(report.successes);
        report.mean_total_ms = report.mean_wait_ms + service;
        report.scaled_total = report.mean_total_ms / service;
    }
    return report;
}

double md1_mean_wait_ms(double scaled_rate, double service_ms) {
    return scaled_rate * service_ms / (2.0 * (1.0 - scaled_rate));
}

std::vector<SweepPoint> queue_sweep(const std::vector<double>& scaled_rates,
                                    const std::vector<double>& expirations_ms, double service_ms,
                                    uint64_t requests, uint64_t seed) {
    std::vector<SweepPoint> out;
    uint64_t point_index = 0;
    for (double c : scaled_rates) {
        for (double t_exp : expirations_ms) {
            QueueConfig cfg;
            cfg.scaled_rate = c;
            cfg.service_ms = service_ms;
            cfg.expiration_ms = t_exp;
            cfg.requests = requests;
            cfg.seed = seed + point_index++;
            SweepPoint point;
            point.scaled_rate = c;
            point.expiration_ms = t_exp;
            point.report = simulate_queue(cfg);
            out.push_back(point);
        }
    }
    return out;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
    std::ostringstream os;
    os << "c_k,t_exp_ms,success_rate,mean_wait_ms,mean_total_ms\n";
    os.setf(std::ios::fixed);
    for (const auto& p : points) {
        os.precision(4);
        os << p.scaled_rate << ',';
        os.precision(3);
        os << p.expiration_ms << ',';
        os.precision(6);
        os << p.report.success_rate << ',';
        os.precision(4);
        os << p.report.mean_wait_ms << ',' << p.report.mean_total_ms << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Host microbenchmark

namespace {

double median_ms(std::vector<double>& samples) {
    std::sort(samples.begin(), samples.end());
    return samples[samples.size() / 2];
}

template <typename F>
double bench_one(int repetitions, F&& op) {
    using clock = std::chrono::steady_clock;
    std::vector<double> samples;
    samples.reserve(repetitions);
    op();  // warm up
    for (int i = 0; i < repetitions; ++i) {
        auto begin = clock::now();
        op();
        auto end = clock::now();
        samples.push_back(std::chrono::duration<double, std::milli>(end - begin).count());
    }
    return median_ms(samples);
}

}  // namespace

TimingTable microbench(const MicrobenchConfig& config) {
    const auto& suite = BilinearSuite::standard();
    Drbg rng(config.seed, "microbench");
    Int a = suite.nonzero_scalar(rng);
    Int b = suite.nonzero_scalar(rng);
    G1 p = suite.g1().mul(a);
    G1 p2 = suite.g1().mul(b);
    G2 q = suite.g2().mul(a);
    G2 q2 = suite.g2().mul(b);
    Gt t = bn::pairing(p, q);
    Gt t2 = bn::pairing(p2, q);

    PrimitiveTimings host;
    host.pairing_ms = bench_one(config.repetitions, [&] { (void)bn::pairing(p, q2); });
    host.exp_g1_ms = bench_one(config.repetitions, [&] { (void)p.mul(b); });
    host.mul_g1_ms = bench_one(config.repetitions, [&] { (void)p.add(p2); });
    host.exp_g2_ms = bench_one(config.repetitions, [&] { (void)q.mul(b); });
    host.mul_g2_ms = bench_one(config.repetitions, [&] { (void)q.add(q2); });
    host.exp_gt_ms = bench_one(config.repetitions, [&] { (void)t.pow(b); });
    host.mul_gt_ms = bench_one(config.repetitions, [&] { (void)(t * t2); });

    TimingTable table;
    table.provenance = "host-measured";
    table.device = host;
    table.sa = host;

    DhKeypair mine = suite.dh_generate(rng);
    DhKeypair theirs = suite.dh_generate(rng);
    table.device_dh_ms =
        bench_one(config.repetitions, [&] { (void)suite.dh_agree(mine, theirs.pub); });
    SessionKey key = suite.dh_agree(mine, theirs.pub);
    Bytes block(20, 0xa5);
    table.device_sym_ms =
        bench_one(config.repetitions, [&] { (void)suite.sym_encrypt(key, block, 7); });
    // Network constants are not host-measurable; reuse the published ones so
    // compositions stay meaningful.
    table.latency = TimingTable::paper().latency;
    return table;
}

}  // namespace resiot::perf
