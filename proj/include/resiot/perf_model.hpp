#ifndef RESIOT_PERF_MODEL_HPP
#define RESIOT_PERF_MODEL_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "resiot/bytes.hpp"

// Analytical performance layer: per-primitive timing tables, operation-count
// formulas for the offloaded security functions, end-to-end processing-time
// composition, and the FCFS queue-with-deadline simulator for agent load.
namespace resiot::perf {

struct PrimitiveTimings {
    double pairing_ms = 0;
    double exp_g1_ms = 0;
    double mul_g1_ms = 0;
    double exp_g2_ms = 0;
    double mul_g2_ms = 0;
    double exp_gt_ms = 0;
    double mul_gt_ms = 0;

    void validate() const;  // all entries >= 0
};

// Linear combination of primitive counts for one SF phase.
struct OpCountFormula {
    std::string name;
    double pairing = 0;
    double exp_g1 = 0;
    double mul_g1 = 0;
    double exp_g2 = 0;
    double mul_g2 = 0;
    double exp_gt = 0;
    double mul_gt = 0;
};

OpCountFormula gs_sign_formula();
// The published verify count carries a 5-exp term that only reproduces the
// agent-side cell when priced in GT; that reading is used here.
OpCountFormula gs_verify_formula();
OpCountFormula abe_encrypt_formula(uint32_t n_attrs);
OpCountFormula abe_decrypt_formula(uint32_t n_attrs);  // ceil(log2 Na)*(pairing + mul_gt)

double predict_sf_time(const OpCountFormula& formula, const PrimitiveTimings& timings);

struct LatencyConstants {
    double device_device_ms = 0;        // one-way hop between devices
    double device_sa_roundtrip_ms = 0;  // request+response budget per offload

    void validate() const;
};

// T_SF = t_SF^D + t_COM^D
double compose_sf_time(double t_sf_device_ms, const LatencyConstants& lat);
// T_RSF = t_RSF^D + t_SF^SA + t_COM^D + t_COM^(D-SA), attachment excluded
double compose_rsf_time(double t_rsf_device_ms, double t_sf_sa_ms, const LatencyConstants& lat);
double reduction_percent(double t_sf_ms, double t_rsf_ms);

// A full timing configuration: both platform rows, the device-side RSF
// constants, latencies, and (optionally) published result cells used for
// cross-checks and discrepancy flags.
struct TimingTable {
    int version = 1;
    std::string provenance;  // "paper" | "host-measured" | file path
    PrimitiveTimings device;
    PrimitiveTimings sa;
    double device_dh_ms = 0;
    double device_sym_ms = 0;
    LatencyConstants latency;

    struct PublishedCells {
        uint32_t abe_attribute_count = 50;
        std::map<std::string, double> t_sf_device;
        std::map<std::string, double> t_sf_sa;
        std::map<std::string, double> t_sf_total;
        std::map<std::string, double> t_rsf_total;
        std::map<std::string, double> reduction_pct;
    };
    std::optional<PublishedCells> published;

    double device_leg_ms() const { return device_dh_ms + device_sym_ms; }

    void validate() const;
    nlohmann::json to_json() const;
    static TimingTable from_json(const nlohmann::json& j);
    static TimingTable paper();  // built-in published constants
    static TimingTable load_file(const std::string& path);
};

// One phase row of the cost-table report.
struct CostRow {
    std::string phase;  // gs_sign | gs_verify | abe_encrypt | abe_decrypt
    double t_sf_device_pred = 0;
    double t_sf_sa_pred = 0;
    std::optional<double> t_sf_device_published;
    std::optional<double> t_sf_sa_published;
    double t_sf_total = 0;    // composed from published cells when present
    double t_rsf_pred = 0;    // composed from the additive formula
    std::optional<double> t_rsf_published;
    double reduction_pct = 0;  // from published T_RSF when present, else pred
    std::vector<std::string> flags;
};

struct CostTable {
    std::string provenance;
    uint32_t abe_attribute_count = 50;
    std::vector<CostRow> rows;
};

CostTable build_cost_table(const TimingTable& timings);
std::string cost_table_text(const CostTable& table);
std::string cost_table_csv(const CostTable& table);
nlohmann::json cost_table_json(const CostTable& table);

// --- FCFS queue with per-request deadline -----------------------------------

struct QueueConfig {
    // What t_exp bounds: the queueing delay (a request still unserved at its
    // deadline abandons; once service begins it completes and counts), or the
    // total sojourn (late-started requests still occupy the server and fail).
    // begin_service is the scope under which the reference success-rate
    // claims hold on the {2,5,10}*t_SF grid.
    enum class DeadlineScope { begin_service, total };

    double scaled_rate = 0;      // c_k = lambda * service, in (0, 1]
    double service_ms = 0;       // deterministic t_SF^SA
    double expiration_ms = 0;    // t_exp; infinity allowed
    uint64_t requests = 100000;  // horizon
    uint64_t seed = 0;
    bool deterministic_arrivals = false;  // default Poisson
    DeadlineScope deadline_scope = DeadlineScope::begin_service;

    void validate() const;
};

struct QueueReport {
    uint64_t requests = 0;
    uint64_t successes = 0;
    uint64_t abandoned_in_queue = 0;   // deadline passed while waiting
    uint64_t expired_in_service = 0;   // started too late to finish in time
    double success_rate = 0;
    double mean_wait_ms = 0;   // t_Q^SA over successful requests
    double mean_total_ms = 0;  // t_RSF^SA = t_Q^SA + t_SF^SA over successes
    double scaled_total = 0;   // c_2 = mean_total / service
};

// Single server, FCFS. A queued request abandons when its deadline passes;
// a started request runs to completion and succeeds iff wait+service <= t_exp.
QueueReport simulate_queue(const QueueConfig& config);

// M/D/1 Pollaczek-Khinchine mean wait, the analytic oracle for the simulator.
double md1_mean_wait_ms(double scaled_rate, double service_ms);

struct SweepPoint {
    double scaled_rate = 0;
    double expiration_ms = 0;
    QueueReport report;
};

std::vector<SweepPoint> queue_sweep(const std::vector<double>& scaled_rates,
                                    const std::vector<double>& expirations_ms, double service_ms,
                                    uint64_t requests, uint64_t seed);
// Columns: c_k,t_exp_ms,success_rate,mean_wait_ms,mean_total_ms
std::string sweep_csv(const std::vector<SweepPoint>& points);

// --- host microbenchmark -----------------------------------------------------

struct MicrobenchConfig {
    int repetitions = 9;  // median over this many samples per primitive
    uint64_t seed = 1;
};

// Measures the pairing-group primitives plus the device-side DH/AEAD constants
// on this host. Informative only; never a substitute for the published table.
TimingTable microbench(const MicrobenchConfig& config);

}  // namespace resiot::perf

#endif
