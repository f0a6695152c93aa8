#include <doctest.h>

#include <cmath>
#include <limits>

#include "resiot/perf_model.hpp"

using namespace resiot;
using namespace resiot::perf;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }
}  // namespace

TEST_CASE("SF cost formulas reproduce the published cells from the primitive timings") {
    TimingTable t = TimingTable::paper();
    CHECK(near(predict_sf_time(gs_sign_formula(), t.device), 2409.3, 0.05));
    CHECK(near(predict_sf_time(gs_sign_formula(), t.sa), 208.5, 0.05));
    CHECK(near(predict_sf_time(gs_verify_formula(), t.sa), 224.7, 0.05));
    CHECK(near(predict_sf_time(abe_encrypt_formula(50), t.device), 6380.9, 0.05));
    CHECK(near(predict_sf_time(abe_encrypt_formula(50), t.sa), 706.4, 0.05));
    CHECK(near(predict_sf_time(abe_decrypt_formula(50), t.device), 1863.0, 0.05));
    CHECK(near(predict_sf_time(abe_decrypt_formula(50), t.sa), 95.4, 0.05));
    // the device verify cell is not reproducible; the reconstruction is fixed
    CHECK(near(predict_sf_time(gs_verify_formula(), t.device), 2762.4, 0.05));
    CHECK_FALSE(near(predict_sf_time(gs_verify_formula(), t.device), 1786.8, 1.0));
}

TEST_CASE("processing-time composition") {
    TimingTable t = TimingTable::paper();
    CHECK(near(compose_sf_time(2409.3, t.latency), 2465.3, 1e-9));
    CHECK(near(compose_sf_time(1786.8, t.latency), 1842.8, 1e-9));
    CHECK(near(compose_sf_time(6380.9, t.latency), 6436.9, 1e-9));
    CHECK(near(compose_sf_time(1863.0, t.latency), 1919.0, 1e-9));
    LatencyConstants zero{};
    CHECK(compose_sf_time(100.0, zero) == 100.0);

    CHECK(near(compose_rsf_time(t.device_leg_ms(), 208.5, t.latency), 509.837, 1e-9));
    CHECK(near(compose_rsf_time(t.device_leg_ms(), 224.7, t.latency), 526.037, 1e-9));
    CHECK(near(compose_rsf_time(t.device_leg_ms(), 95.4, t.latency), 396.737, 1e-9));
    // the additive formula and the published ABE-encrypt row disagree by 60 ms
    CHECK(near(compose_rsf_time(t.device_leg_ms(), 706.4, t.latency), 1007.737, 1e-9));
}

TEST_CASE("reduction percentages") {
    CHECK(near(reduction_percent(2465.3, 509.837), 79.32, 0.01));
    CHECK(near(reduction_percent(1842.8, 526.037), 71.46, 0.01));
    CHECK(near(reduction_percent(1919.0, 396.737), 79.33, 0.01));
    CHECK(near(reduction_percent(6436.9, 1067.737), 83.42, 0.01));
    CHECK(reduction_percent(100.0, 100.0) == 0.0);
    CHECK_THROWS_AS((void)reduction_percent(0.0, 1.0), Error);
}

TEST_CASE("cost table carries the discrepancy flags") {
    CostTable table = build_cost_table(TimingTable::paper());
    REQUIRE(table.rows.size() == 4);
    const CostRow* verify_row = nullptr;
    const CostRow* abe_enc_row = nullptr;
    for (const auto& row : table.rows) {
        if (row.phase == "gs_verify") verify_row = &row;
        if (row.phase == "abe_encrypt") abe_enc_row = &row;
    }
    REQUIRE(verify_row);
    REQUIRE(abe_enc_row);
    CHECK(verify_row->flags.size() == 1);  // device cell irreproducible
    CHECK(near(verify_row->t_sf_device_pred, 2762.4, 0.05));
    CHECK(abe_enc_row->flags.size() == 1);  // 60 ms residual
    CHECK(near(abe_enc_row->t_rsf_pred, 1007.737, 1e-6));
    CHECK(near(*abe_enc_row->t_rsf_published, 1067.737, 1e-6));
    // reductions quoted from the published composition
    double expected[] = {79.32, 71.46, 83.42, 79.33};
    for (size_t i = 0; i < 4; ++i) CHECK(near(table.rows[i].reduction_pct, expected[i], 0.01));

    std::string text = cost_table_text(table);
    CHECK(text.find("2409.3") != std::string::npos);
    CHECK(text.find("not reproducible") != std::string::npos);
    CHECK(text.find("residual 60 ms") != std::string::npos);
    std::string csv = cost_table_csv(table);
    CHECK(csv.find("gs_sign,2409.3,208.5,2465.3,509.837,79.319,paper,") != std::string::npos);
    CHECK(csv.find("gs_verify,1786.8,224.7,1842.8,526.037,71.454,reconstructed,") !=
          std::string::npos);
}

TEST_CASE("timing tables validate and round-trip through json") {
    TimingTable t = TimingTable::paper();
    TimingTable back = TimingTable::from_json(t.to_json());
    CHECK(back.device.pairing_ms == t.device.pairing_ms);
    CHECK(back.latency.device_sa_roundtrip_ms == t.latency.device_sa_roundtrip_ms);
    REQUIRE(back.published.has_value());
    CHECK(back.published->t_rsf_total.at("abe_encrypt") == 1067.737);

    TimingTable bad = t;
    bad.sa.pairing_ms = -1;
    CHECK_THROWS_AS(bad.validate(), Error);

    auto j = t.to_json();
    j["device"].erase("pairing_ms");  // missing primitive
    CHECK_THROWS(TimingTable::from_json(j));
}

TEST_CASE("queue: infinite deadline serves everyone") {
    QueueConfig cfg;
    cfg.scaled_rate = 0.9;
    cfg.service_ms = 208.5;
    cfg.expiration_ms = kInf;
    cfg.requests = 20000;
    cfg.seed = 1;
    QueueReport rep = simulate_queue(cfg);
    CHECK(rep.success_rate == 1.0);
    CHECK(rep.abandoned_in_queue == 0);
}

TEST_CASE("queue: near-empty queue has near-zero waiting") {
    QueueConfig cfg;
    cfg.scaled_rate = 0.01;
    cfg.service_ms = 208.5;
    cfg.expiration_ms = kInf;
    cfg.requests = 20000;
    cfg.seed = 2;
    QueueReport rep = simulate_queue(cfg);
    CHECK(rep.success_rate == 1.0);
    CHECK(rep.mean_wait_ms < 2.0);
    CHECK(near(rep.mean_total_ms, 208.5 + rep.mean_wait_ms, 1e-9));
}

TEST_CASE("queue matches the M/D/1 Pollaczek-Khinchine mean wait at c=0.5") {
    QueueConfig cfg;
    cfg.scaled_rate = 0.5;
    cfg.service_ms = 208.5;
    cfg.expiration_ms = kInf;
    cfg.requests = 100000;
    cfg.seed = 3;
    QueueReport rep = simulate_queue(cfg);
    double analytic = md1_mean_wait_ms(0.5, 208.5);
    CHECK(near(analytic, 104.25, 1e-9));
    CHECK(std::abs(rep.mean_wait_ms - analytic) / analytic < 0.05);
}

TEST_CASE("queue success-rate claims on the acceptance grid") {
    for (double mult : {2.0, 5.0, 10.0}) {
        QueueConfig cfg;
        cfg.scaled_rate = 1.0;
        cfg.service_ms = 208.5;
        cfg.expiration_ms = mult * 208.5;
        cfg.requests = 100000;
        cfg.seed = 4;
        CHECK(simulate_queue(cfg).success_rate > 0.80);
    }
    for (double c : {0.1, 0.3, 0.5, 0.7}) {
        for (double mult : {2.0, 5.0, 10.0}) {
            QueueConfig cfg;
            cfg.scaled_rate = c;
            cfg.service_ms = 208.5;
            cfg.expiration_ms = mult * 208.5;
            cfg.requests = 100000;
            cfg.seed = 5;
            CHECK(simulate_queue(cfg).success_rate > 0.90);
        }
    }
}

TEST_CASE("queue success rate is monotone in load and deadline") {
    std::vector<double> cks;
    for (int i = 1; i <= 10; ++i) cks.push_back(0.1 * i);
    std::vector<double> texp = {2 * 208.5, 5 * 208.5, 10 * 208.5};
    auto points = queue_sweep(cks, texp, 208.5, 100000, 6);
    auto rate = [&](size_t ck_idx, size_t te_idx) {
        return points[ck_idx * texp.size() + te_idx].report.success_rate;
    };
    for (size_t te = 0; te < texp.size(); ++te)
        for (size_t ck = 1; ck < cks.size(); ++ck)
            CHECK(rate(ck, te) <= rate(ck - 1, te) + 1e-3);
    for (size_t ck = 0; ck < cks.size(); ++ck)
        for (size_t te = 1; te < texp.size(); ++te)
            CHECK(rate(ck, te) + 1e-3 >= rate(ck, te - 1));
}

TEST_CASE("queue runs are deterministic per seed and stable across seeds") {
    QueueConfig cfg;
    cfg.scaled_rate = 0.8;
    cfg.service_ms = 208.5;
    cfg.expiration_ms = 5 * 208.5;
    cfg.requests = 100000;
    cfg.seed = 7;
    QueueReport a = simulate_queue(cfg);
    QueueReport b = simulate_queue(cfg);
    CHECK(a.success_rate == b.success_rate);
    CHECK(a.mean_wait_ms == b.mean_wait_ms);
    CHECK(a.successes == b.successes);

    cfg.seed = 8;
    QueueReport c = simulate_queue(cfg);
    CHECK(std::abs(a.success_rate - c.success_rate) < 0.01);  // +-1% at 1e5 requests
}

TEST_CASE("queue deadline scopes differ as designed") {
    QueueConfig cfg;
    cfg.scaled_rate = 1.0;
    cfg.service_ms = 208.5;
    cfg.expiration_ms = 2 * 208.5;
    cfg.requests = 50000;
    cfg.seed = 9;
    QueueReport begin_scope = simulate_queue(cfg);
    cfg.deadline_scope = QueueConfig::DeadlineScope::total;
    QueueReport total_scope = simulate_queue(cfg);
    CHECK(begin_scope.expired_in_service == 0);
    CHECK(total_scope.expired_in_service > 0);
    CHECK(total_scope.success_rate < begin_scope.success_rate);
}

TEST_CASE("queue config validation") {
    QueueConfig cfg;
    cfg.scaled_rate = 0.5;
    cfg.service_ms = 208.5;
    cfg.expiration_ms = 100;
    cfg.requests = 10;
    CHECK_NOTHROW(simulate_queue(cfg));
    cfg.scaled_rate = 1.5;
    CHECK_THROWS_AS((void)simulate_queue(cfg), Error);
    cfg.scaled_rate = 0;
    CHECK_THROWS_AS((void)simulate_queue(cfg), Error);
    cfg.scaled_rate = 0.5;
    cfg.service_ms = 0;
    CHECK_THROWS_AS((void)simulate_queue(cfg), Error);
    cfg.service_ms = 208.5;
    cfg.expiration_ms = 0;
    CHECK_THROWS_AS((void)simulate_queue(cfg), Error);
}

TEST_CASE("deterministic arrivals at low load never wait") {
    QueueConfig cfg;
    cfg.scaled_rate = 0.5;
    cfg.service_ms = 100;
    cfg.expiration_ms = kInf;
    cfg.requests = 1000;
    cfg.seed = 1;
    cfg.deterministic_arrivals = true;
    QueueReport rep = simulate_queue(cfg);
    CHECK(rep.mean_wait_ms == 0.0);
    CHECK(rep.scaled_total == 1.0);  // c_2 = t_RSF^SA / t_SF^SA
}

TEST_CASE("sweep csv has the contracted columns") {
    auto points = queue_sweep({0.5}, {417.0}, 208.5, 1000, 11);
    std::string csv = sweep_csv(points);
    CHECK(csv.rfind("c_k,t_exp_ms,success_rate,mean_wait_ms,mean_total_ms\n", 0) == 0);
    CHECK(csv.find("0.5000,417.000,") != std::string::npos);
}

TEST_CASE("host microbench produces positive, sane timings") {
    MicrobenchConfig cfg;
    cfg.repetitions = 3;
    TimingTable t = microbench(cfg);
    CHECK(t.provenance == "host-measured");
    CHECK(t.device.pairing_ms > 0);
    CHECK(t.device.exp_g1_ms > 0);
    CHECK(t.device.mul_g1_ms > 0);
    CHECK(t.device.pairing_ms > t.device.mul_g1_ms);  // pairing dominates a group op
    CHECK(t.device_dh_ms > 0);
    CHECK(t.device_sym_ms >= 0);
    CHECK_NOTHROW(t.validate());
    // repeat within a loose stability envelope (host noise)
    TimingTable u = microbench(cfg);
    CHECK(u.device.pairing_ms > t.device.pairing_ms / 5);
    CHECK(u.device.pairing_ms < t.device.pairing_ms * 5);
}
