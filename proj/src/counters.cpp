#include "resiot/counters.hpp"

namespace resiot {

namespace {
thread_local CountScope* g_active = nullptr;
thread_local OpCounters* g_counts = nullptr;
}  // namespace

OpCounters& OpCounters::operator+=(const OpCounters& o) {
    exp_g1 += o.exp_g1;
    mul_g1 += o.mul_g1;
    exp_g2 += o.exp_g2;
    mul_g2 += o.mul_g2;
    exp_gt += o.exp_gt;
    mul_gt += o.mul_gt;
    pairing += o.pairing;
    return *this;
}

CountScope::CountScope() : parent_(g_active) {
    g_active = this;
    g_counts = &counts_;
}

CountScope::~CountScope() {
    g_active = parent_;
    g_counts = parent_ ? &parent_->counts_ : nullptr;
    if (parent_) parent_->counts_ += counts_;
}

namespace counters {

void tick_exp_g1() {
    if (g_counts) ++g_counts->exp_g1;
}
void tick_mul_g1() {
    if (g_counts) ++g_counts->mul_g1;
}
void tick_exp_g2() {
    if (g_counts) ++g_counts->exp_g2;
}
void tick_mul_g2() {
    if (g_counts) ++g_counts->mul_g2;
}
void tick_exp_gt() {
    if (g_counts) ++g_counts->exp_gt;
}
void tick_mul_gt() {
    if (g_counts) ++g_counts->mul_gt;
}
void tick_pairing() {
    if (g_counts) ++g_counts->pairing;
}

}  // namespace counters

}  // namespace resiot
