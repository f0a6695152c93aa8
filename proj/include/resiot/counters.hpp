#ifndef RESIOT_COUNTERS_HPP
#define RESIOT_COUNTERS_HPP

#include <cstdint>

namespace resiot {

// Group-operation tally in multiplicative vocabulary: "exp" is a scalar
// exponentiation, "mul" a single group operation.
struct OpCounters {
    uint64_t exp_g1 = 0;
    uint64_t mul_g1 = 0;
    uint64_t exp_g2 = 0;
    uint64_t mul_g2 = 0;
    uint64_t exp_gt = 0;
    uint64_t mul_gt = 0;
    uint64_t pairing = 0;

    uint64_t total_exp() const { return exp_g1 + exp_g2 + exp_gt; }
    uint64_t total_mul() const { return mul_g1 + mul_g2 + mul_gt; }

    OpCounters& operator+=(const OpCounters& o);
    bool operator==(const OpCounters&) const = default;
};

// RAII counting frame. Suite-level group operations executed while a scope is
// active are tallied into it; nested scopes roll up into their parent.
class CountScope {
public:
    CountScope();
    ~CountScope();
    CountScope(const CountScope&) = delete;
    CountScope& operator=(const CountScope&) = delete;

    const OpCounters& counts() const { return counts_; }

private:
    OpCounters counts_;
    CountScope* parent_;
};

namespace counters {
void tick_exp_g1();
void tick_mul_g1();
void tick_exp_g2();
void tick_mul_g2();
void tick_exp_gt();
void tick_mul_gt();
void tick_pairing();
}  // namespace counters

}  // namespace resiot

#endif
