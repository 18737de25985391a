#include "lookback/rng.hpp"

#include <cmath>
#include <numbers>

namespace lookback {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

PhiloxCounter philox4x32(PhiloxCounter c, PhiloxKey k) {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, c[0], hi0, lo0);
        mulhilo(kMul1, c[2], hi1, lo1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += kWeyl0;
        k[1] += kWeyl1;
    }
    return c;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

StreamId StreamId::child(std::uint64_t tag) const {
    const std::uint64_t h = splitmix64(tag ^ 0x6A09E667F3BCC909ull);
    return {splitmix64(key ^ h), splitmix64(lane + h + 0x3C6EF372FE94F82Bull)};
}

StreamId root_stream(std::uint64_t seed, StreamPurpose purpose) {
    const StreamId base{splitmix64(seed), splitmix64(~seed)};
    return base.child(static_cast<std::uint64_t>(purpose));
}

RandomStream::RandomStream(StreamId id) : id_(id) {}

void RandomStream::refill() {
    const PhiloxCounter ctr{static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                            static_cast<std::uint32_t>(id_.lane), static_cast<std::uint32_t>(id_.lane >> 32)};
    const PhiloxKey key{static_cast<std::uint32_t>(id_.key), static_cast<std::uint32_t>(id_.key >> 32)};
    buffer_ = philox4x32(ctr, key);
    ++block_;
    used_ = 0;
}

std::uint64_t RandomStream::next_u64() {
    if (used_ > 2) refill();
    const std::uint64_t lo = buffer_[used_];
    const std::uint64_t hi = buffer_[used_ + 1];
    used_ += 2;
    return (hi << 32) | lo;
}

double RandomStream::uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double angle = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(angle);
    has_spare_ = true;
    return r * std::cos(angle);
}

double RandomStream::exponential() {
    return -std::log(uniform());
}

}  // namespace lookback
