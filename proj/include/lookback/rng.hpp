#pragma once

#include <array>
#include <cstdint>

namespace lookback {

// Philox4x32-10 block function (Salmon et al., SC'11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;
PhiloxCounter philox4x32(PhiloxCounter counter, PhiloxKey key);

std::uint64_t splitmix64(std::uint64_t x);

// Identifies one independent random stream. Streams are derived by hashing
// tags into a parent id, so a stream depends only on (seed, purpose, indices)
// and never on which worker consumes it.
struct StreamId {
    std::uint64_t key = 0;
    std::uint64_t lane = 0;

    StreamId child(std::uint64_t tag) const;
    template <typename... Tags>
    StreamId child(std::uint64_t tag, Tags... rest) const {
        return child(tag).child(static_cast<std::uint64_t>(rest)...);
    }
};

enum class StreamPurpose : std::uint64_t {
    outer_path = 1,
    hawkes_strip = 2,
    inner_path = 3,
    expectation = 4,
    bootstrap = 5,
    first_passage = 6,
    pricing = 7,
    dynkin = 8,
};

StreamId root_stream(std::uint64_t seed, StreamPurpose purpose);

// Counter-mode generator over one StreamId. Cheap to construct; every draw
// is a pure function of (id, draw index).
class RandomStream {
public:
    explicit RandomStream(StreamId id);

    std::uint64_t next_u64();
    // Uniform on the open interval (0, 1).
    double uniform();
    double normal();
    // Exponential with unit rate.
    double exponential();

private:
    void refill();

    StreamId id_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace lookback
