#include "lookback/parallel.hpp"
#include "lookback/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

using namespace lookback;

TEST_CASE("Philox4x32-10 known-answer vectors") {
    // Random123 kat_vectors.
    const PhiloxCounter zero = philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(zero == PhiloxCounter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
    const PhiloxCounter ones =
        philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    CHECK(ones == PhiloxCounter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
    const PhiloxCounter pi = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                        {0xa4093822u, 0x299f31d0u});
    CHECK(pi == PhiloxCounter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("streams are reproducible and distinct") {
    const StreamId root = root_stream(42, StreamPurpose::outer_path);
    RandomStream a(root.child(3)), b(root.child(3)), c(root.child(4));
    for (int i = 0; i < 100; ++i) {
        const auto va = a.next_u64();
        CHECK(va == b.next_u64());
        CHECK(va != c.next_u64());
    }
    CHECK(root.child(1, 2).key == root.child(1).child(2).key);
    std::set<std::uint64_t> keys;
    for (std::uint64_t i = 0; i < 1000; ++i) keys.insert(root.child(i).key);
    CHECK(keys.size() == 1000);
    CHECK(root_stream(42, StreamPurpose::outer_path).key != root_stream(42, StreamPurpose::inner_path).key);
}

TEST_CASE("uniform, normal and exponential moments") {
    RandomStream rng(root_stream(9, StreamPurpose::pricing));
    const int n = 200000;
    double su = 0, sn = 0, sn2 = 0, se = 0;
    for (int i = 0; i < n; ++i) {
        const double u = rng.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        su += u;
        const double z = rng.normal();
        sn += z;
        sn2 += z * z;
        se += rng.exponential();
    }
    CHECK(std::abs(su / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
    CHECK(std::abs(sn / n) < 4 / std::sqrt(n));
    CHECK(std::abs(sn2 / n - 1.0) < 4 * std::sqrt(2.0 / n));
    CHECK(std::abs(se / n - 1.0) < 4 / std::sqrt(n));
}

TEST_CASE("parallel_for fills slots independently of worker count") {
    auto run = [](unsigned workers) {
        std::vector<std::uint64_t> out(257);
        parallel_for(out.size(), workers, [&](std::size_t i) {
            RandomStream rng(root_stream(1, StreamPurpose::outer_path).child(i));
            out[i] = rng.next_u64();
        });
        return out;
    };
    CHECK(run(1) == run(8));
}

TEST_CASE("parallel_for rethrows the lowest failing index") {
    try {
        parallel_for(64, 4, [](std::size_t i) {
            if (i == 10 || i == 40) throw std::runtime_error(std::to_string(i));
        });
        FAIL("no throw");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "10");
    }
}
