#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

#include "lsw/rng.hpp"

using namespace lsw;

TEST(Philox, KnownAnswer) {
    // Random123 known-answer vector for philox4x32-10 with all-ones input.
    const auto out = detail::philox4x32_10({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
    EXPECT_EQ(out[0], 0x408f276du);
    EXPECT_EQ(out[1], 0x41c83b0eu);
    EXPECT_EQ(out[2], 0xa20bc7c6u);
    EXPECT_EQ(out[3], 0x6d5451fdu);
    const auto zero = detail::philox4x32_10({0, 0, 0, 0}, {0, 0});
    EXPECT_EQ(zero[0], 0x6627e8d5u);
    EXPECT_EQ(zero[1], 0xe169c58du);
    EXPECT_EQ(zero[2], 0xbc57ac4cu);
    EXPECT_EQ(zero[3], 0x9b00dbd8u);
}

TEST(RandomStream, SameSeedSameDraws) {
    RandomStream a(Seed{42, 7});
    RandomStream b(Seed{42, 7});
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(RandomStream, StreamsDiffer) {
    std::set<std::uint64_t> first;
    for (std::uint64_t s = 0; s < 64; ++s) first.insert(RandomStream(replication_seed(1, s)).next_u64());
    EXPECT_EQ(first.size(), 64u);
}

TEST(RandomStream, UniformInOpenUnitInterval) {
    RandomStream r(Seed{3});
    for (int i = 0; i < 100000; ++i) {
        const double u = r.uniform();
        ASSERT_GT(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

namespace {

struct Mv {
    double mean = 0.0, var = 0.0;
};

template <class F>
Mv moments(F&& draw, int n) {
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double v = draw();
        s += v;
        s2 += v * v;
    }
    const double m = s / n;
    return {m, s2 / n - m * m};
}

}  // namespace

TEST(RandomStream, InnovationMoments) {
    const int n = 200000;
    RandomStream r(Seed{9});
    const auto g = moments([&] { return r.normal(); }, n);
    EXPECT_NEAR(g.mean, 0.0, 0.015);
    EXPECT_NEAR(g.var, 1.0, 0.02);
    const auto l = moments([&] { return r.laplace(); }, n);
    EXPECT_NEAR(l.mean, 0.0, 0.02);
    EXPECT_NEAR(l.var, 2.0, 0.05);
    const auto t = moments([&] { return r.student_t(4); }, n);
    EXPECT_NEAR(t.mean, 0.0, 0.02);
    EXPECT_NEAR(t.var, 2.0, 0.25);  // fourth moment is infinite, so the spread is wide
}
