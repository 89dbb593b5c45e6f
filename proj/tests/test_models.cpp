#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "lsw/lsw.hpp"

using namespace lsw;

namespace {

double mean(const TimeSeries& x) { return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size()); }

double variance(const TimeSeries& x) {
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size());
}

}  // namespace

TEST(Simulate, WhiteNoiseMoments) {
    const auto x = simulate(preset("S1"), 512, Seed{17});
    const double tol = 4.0 / std::sqrt(512.0);
    EXPECT_NEAR(mean(x), 0.0, tol);
    EXPECT_NEAR(variance(x), 1.0, tol);
}

TEST(Simulate, DeterministicGivenSeed) {
    for (const auto& name : preset_names()) {
        const auto a = simulate(preset(name), 256, replication_seed(5, 3));
        const auto b = simulate(preset(name), 256, replication_seed(5, 3));
        EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin())) << name;
        const auto c = simulate(preset(name), 256, replication_seed(5, 4));
        EXPECT_FALSE(std::equal(a.begin(), a.end(), c.begin())) << name;
    }
}

TEST(Simulate, RejectsNonDyadicLength) {
    EXPECT_THROW(simulate(preset("S1"), 500, Seed{1}), InputError);
}

TEST(Arma, S7RootsOnCircleOfRadius098) {
    const Arma s7 = std::get<Arma>(preset("S7"));
    const auto roots = s7.characteristic_roots();
    ASSERT_EQ(roots.size(), 2u);
    for (const auto& r : roots) {
        EXPECT_NEAR(std::abs(r), 0.98, 1e-6);
        EXPECT_NEAR(std::abs(std::arg(r)), std::numbers::pi / 4, 1e-4);
    }
}

TEST(Arma, NonStationaryRejected) {
    EXPECT_THROW(Arma({1.0}, {}), ConstructionError);
    EXPECT_THROW(Arma({0.5, 0.6}, {}), ConstructionError);
    EXPECT_NO_THROW(Arma({0.5, 0.3}, {}));
}

TEST(Tvar1, LinearProfileAtT200) {
    const Tvar1 m = std::get<Tvar1>(preset("P1"));
    EXPECT_NEAR(m.alpha(1, 512), 0.9, 1e-15);
    EXPECT_NEAR(m.alpha(512, 512), -0.9, 1e-15);
    EXPECT_NEAR(m.alpha(200, 512), 0.199, 5e-4);
}

TEST(Innovations, Variances) {
    EXPECT_EQ(InnovationDist::gaussian().variance(), 1.0);
    EXPECT_EQ(InnovationDist::double_exponential().variance(), 2.0);
    EXPECT_EQ(InnovationDist::student_t(4).variance(), 2.0);
    EXPECT_THROW(InnovationDist::student_t(0), InputError);
}

TEST(Presets, KnownNamesOnly) {
    EXPECT_EQ(preset_names().size(), 29u);
    EXPECT_THROW(preset("S8"), InputError);
    EXPECT_THROW(preset("Q1"), InputError);
    EXPECT_THROW(preset("SHT0"), InputError);
}

TEST(Presets, SpectraFollowFormulas) {
    const auto p2 = spectra::p2();
    const auto p3 = spectra::p3();
    const auto p4 = spectra::p4();
    for (double z : {0.01, 0.2, 0.5, 0.77, 0.99}) {
        const double q = 0.25 - (z - 0.5) * (z - 0.5);
        EXPECT_DOUBLE_EQ(p2(1, z), q);
        EXPECT_EQ(p2(2, z), 0.0);
        double zs = z + 0.5;
        if (zs >= 1.0) zs -= 1.0;
        EXPECT_NEAR(p3(2, z), 0.25 - (zs - 0.5) * (zs - 0.5), 1e-15);
        double zm = z - 0.25;
        if (zm < 0.0) zm += 1.0;
        EXPECT_NEAR(p4(3, z), std::exp(-4.0 * (zm - 0.5) * (zm - 0.5)), 1e-15);
        EXPECT_EQ(p4(2, z), 0.0);
        for (int j = 1; j <= 6; ++j) {
            EXPECT_GE(p2(j, z), 0.0);
            EXPECT_GE(p3(j, z), 0.0);
            EXPECT_GE(p4(j, z), 0.0);
        }
    }
}

TEST(SynthesizeLsw, ZeroSpectrumGivesZeroSeries) {
    const auto x = synthesize_lsw(SpectrumFn::zero(), 64, Seed{1});
    for (double v : x) EXPECT_EQ(v, 0.0);
}

TEST(SynthesizeLsw, FinestLevelLagOneAutocovariance) {
    // S_1 = 1 only: c(0) = 1 and c(1) = Psi_1(1) = -1/2
    const auto spec = SpectrumFn::constant({1.0});
    double c0 = 0.0, c1 = 0.0;
    const int reps = 500;
    for (int r = 0; r < reps; ++r) {
        const auto x = synthesize_lsw(spec, 64, replication_seed(77, static_cast<std::uint64_t>(r)));
        for (std::size_t t = 0; t < 64; ++t) {
            c0 += x[t] * x[t];
            c1 += x[t] * x[(t + 1) % 64];
        }
    }
    c0 /= 64.0 * reps;
    c1 /= 64.0 * reps;
    EXPECT_NEAR(c0, 1.0, 0.03);
    EXPECT_NEAR(c1, -0.5, 0.03);
}

TEST(SynthesizeLsw, P2MidpointVariance) {
    double s2 = 0.0;
    const int reps = 500;
    for (int r = 0; r < reps; ++r) {
        const auto x = simulate(preset("P2"), 512, replication_seed(91, static_cast<std::uint64_t>(r)));
        s2 += x[255] * x[255];
    }
    // var = S_1(1/2) Psi_1(0) = 1/4; sd of the estimate is about 0.25 sqrt(2/500)
    EXPECT_NEAR(s2 / reps, 0.25, 0.05);
}
