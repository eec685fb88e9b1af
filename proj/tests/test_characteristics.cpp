#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "lpvm/characteristics.hpp"

using namespace lpvm;

namespace {
constexpr double kTwoPi = 2 * std::numbers::pi;

ForceSampler sampled_force(const PhaseGrid& g, int nt, double dt, auto fn) {
    SpaceTimeArray F(nt + 1, g.nx());
    for (int s = 0; s <= nt; ++s)
        for (int j = 0; j < g.nx(); ++j) F(s, j) = fn(s * dt, g.x(j));
    return ForceSampler(g, dt, F);
}
}  // namespace

TEST(ForceSampler, InterpolatesLinearlyInTime) {
    const PhaseGrid g(kTwoPi, 32, 4.0, 9);
    const auto F = sampled_force(g, 4, 0.25, [](double t, double x) { return t + std::sin(x); });
    EXPECT_NEAR(F(0.375, g.x(3)), 0.375 + std::sin(g.x(3)), 1e-14);
    EXPECT_NEAR(F.at_half_index(3, g.x(5)), 0.375 + std::sin(g.x(5)), 1e-14);
    EXPECT_THROW(ForceSampler(g, 0.1, SpaceTimeArray(3, 31)), std::invalid_argument);
}

TEST(AssembleForce, AddsPonderomotiveTerm) {
    const PhaseGrid g(kTwoPi, 16, 4.0, 9);
    FieldHistory h = FieldHistory::zeros(g, 2, 0.1);
    for (int s = 0; s <= 2; ++s)
        for (int j = 0; j < 16; ++j) {
            h.E(s, j) = 0.5;
            h.A(s, j) = 2.0;
            h.dxA(s, j) = -1.0;
        }
    const auto F = assemble_force(h);
    EXPECT_DOUBLE_EQ(F.samples()(1, 3), -1.5);
    h.E = SpaceTimeArray(2, 16);
    EXPECT_THROW(assemble_force(h), std::invalid_argument);
}

TEST(TraceBack, FreeStreamingAndConstantForce) {
    const double dt = 0.05;
    const AnalyticForce zero([](double, double) { return 0.0; }, dt);
    const Foot f = trace_back(20, 1.0, 0.5, zero, Model::NR, kTwoPi);
    EXPECT_NEAR(f.x, 1.0 - 0.5 * 1.0, 1e-14);
    EXPECT_DOUBLE_EQ(f.p, 0.5);
    const AnalyticForce c([](double, double) { return 0.3; }, dt);
    const Foot g = trace_back(20, 1.0, 0.5, c, Model::NR, kTwoPi);
    // dP/ds = -F => P(0) = p + F t; X(0) = x - int_0^t P = x - (p t + F t^2 / 2)
    EXPECT_NEAR(g.p, 0.5 + 0.3, 1e-13);
    EXPECT_NEAR(g.x, 1.0 - (0.5 + 0.15), 1e-13);
}

TEST(TraceBack, ShiftPeriodicity) {
    const PhaseGrid g(kTwoPi, 32, 6.0, 33);
    const auto F = sampled_force(g, 16, 1.0 / 16, [](double t, double x) { return 0.4 * std::sin(x + t); });
    for (double x : {0.3, 2.0, 5.9}) {
        const Foot a = trace_back(16, x, 0.7, F, Model::QR, kTwoPi);
        const Foot b = trace_back(16, x + kTwoPi, 0.7, F, Model::QR, kTwoPi);
        EXPECT_NEAR(b.x - a.x, kTwoPi, 1e-12);
        EXPECT_NEAR(b.p, a.p, 1e-12);
    }
}

TEST(TraceBack, QrLightCone) {
    const double dt = 1.0 / 32;
    const AnalyticForce F([](double t, double x) { return 3.0 * std::cos(2 * x - t); }, dt);
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> U(-5, 5);
    for (int k = 0; k < 50; ++k) {
        const Foot f = trace_back(32, 1.0, U(rng), F, Model::QR, kTwoPi);
        EXPECT_LE(std::abs(f.x - 1.0), 1.0 + 1e-10);
    }
}

TEST(TraceBack, ForwardInverse) {
    const double dt = 1.0 / 64;
    const AnalyticForce F([](double t, double x) { return 0.5 * std::sin(x) * (1 + t); }, dt);
    for (Model m : {Model::NR, Model::QR}) {
        const Foot f = trace_back(64, 2.0, -0.8, F, m, kTwoPi);
        const auto [x, p] = trace_forward(64, f.x, f.p, F, m);
        EXPECT_NEAR(x, 2.0, 1e-9);
        EXPECT_NEAR(p, -0.8, 1e-9);
    }
}

TEST(InterpolateSlice, ZeroBeyondCutoffAndExactAtNodes) {
    const PhaseGrid g(kTwoPi, 16, 4.0, 17);
    const DistSlice f = DistSlice::sample(g, [](double x, double p) { return (2 + std::cos(x)) * std::exp(-p * p); });
    EXPECT_EQ(interpolate_slice(f, 1.0, 4.01), 0.0);
    EXPECT_EQ(interpolate_slice(f, 1.0, -5.0), 0.0);
    EXPECT_NEAR(interpolate_slice(f, g.x(3), g.p(7)), f(3, 7), 1e-14);
}

TEST(Transport, SliceZeroIsIdentity) {
    const PhaseGrid g(kTwoPi, 16, 4.0, 17);
    const DistSlice f0 = DistSlice::sample(g, [](double x, double p) { return (2 + std::cos(x)) * std::exp(-p * p); });
    const auto F = sampled_force(g, 4, 0.1, [](double, double x) { return std::sin(x); });
    const auto r = transport_f0(f0, F, 0, Model::NR);
    EXPECT_EQ(r.f.values()[5], f0.values()[5]);
}

TEST(Transport, FreeStreamingFourthOrder) {
    auto err = [](int nx, int np) {
        const PhaseGrid g(kTwoPi, nx, 6.0, np);
        const DistSlice f0 = DistSlice::sample(g, [](double x, double p) { return (1.5 + std::cos(x)) * std::exp(-p * p); });
        const double dt = 1.0 / 16;
        const auto F = sampled_force(g, 16, dt, [](double, double) { return 0.0; });
        const auto r = transport_f0(f0, F, 16, Model::QR);
        double e = 0;
        for (int j = 0; j < nx; ++j)
            for (int i = 0; i < np; ++i) {
                const double p = g.p(i);
                const double exact = (1.5 + std::cos(g.x(j) - vhat(p, Model::QR))) * std::exp(-p * p);
                e = std::max(e, std::abs(r.f(j, i) - exact));
            }
        return e;
    };
    const double a = err(32, 65), b = err(64, 129);
    EXPECT_LT(a, 2e-3);
    EXPECT_GT(a / b, 10.0);
}

TEST(Transport, NonnegativeBoundedAndReflectionSymmetry) {
    const PhaseGrid g(kTwoPi, 32, 6.0, 49);
    const DistSlice f0 = DistSlice::sample(g, [](double x, double p) {
        return std::abs(p) < 1.0 ? (1 + 0.5 * std::cos(x)) : 0.0;  // rough: cubic overshoots
    });
    const auto zero = sampled_force(g, 8, 0.1, [](double, double) { return 0.0; });
    const auto r = transport_f0(f0, zero, 8, Model::NR);
    for (double v : r.f.values()) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, f0.max_value());
    }
    const DistSlice even = DistSlice::sample(g, [](double x, double p) { return (2 + std::cos(x)) * std::exp(-p * p); });
    const auto re = transport_f0(even, zero, 8, Model::QR);
    for (int j = 0; j < 32; ++j)
        for (int i = 0; i < 49; ++i) EXPECT_NEAR(re.f(j, i), re.f((32 - j) % 32, 48 - i), 1e-12);
}

TEST(Transport, FlagsEscapeThroughCutoff) {
    const PhaseGrid g(kTwoPi, 16, 3.0, 25);
    const DistSlice f0 = DistSlice::sample(g, [](double, double p) { return std::exp(-0.5 * (p - 2.5) * (p - 2.5)); });
    const auto push = sampled_force(g, 10, 0.1, [](double, double) { return -2.0; });
    const auto r = transport_f0(f0, push, 10, Model::NR);
    EXPECT_TRUE(r.support_flag);
    EXPECT_GT(r.escaped_fraction, 1e-6);
}

TEST(Divergence, IdenticalForcesAndSaturatingCase) {
    const PhaseGrid g(kTwoPi, 32, 6.0, 33);
    const double dt = 1.0 / 32;
    const auto F0 = sampled_force(g, 32, dt, [](double, double) { return 0.0; });
    const auto Fc = sampled_force(g, 32, dt, [](double, double) { return 0.7; });
    const std::vector<DivergenceSample> s = {{1.0, 0.5, 0.2}, {0.5, 3.0, -1.0}};
    const auto same = divergence_check(Fc, Fc, s, Model::NR);
    EXPECT_EQ(same.max_ratio, 0.0);
    const auto r = divergence_check(F0, Fc, s, Model::NR);
    EXPECT_NEAR(r.dp[0], 0.7, 1e-12);
    EXPECT_NEAR(r.dp[0] / r.bound_p[0], 1.0, 1e-12);
    EXPECT_LE(r.max_ratio, 1.0 + 1e-12);
}
