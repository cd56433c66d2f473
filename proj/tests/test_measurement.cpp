// Copyright 2026 The lofsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <random>

#include "lofsim/lofsim.hpp"

using namespace lofsim;

namespace {

PolarizationDensityMatrix bell(BellState b) { return PolarizationDensityMatrix::from_pure(bell_vector(b)); }

PolarizationDensityMatrix random_state(std::mt19937_64 &rng) {
    std::normal_distribution<double> g;
    Matrix4c a;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) a(i, j) = Complex(g(rng), g(rng));
    Matrix4c rho = a * a.adjoint();
    rho /= rho.trace();
    return PolarizationDensityMatrix(rho);
}

std::vector<CurvePoint> sinusoid(double offset, double amp, double phase_deg, double step = 5.0) {
    std::vector<CurvePoint> c;
    for (double x = 0.0; x <= 180.0 + 1e-9; x += step)
        c.push_back({x, offset + amp * std::cos(2.0 * (x - phase_deg) * std::numbers::pi / 180.0)});
    return c;
}

}  // namespace

TEST(DensityMatrix, Validity) {
    EXPECT_TRUE(bell(BellState::PsiMinus).is_valid());
    Matrix4c bad = Matrix4c::Identity();
    EXPECT_FALSE(PolarizationDensityMatrix(bad).is_valid());
}

TEST(Concurrence, BellProductAndWerner) {
    for (auto b : {BellState::PhiPlus, BellState::PhiMinus, BellState::PsiPlus, BellState::PsiMinus})
        EXPECT_NEAR(concurrence(bell(b)), 1.0, 1e-10);
    Vector4c hh = Vector4c::Zero();
    hh(0) = 1.0;
    EXPECT_NEAR(concurrence(PolarizationDensityMatrix::from_pure(hh)), 0.0, 1e-10);
    for (double p : {0.2, 0.5, 0.8}) {
        Matrix4c w = p * bell(BellState::PsiMinus).matrix() + (1.0 - p) / 4.0 * Matrix4c::Identity();
        EXPECT_NEAR(concurrence(PolarizationDensityMatrix(w)), std::max(0.0, (3.0 * p - 1.0) / 2.0), 1e-9) << p;
    }
}

TEST(Correlation, PhiPlusMalusLaw) {
    const auto rho = bell(BellState::PhiPlus);
    for (double a : {0.0, 10.0, 45.0, 80.0})
        for (double b : {0.0, 22.5, 67.5}) {
            EXPECT_NEAR(correlation_E(rho, a, b), std::cos(2.0 * (a - b) * std::numbers::pi / 180.0), 1e-12);
            const auto p = analyzer_probabilities(rho, a, b);
            EXPECT_NEAR(p[0] + p[1] + p[2] + p[3], 1.0, 1e-12);
        }
}

TEST(Correlation, PhiPlusRotationalInvariance) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ang(-180.0, 180.0);
    const auto rho = bell(BellState::PhiPlus);
    for (int i = 0; i < 200; ++i) {
        const double a = ang(rng), b = ang(rng), t = ang(rng);
        EXPECT_NEAR(correlation_E(rho, a + t, b + t), correlation_E(rho, a, b), 1e-12);
    }
}

TEST(Chsh, IdealSettingsReachTsirelson) {
    auto r = chsh_S(bell(BellState::PhiPlus), 0.0, 45.0, 22.5, 67.5);
    EXPECT_NEAR(r.S, 2.0 * std::numbers::sqrt2, 1e-12);
    EXPECT_TRUE(r.violates());
}

TEST(Chsh, TsirelsonBoundOnRandomStates) {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> ang(0.0, 180.0);
    for (int i = 0; i < 500; ++i) {
        const auto rho = random_state(rng);
        ASSERT_TRUE(rho.is_valid());
        auto r = chsh_S(rho, ang(rng), ang(rng), ang(rng), ang(rng));
        EXPECT_LE(std::abs(r.S), 2.0 * std::numbers::sqrt2 + 1e-12);
    }
}

TEST(Fidelity, BellOrthogonality) {
    EXPECT_NEAR(fidelity(bell(BellState::PhiPlus), bell_vector(BellState::PhiPlus)), 1.0, 1e-15);
    EXPECT_NEAR(fidelity(bell(BellState::PhiPlus), bell_vector(BellState::PsiPlus)), 0.0, 1e-15);
}

TEST(Sampling, DeterministicAndExactTotal) {
    std::vector<double> p{0.1, 0.2, 0.3, 0.4};
    auto a = sample_counts(std::span<const double>(p), 100000, 42);
    auto b = sample_counts(std::span<const double>(p), 100000, 42);
    EXPECT_EQ(a, b);
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        total += a[i];
        EXPECT_NEAR(double(a[i]) / 100000.0, p[i], 0.01);
    }
    EXPECT_EQ(total, 100000u);
    auto c = sample_counts(std::span<const double>(p), 100000, 43);
    EXPECT_NE(a, c);
    auto pois = sample_counts(std::span<const double>(p), 100000, 42, SamplingMode::Poisson);
    EXPECT_NEAR(double(pois[3]) / 100000.0, 0.4, 0.01);
    std::vector<double> bad{0.5, 0.6};
    EXPECT_THROW(sample_counts(std::span<const double>(bad), 10, 1), Error);
}

TEST(Sampling, CorrelationFromCounts) {
    auto [e, s] = correlation_from_counts({400, 100, 100, 400});
    EXPECT_NEAR(e, 0.6, 1e-15);
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 0.05);
    EXPECT_THROW(correlation_from_counts({0, 0, 0, 0}), Error);
}

TEST(Fit, KnownPeriodSinusoid) {
    auto f = visibility(sinusoid(0.25, 0.2, 30.0), 180.0);
    EXPECT_NEAR(f.visibility, 0.8, 1e-12);
    EXPECT_NEAR(f.offset, 0.25, 1e-12);
    auto short_curve = sinusoid(0.25, 0.2, 0.0, 30.0);
    EXPECT_THROW(visibility(std::span(short_curve).first(5), 180.0), Error);
    std::vector<CurvePoint> narrow;
    for (int i = 0; i < 10; ++i) narrow.push_back({double(i), 1.0});
    EXPECT_THROW(visibility(narrow, 180.0), Error);
    EXPECT_THROW(visibility(sinusoid(0.0, 0.0, 0.0), 180.0), Error);
}

TEST(Fit, JointFitSharesOffsetAndAmplitude) {
    std::vector<std::vector<CurvePoint>> curves{sinusoid(0.25, 0.2225, 0.0), sinusoid(0.25, 0.2225, 45.0)};
    std::vector<double> phases;
    auto f = joint_visibility(curves, 180.0, &phases);
    EXPECT_NEAR(f.visibility, 0.89, 1e-12);
    ASSERT_EQ(phases.size(), 2u);
    EXPECT_NEAR(std::remainder(phases[1] - phases[0], 2.0 * std::numbers::pi), std::numbers::pi / 2.0, 1e-9);
}

TEST(Herald, ImpossiblePatternThrows) {
    auto reg = make_registry({"a", "b"}, 1);
    auto st = prepare_product_state(reg, std::vector<PhotonSpec>{{"a", 1.0, 0.0}});
    std::vector<Detector> det{{"Da", "a", std::nullopt}, {"Db", "b", std::nullopt}};
    EXPECT_THROW(herald(st, {"x", det, {0, 1}}), Error);
    EXPECT_THROW(herald(st, {"neg", det, {-1, 1}}), Error);
    EXPECT_NEAR(herald(st, {"ok", det, {1, 0}}).probability, 1.0, 1e-15);
    double total = 0.0;
    for (const auto &o : outcome_distribution(st, det)) total += o.probability;
    EXPECT_NEAR(total, 1.0, 1e-15);
}
