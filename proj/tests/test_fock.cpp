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
#include "oracles.hpp"

using namespace lofsim;

namespace {

RegistryPtr four_labels() { return make_registry({"m0", "m1", "m2", "m3"}, 1); }

ModeTransform full(const RegistryPtr &reg, const Eigen::MatrixXcd &u) { return {reg->modes(), u}; }

Occupation occ_of(const ModeRegistry &reg, std::initializer_list<std::pair<ModeId, int>> photons) {
    Occupation o(reg.size(), 0);
    for (const auto &[m, n] : photons) o[reg.index(m)] = static_cast<std::uint8_t>(n);
    return o;
}

}  // namespace

TEST(Registry, OrdersLexicographically) {
    auto reg = make_registry({"B", "A"}, 2);
    ASSERT_EQ(reg->size(), 8u);
    EXPECT_EQ(reg->mode(0).str(), "A/H/0");
    EXPECT_EQ(reg->mode(1).str(), "A/H/1");
    EXPECT_EQ(reg->mode(2).str(), "A/V/0");
    EXPECT_EQ(reg->mode(4).str(), "B/H/0");
    EXPECT_EQ(reg->index({"B", Pol::V, 1}), 7u);
}

TEST(Registry, Errors) {
    EXPECT_THROW(make_registry({"A", "A"}), Error);
    EXPECT_THROW(make_registry({"A"}, 0), Error);
    std::vector<std::string> many;
    for (int i = 0; i < 17; ++i) many.push_back("s" + std::to_string(i));
    EXPECT_THROW(make_registry(many, 4), Error);  // 17 * 2 * 4 = 136 > 128
    EXPECT_NO_THROW(make_registry(std::vector<std::string>(many.begin(), many.end() - 1), 4));
    EXPECT_THROW(make_registry({"A"})->index({"Z", Pol::H, 0}), Error);
}

TEST(Prepare, VacuumAndSinglePhoton) {
    auto reg = make_registry({"A"}, 1);
    auto vac = prepare_product_state(reg, {});
    ASSERT_EQ(vac.size(), 1u);
    EXPECT_EQ(vac.photon_number(), 0);

    const double s = 1.0 / std::sqrt(2.0);
    std::vector<PhotonSpec> ph{{"A", s, s}};
    auto st = prepare_product_state(reg, ph);
    EXPECT_EQ(st.size(), 2u);
    EXPECT_NEAR(std::abs(st.amplitude(occ_of(*reg, {{{"A", Pol::H, 0}, 1}})) - s), 0.0, 1e-15);
}

TEST(Prepare, TwoPhotonsSameModeGetSqrt2) {
    auto reg = make_registry({"A"}, 1);
    std::vector<PhotonSpec> ph{{"A", 1.0, 0.0}, {"A", 1.0, 0.0}};
    auto st = prepare_product_state(reg, ph);
    ASSERT_EQ(st.size(), 1u);
    EXPECT_NEAR(std::abs(st.amplitude(occ_of(*reg, {{{"A", Pol::H, 0}, 2}})) - 1.0), 0.0, 1e-15);
}

TEST(Prepare, Errors) {
    auto reg = make_registry({"A"}, 1);
    std::vector<PhotonSpec> five(5, PhotonSpec{"A", 1.0, 0.0});
    EXPECT_THROW(prepare_product_state(reg, five), Error);
    std::vector<PhotonSpec> unknown{{"Q", 1.0, 0.0}};
    EXPECT_THROW(prepare_product_state(reg, unknown), Error);
    std::vector<PhotonSpec> unnorm{{"A", 1.0, 1.0}};
    EXPECT_THROW(prepare_product_state(reg, unnorm), Error);
    std::vector<PhotonSpec> bins{{"A", 1.0, 0.0, {0.6, 0.8}}};
    EXPECT_THROW(prepare_product_state(reg, bins), Error);  // registry has one bin
}

TEST(Apply, IdentityLeavesStateUnchanged) {
    auto reg = four_labels();
    std::vector<PhotonSpec> ph{{"m0", 0.6, 0.8}, {"m2", 1.0, 0.0}};
    auto st = prepare_product_state(reg, ph);
    auto out = apply_mode_unitary(st, full(reg, Eigen::MatrixXcd::Identity(8, 8)));
    ASSERT_EQ(out.size(), st.size());
    for (const auto &[occ, amp] : st.terms()) EXPECT_EQ(out.amplitude(occ), amp);
}

TEST(Apply, HongOuMandelBunching) {
    auto reg = make_registry({"a", "b"}, 1);
    std::vector<PhotonSpec> ph{{"a", 1.0, 0.0}, {"b", 1.0, 0.0}};
    auto out = apply_mode_unitary(prepare_product_state(reg, ph), beamsplitter("a", "b", 0.5));
    const auto aa = occ_of(*reg, {{{"a", Pol::H, 0}, 2}});
    const auto bb = occ_of(*reg, {{{"b", Pol::H, 0}, 2}});
    const auto ab = occ_of(*reg, {{{"a", Pol::H, 0}, 1}, {{"b", Pol::H, 0}, 1}});
    EXPECT_NEAR(std::abs(out.amplitude(ab)), 0.0, 1e-15);
    // Oracle: per([[sqrt T, -sqrt R],[sqrt R, sqrt T]]) on the relevant rows.
    Eigen::MatrixXcd u = beamsplitter("a", "b", 0.5).matrix;
    Eigen::MatrixXcd u2(2, 2);
    u2 << u(0, 0), u(0, 2), u(2, 0), u(2, 2);  // (a,H) and (b,H) slots
    EXPECT_NEAR(std::abs(out.amplitude(aa) - oracle::transition(u2, {1, 1}, {2, 0})), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(out.amplitude(bb) - oracle::transition(u2, {1, 1}, {0, 2})), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(out.amplitude(aa)), 1.0 / std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(std::real(out.amplitude(aa) * out.amplitude(bb)), -0.5, 1e-14);
}

TEST(Apply, PbsOnPlusPlusGivesFourTerms) {
    auto reg = make_registry({"A1", "A2"}, 1);
    const double s = 1.0 / std::sqrt(2.0);
    std::vector<PhotonSpec> ph{{"A1", s, s}, {"A2", s, s}};
    auto out = apply_mode_unitary(prepare_product_state(reg, ph), pbs("A1", "A2"));
    ASSERT_EQ(out.size(), 4u);
    for (const auto &[occ, amp] : out.terms()) EXPECT_NEAR(std::abs(amp - Complex(0.5)), 0.0, 1e-15);
    EXPECT_NE(out.amplitude(occ_of(*reg, {{{"A1", Pol::H, 0}, 1}, {{"A1", Pol::V, 0}, 1}})), Complex(0.0));
    EXPECT_NE(out.amplitude(occ_of(*reg, {{{"A2", Pol::H, 0}, 1}, {{"A2", Pol::V, 0}, 1}})), Complex(0.0));
    EXPECT_NE(out.amplitude(occ_of(*reg, {{{"A1", Pol::H, 0}, 1}, {{"A2", Pol::H, 0}, 1}})), Complex(0.0));
    EXPECT_NE(out.amplitude(occ_of(*reg, {{{"A1", Pol::V, 0}, 1}, {{"A2", Pol::V, 0}, 1}})), Complex(0.0));
}

TEST(Apply, RejectsNonUnitaryAndUnknownModes) {
    auto reg = make_registry({"a", "b"}, 1);
    auto st = prepare_product_state(reg, std::vector<PhotonSpec>{{"a", 1.0, 0.0}});
    auto bad = beamsplitter("a", "b", 0.5);
    bad.matrix.row(0) *= 1.01;
    EXPECT_THROW(apply_mode_unitary(st, bad), Error);
    EXPECT_THROW(apply_mode_unitary(st, hwp("zz", 10.0)), Error);
}

TEST(Apply, MatchesPermanentOracleOnRandomUnitaries) {
    std::mt19937_64 rng(2024);
    auto reg = four_labels();
    std::uniform_int_distribution<int> mode(0, 7), count(1, 4);
    for (int trial = 0; trial < 25; ++trial) {
        const Eigen::MatrixXcd u = oracle::haar_unitary(8, rng);
        Occupation in(8, 0);
        const int n = count(rng);
        for (int k = 0; k < n; ++k) ++in[static_cast<std::size_t>(mode(rng))];
        PureState st(reg, {{in, Complex(1.0)}});
        const auto out = apply_mode_unitary(st, full(reg, u));
        const auto ref = oracle::evolve(u, {{in, Complex(1.0)}});
        double dev = 0.0;
        for (const auto &[o, a] : ref) dev = std::max(dev, std::abs(out.amplitude(o) - a));
        EXPECT_LT(dev, 1e-10) << "trial " << trial;
        EXPECT_NEAR(out.norm_squared(), 1.0, 1e-10);
    }
}

TEST(Apply, CompositionEqualsSequentialApplication) {
    std::mt19937_64 rng(7);
    auto reg = four_labels();
    std::vector<PhotonSpec> ph{{"m0", 0.6, 0.8}, {"m1", 1.0, 0.0}, {"m3", 0.0, 1.0}};
    auto st = prepare_product_state(reg, ph);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<ModeTransform> ts{full(reg, oracle::haar_unitary(8, rng)), full(reg, oracle::haar_unitary(8, rng))};
        auto seq = apply_mode_unitary(apply_mode_unitary(st, ts[0]), ts[1]);
        auto once = apply_mode_unitary(st, compose(ts));
        EXPECT_NEAR(std::abs(inner_product(seq, once)), 1.0, 1e-10);
        EXPECT_NEAR(seq.norm_squared(), 1.0, 1e-10);
    }
}

TEST(Apply, LocalTransformOnSubsetMatchesEmbedding) {
    std::mt19937_64 rng(99);
    auto reg = four_labels();
    std::vector<PhotonSpec> ph{{"m0", 0.6, 0.8}, {"m2", 1.0, 0.0}, {"m3", 0.0, 1.0}};
    auto st = prepare_product_state(reg, ph);
    ModeTransform local{{{"m0", Pol::H, 0}, {"m2", Pol::V, 0}, {"m3", Pol::V, 0}}, oracle::haar_unitary(3, rng)};
    std::vector<ModeTransform> one{local};
    Eigen::MatrixXcd big = Eigen::MatrixXcd::Identity(8, 8);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            big(reg->index(local.modes[r]), reg->index(local.modes[c])) = local.matrix(r, c);
    auto a = apply_mode_unitary(st, local);
    auto b = apply_mode_unitary(st, full(reg, big));
    EXPECT_NEAR(std::abs(inner_product(a, b)), 1.0, 1e-12);
}

TEST(InnerProduct, BasicsAndRegistryMismatch) {
    auto reg = make_registry({"A1", "A2"}, 1);
    PureState hv0(reg, {{occ_of(*reg, {{{"A1", Pol::H, 0}, 1}, {{"A1", Pol::V, 0}, 1}}), 1.0}});
    PureState zerohv(reg, {{occ_of(*reg, {{{"A2", Pol::H, 0}, 1}, {{"A2", Pol::V, 0}, 1}}), 1.0}});
    EXPECT_EQ(inner_product(hv0, zerohv), Complex(0.0));
    EXPECT_NEAR(std::abs(inner_product(hv0, hv0) - 1.0), 0.0, 1e-15);
    PureState mix(reg, {{hv0.terms().begin()->first, Complex(0.6, 0.0)}, {zerohv.terms().begin()->first, Complex(0.0, 0.8)}});
    EXPECT_EQ(inner_product(mix, hv0), std::conj(inner_product(hv0, mix)));
    auto other = make_registry({"A1", "A2"}, 2);
    EXPECT_THROW(inner_product(hv0, PureState::vacuum(other)), Error);
}

TEST(PartialTrace, BellStateAndErrors) {
    auto reg = make_registry({"A", "B", "C"}, 1);
    const double s = 1.0 / std::sqrt(2.0);
    PureState phi(reg, {{occ_of(*reg, {{{"A", Pol::H, 0}, 1}, {{"B", Pol::H, 0}, 1}}), s},
                        {occ_of(*reg, {{{"A", Pol::V, 0}, 1}, {{"B", Pol::V, 0}, 1}}), s}});
    auto rho = partial_trace_to_polarization(phi, {"A", "B"});
    EXPECT_TRUE(rho.is_valid());
    EXPECT_NEAR(fidelity(rho, bell_vector(BellState::PhiPlus)), 1.0, 1e-12);

    PureState two(reg, {{occ_of(*reg, {{{"A", Pol::H, 0}, 2}, {{"B", Pol::H, 0}, 1}}), 1.0}});
    EXPECT_THROW(partial_trace_to_polarization(two, {"A", "B"}), Error);
    PureState extra(reg, {{occ_of(*reg, {{{"A", Pol::H, 0}, 1}, {{"B", Pol::H, 0}, 1}, {{"C", Pol::H, 0}, 1}}), 1.0}});
    EXPECT_THROW(partial_trace_to_polarization(extra, {"A", "B"}), Error);
    std::vector<std::string> traced{"C"};
    EXPECT_NO_THROW(partial_trace_to_polarization(extra, {"A", "B"}, traced));
}

TEST(PartialTrace, OrthogonalBinsDecohere) {
    auto reg = make_registry({"A", "B"}, 2);
    const double s = 1.0 / std::sqrt(2.0);
    // HH in bin 0 and VV in bin 1: classically correlated mixture.
    PureState st(reg, {{occ_of(*reg, {{{"A", Pol::H, 0}, 1}, {{"B", Pol::H, 0}, 1}}), s},
                       {occ_of(*reg, {{{"A", Pol::V, 1}, 1}, {{"B", Pol::V, 1}, 1}}), s}});
    auto rho = partial_trace_to_polarization(st, {"A", "B"});
    EXPECT_NEAR(fidelity(rho, bell_vector(BellState::PhiPlus)), 0.5, 1e-12);
    EXPECT_NEAR(concurrence(rho), 0.0, 1e-10);
}
