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

// Mode transforms for the optical elements.
//
// Polarization angles are measured from the V axis toward H: a linear
// polarization at angle t is cos(t)|V> + sin(t)|H>, so 0 deg is V, 90 deg is
// H and 45 deg is (H + V)/sqrt(2). Every element acts identically on each
// temporal bin.

#pragma once

#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "lofsim/distinguishability.hpp"
#include "lofsim/fock.hpp"

namespace lofsim {

/// Phase picked up by the V component on reflection at a PBS.
enum class PbsConvention { Permutation, IReflect };

inline const char *convention_name(PbsConvention c) { return c == PbsConvention::Permutation ? "perm" : "i-reflect"; }

inline PbsConvention parse_convention(const std::string &s) {
    if (s == "perm") return PbsConvention::Permutation;
    if (s == "i-reflect") return PbsConvention::IReflect;
    throw Error("unknown PBS convention '" + s + "'");
}

enum class ElementKind { PBS, HWP, RPBS, Polarizer, Phase, BeamSplitter, Delay };

inline const char *kind_name(ElementKind k) {
    switch (k) {
        case ElementKind::PBS: return "PBS";
        case ElementKind::HWP: return "HWP";
        case ElementKind::RPBS: return "RPBS";
        case ElementKind::Polarizer: return "POLARIZER";
        case ElementKind::Phase: return "PHASE";
        case ElementKind::BeamSplitter: return "BEAMSPLITTER";
        case ElementKind::Delay: return "DELAY";
    }
    return "?";
}

inline std::optional<ElementKind> parse_kind(const std::string &s) {
    for (auto k : {ElementKind::PBS, ElementKind::HWP, ElementKind::RPBS, ElementKind::Polarizer,
                   ElementKind::Phase, ElementKind::BeamSplitter, ElementKind::Delay})
        if (s == kind_name(k)) return k;
    return std::nullopt;
}

inline bool is_two_port(ElementKind k) {
    return k == ElementKind::PBS || k == ElementKind::RPBS || k == ElementKind::BeamSplitter;
}

/// Configured optical element. Which numeric fields matter depends on kind:
/// HWP and POLARIZER use `angle_deg`; RPBS uses `angle_deg` as the angle of
/// its two input plates (22.5 for fusion, 0 for the alignment variant).
struct ElementSpec {
    ElementKind kind = ElementKind::PBS;
    std::vector<std::string> spatial;
    double angle_deg = 0.0;
    double phase_rad = 0.0;
    std::optional<Pol> pol;
    double transmissivity = 0.5;
    double delay_um = 0.0;
    double mode_overlap = 1.0;
    std::string loss;

    bool operator==(const ElementSpec &) const = default;
};

namespace detail {

inline double deg(double d) { return d * std::numbers::pi / 180.0; }

inline std::vector<ModeId> per_bin(const std::vector<std::pair<std::string, Pol>> &slots, std::size_t bin) {
    std::vector<ModeId> out;
    for (const auto &[s, p] : slots) out.push_back({s, p, static_cast<std::uint32_t>(bin)});
    return out;
}

// Repeats a block matrix over `bins` bins: modes ordered bin-major.
inline ModeTransform tile(const std::vector<std::pair<std::string, Pol>> &slots, const Eigen::MatrixXcd &block,
                          std::size_t bins) {
    const auto k = static_cast<Eigen::Index>(slots.size());
    ModeTransform t;
    t.matrix = Eigen::MatrixXcd::Zero(k * static_cast<Eigen::Index>(bins), k * static_cast<Eigen::Index>(bins));
    for (std::size_t b = 0; b < bins; ++b) {
        auto m = per_bin(slots, b);
        t.modes.insert(t.modes.end(), m.begin(), m.end());
        t.matrix.block(static_cast<Eigen::Index>(b) * k, static_cast<Eigen::Index>(b) * k, k, k) = block;
    }
    return t;
}

inline void require_distinct(const std::string &a, const std::string &b) {
    if (a == b) throw Error("two-port element needs distinct spatial labels, got '" + a + "' twice");
}

// Single-photon Jones matrix in (H, V) order for a projector onto the linear
// polarization at `angle_deg`.
inline Eigen::Matrix2cd projector(double angle_deg) {
    const double t = deg(angle_deg);
    Eigen::Vector2cd p(std::sin(t), std::cos(t));
    return p * p.adjoint();
}

}  // namespace detail

inline ModeTransform pbs(const std::string &s1, const std::string &s2, std::size_t bins = 1,
                         PbsConvention convention = PbsConvention::Permutation) {
    detail::require_distinct(s1, s2);
    const Complex r = convention == PbsConvention::Permutation ? Complex(1.0) : Complex(0.0, 1.0);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(4, 4);
    // slots: (s1,H) (s1,V) (s2,H) (s2,V)
    u(0, 0) = 1.0;
    u(2, 2) = 1.0;
    u(3, 1) = r;
    u(1, 3) = r;
    return detail::tile({{s1, Pol::H}, {s1, Pol::V}, {s2, Pol::H}, {s2, Pol::V}}, u, bins);
}

/// Half-wave plate with fast axis at `plate_angle_deg`: Jones matrix
/// [[cos 2t, sin 2t], [sin 2t, -cos 2t]] on (V, H) amplitudes.
inline ModeTransform hwp(const std::string &s, double plate_angle_deg, std::size_t bins = 1) {
    const double c = std::cos(2.0 * detail::deg(plate_angle_deg));
    const double sn = std::sin(2.0 * detail::deg(plate_angle_deg));
    Eigen::MatrixXcd u(2, 2);  // slots (H, V)
    u << -c, sn, sn, c;
    return detail::tile({{s, Pol::H}, {s, Pol::V}}, u, bins);
}

/// PBS acting in the +-45 deg basis: wave plates on both inputs, an ordinary
/// PBS, wave plates on both outputs. `input_plate_deg` 0 gives the alignment
/// variant in which the input plates no longer rotate the basis.
inline std::vector<ModeTransform> rpbs(const std::string &s1, const std::string &s2, std::size_t bins = 1,
                                       PbsConvention convention = PbsConvention::Permutation,
                                       double input_plate_deg = 22.5) {
    detail::require_distinct(s1, s2);
    return {hwp(s1, input_plate_deg, bins), hwp(s2, input_plate_deg, bins), pbs(s1, s2, bins, convention),
            hwp(s1, 22.5, bins), hwp(s2, 22.5, bins)};
}

/// Lossless-in-pass-axis polarizer, dilated to a unitary: the pass component
/// stays in `s`, the orthogonal component is routed to `loss_label`.
inline ModeTransform polarizer(const std::string &s, double pass_angle_deg, const std::string &loss_label,
                               std::size_t bins = 1) {
    if (loss_label.empty() || loss_label == s) throw Error("polarizer loss label collides with '" + s + "'");
    const Eigen::Matrix2cd p = detail::projector(pass_angle_deg);
    const Eigen::Matrix2cd q = Eigen::Matrix2cd::Identity() - p;
    Eigen::MatrixXcd u(4, 4);
    u << p, q, q, p;
    return detail::tile({{s, Pol::H}, {s, Pol::V}, {loss_label, Pol::H}, {loss_label, Pol::V}}, u, bins);
}

inline ModeTransform phase(const std::string &s, std::optional<Pol> pol, double phase_rad, std::size_t bins = 1) {
    const Complex e = std::polar(1.0, phase_rad);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Identity(2, 2);
    if (!pol || *pol == Pol::H) u(0, 0) = e;
    if (!pol || *pol == Pol::V) u(1, 1) = e;
    return detail::tile({{s, Pol::H}, {s, Pol::V}}, u, bins);
}

/// Polarization-independent coupler: a1 -> sqrt(T) a1 + sqrt(1-T) a2,
/// a2 -> -sqrt(1-T) a1 + sqrt(T) a2.
inline ModeTransform beamsplitter(const std::string &s1, const std::string &s2, double transmissivity,
                                  std::size_t bins = 1) {
    detail::require_distinct(s1, s2);
    if (!(transmissivity >= 0.0 && transmissivity <= 1.0))
        throw Error("transmissivity " + std::to_string(transmissivity) + " outside [0, 1]");
    const double t = std::sqrt(transmissivity);
    const double r = std::sqrt(1.0 - transmissivity);
    Eigen::MatrixXcd u = Eigen::MatrixXcd::Zero(4, 4);
    // slots: (s1,H) (s1,V) (s2,H) (s2,V)
    for (int p = 0; p < 2; ++p) {
        u(p, p) = t;
        u(2 + p, p) = r;
        u(p, 2 + p) = -r;
        u(2 + p, 2 + p) = t;
    }
    return detail::tile({{s1, Pol::H}, {s1, Pol::V}, {s2, Pol::H}, {s2, Pol::V}}, u, bins);
}

/// Path delay in `s`. The reference bin 0 is rotated onto `spare_bin` so that
/// the delayed copy of a bin-0 wavepacket overlaps the undelayed one by
/// mode_overlap * overlap_from_delay(delay). Photons in other bins are left
/// alone, so the model is exact for bin-0 inputs.
inline ModeTransform delay(const std::string &s, double delay_um, const OverlapModel &model, std::size_t spare_bin,
                           double mode_overlap = 1.0) {
    if (!(mode_overlap >= 0.0 && mode_overlap <= 1.0)) throw Error("delay mode overlap outside [0, 1]");
    const Complex u = mode_overlap * overlap_from_delay(delay_um, model);
    const double w = std::sqrt(std::max(0.0, 1.0 - std::norm(u)));
    ModeTransform t;
    if (spare_bin == 0) {
        if (w > 0.0) throw Error("delay needs a spare temporal bin");
        t.modes = {{s, Pol::H, 0}, {s, Pol::V, 0}};
        t.matrix = Eigen::MatrixXcd::Identity(2, 2) * (u / std::abs(u));
        return t;
    }
    const auto sb = static_cast<std::uint32_t>(spare_bin);
    t.modes = {{s, Pol::H, 0}, {s, Pol::H, sb}, {s, Pol::V, 0}, {s, Pol::V, sb}};
    t.matrix = Eigen::MatrixXcd::Zero(4, 4);
    for (int p = 0; p < 2; ++p) {
        t.matrix(2 * p, 2 * p) = u;
        t.matrix(2 * p + 1, 2 * p) = w;
        t.matrix(2 * p, 2 * p + 1) = -w;
        t.matrix(2 * p + 1, 2 * p + 1) = std::conj(u);
    }
    return t;
}

struct LoweringContext {
    std::size_t bins = 1;
    PbsConvention convention = PbsConvention::Permutation;
    OverlapModel model{};
    std::size_t spare_bin = 0;  // only used by DELAY
};

/// Lowers one configured element to its transform sequence.
inline std::vector<ModeTransform> lower_element(const ElementSpec &e, const LoweringContext &ctx) {
    const std::size_t want = is_two_port(e.kind) ? 2 : 1;
    if (e.spatial.size() != want)
        throw Error(std::string(kind_name(e.kind)) + " binds " + std::to_string(want) + " spatial label(s), got " +
                    std::to_string(e.spatial.size()));
    switch (e.kind) {
        case ElementKind::PBS: return {pbs(e.spatial[0], e.spatial[1], ctx.bins, ctx.convention)};
        case ElementKind::HWP: return {hwp(e.spatial[0], e.angle_deg, ctx.bins)};
        case ElementKind::RPBS: return rpbs(e.spatial[0], e.spatial[1], ctx.bins, ctx.convention, e.angle_deg);
        case ElementKind::Polarizer: return {polarizer(e.spatial[0], e.angle_deg, e.loss, ctx.bins)};
        case ElementKind::Phase: return {phase(e.spatial[0], e.pol, e.phase_rad, ctx.bins)};
        case ElementKind::BeamSplitter: return {beamsplitter(e.spatial[0], e.spatial[1], e.transmissivity, ctx.bins)};
        case ElementKind::Delay: return {delay(e.spatial[0], e.delay_um, ctx.model, ctx.spare_bin, e.mode_overlap)};
    }
    throw Error("unknown element kind");
}

}  // namespace lofsim
