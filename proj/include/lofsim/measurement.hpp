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

// Detection, heralding and two-qubit figures of merit.
//
// Detectors are ideal photon-number-resolving counters that do not resolve
// temporal bins: a detector sums the photons of one spatial label (and
// optionally one polarization) across all bins.

#pragma once

#include <algorithm>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lofsim/fock.hpp"

namespace lofsim {

struct Detector {
    std::string name;
    std::string spatial;
    std::optional<Pol> pol;  // nullopt: polarization-blind

    bool operator==(const Detector &) const = default;
};

/// Exact photon counts required on the full set of read-out detectors.
struct HeraldPattern {
    std::string name;
    std::vector<Detector> detectors;
    std::vector<int> counts;

    void validate() const {
        if (counts.size() != detectors.size()) throw Error("herald pattern size mismatch");
        bool positive = false;
        for (int c : counts) {
            if (c < 0) throw Error("herald pattern '" + name + "' has a negative count");
            positive = positive || c > 0;
        }
        if (!positive) throw Error("herald pattern '" + name + "' needs at least one positive count");
    }
};

struct Outcome {
    std::vector<int> counts;
    double probability = 0.0;
};

namespace detail {

inline std::vector<std::vector<std::size_t>> detector_modes(const ModeRegistry &reg,
                                                            std::span<const Detector> detectors) {
    std::vector<std::vector<std::size_t>> out;
    for (const auto &d : detectors) {
        if (!reg.has_spatial(d.spatial))
            throw Error("unknown mode: detector '" + d.name + "' reads '" + d.spatial + "'");
        out.push_back(reg.indices_of(d.spatial, d.pol));
    }
    return out;
}

inline std::vector<int> read(const Occupation &occ, const std::vector<std::vector<std::size_t>> &modes) {
    std::vector<int> c(modes.size(), 0);
    for (std::size_t d = 0; d < modes.size(); ++d)
        for (auto i : modes[d]) c[d] += occ[i];
    return c;
}

}  // namespace detail

/// Probability of every exact count pattern on `detectors`, marginalizing
/// all other modes. Patterns are listed in lexicographic count order.
inline std::vector<Outcome> outcome_distribution(const PureState &state, std::span<const Detector> detectors) {
    const auto modes = detail::detector_modes(state.registry(), detectors);
    std::map<std::vector<int>, double> dist;
    for (const auto &[occ, amp] : state.terms()) dist[detail::read(occ, modes)] += std::norm(amp);
    std::vector<Outcome> out;
    for (auto &[c, p] : dist)
        if (p > 0.0) out.push_back({c, p});
    return out;
}

struct HeraldResult {
    double probability = 0.0;
    PureState state;  // normalized; detected photons are kept in their modes
};

inline HeraldResult herald(const PureState &state, const HeraldPattern &pattern) {
    pattern.validate();
    const auto modes = detail::detector_modes(state.registry(), pattern.detectors);
    PureState kept(state.registry_ptr());
    double p = 0.0;
    for (const auto &[occ, amp] : state.terms()) {
        if (detail::read(occ, modes) != pattern.counts) continue;
        kept.add(occ, amp);
        p += std::norm(amp);
    }
    if (p <= 0.0 || kept.empty()) throw Error("herald impossible: pattern '" + pattern.name + "' has zero probability");
    return {p, kept.normalized()};
}

/// Spatial labels read by the pattern's detectors, excluding `kept`.
inline std::vector<std::string> detector_labels(const HeraldPattern &pattern, const std::array<std::string, 2> &kept) {
    std::vector<std::string> out;
    for (const auto &d : pattern.detectors)
        if (d.spatial != kept[0] && d.spatial != kept[1]) out.push_back(d.spatial);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Heralds and reduces to the kept pair in one step, tracing out the
/// detected photons.
inline PolarizationDensityMatrix heralded_pair(const PureState &state, const HeraldPattern &pattern,
                                               const std::array<std::string, 2> &kept, double *probability = nullptr) {
    auto h = herald(state, pattern);
    if (probability) *probability = h.probability;
    const auto traced = detector_labels(pattern, kept);
    return partial_trace_to_polarization(h.state, kept, traced);
}

inline double fidelity(const PolarizationDensityMatrix &rho, const Vector4c &target) {
    const Vector4c t = target / target.norm();
    return std::clamp((t.adjoint() * rho.matrix() * t)(0, 0).real(), 0.0, 1.0);
}

/// Wootters concurrence: max(0, l1 - l2 - l3 - l4) with l_i the decreasing
/// square roots of the eigenvalues of rho rho~. With rho = A A^dag those are
/// the singular values of A^dag (yy A*), which keeps exact zeros at rounding
/// level instead of the sqrt(eps) a matrix square root would leave.
inline double concurrence(const PolarizationDensityMatrix &rho) {
    Matrix4c yy = Matrix4c::Zero();
    yy(0, 3) = -1.0;
    yy(1, 2) = 1.0;
    yy(2, 1) = 1.0;
    yy(3, 0) = -1.0;
    const Matrix4c r = 0.5 * (rho.matrix() + rho.matrix().adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix4c> es(r);
    const double scale = std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff());
    std::vector<Eigen::Index> support;
    for (Eigen::Index k = 0; k < 4; ++k)
        if (es.eigenvalues()(k) > 1e-13 * scale) support.push_back(k);
    if (support.empty()) return 0.0;
    Eigen::MatrixXcd a(4, static_cast<Eigen::Index>(support.size()));
    for (std::size_t k = 0; k < support.size(); ++k)
        a.col(static_cast<Eigen::Index>(k)) = es.eigenvectors().col(support[k]) * std::sqrt(es.eigenvalues()(support[k]));
    const Eigen::MatrixXcd m = a.adjoint() * (yy * a.conjugate());
    Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(m).singularValues();
    std::vector<double> l(sv.data(), sv.data() + sv.size());
    l.resize(4, 0.0);
    std::sort(l.begin(), l.end(), std::greater<>());
    return std::clamp(l[0] - l[1] - l[2] - l[3], 0.0, 1.0);
}

/// Probabilities of (pass,pass), (pass,fail), (fail,pass), (fail,fail) for
/// polarizers at angles a (first photon) and b (second photon).
inline std::array<double, 4> analyzer_probabilities(const PolarizationDensityMatrix &rho, double a_deg, double b_deg) {
    auto proj = [](double angle_deg) {
        const double t = angle_deg * std::numbers::pi / 180.0;
        Eigen::Vector2cd p(std::sin(t), std::cos(t));  // (H, V)
        return Eigen::Matrix2cd(p * p.adjoint());
    };
    const Eigen::Matrix2cd pa = proj(a_deg), pb = proj(b_deg);
    const Eigen::Matrix2cd id = Eigen::Matrix2cd::Identity();
    std::array<double, 4> out{};
    int k = 0;
    for (const auto &ma : {pa, Eigen::Matrix2cd(id - pa)})
        for (const auto &mb : {pb, Eigen::Matrix2cd(id - pb)}) {
            Matrix4c m;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) m.block<2, 2>(2 * i, 2 * j) = ma(i, j) * mb;
            out[k++] = std::max(0.0, (rho.matrix() * m).trace().real());
        }
    return out;
}

inline double correlation_E(const PolarizationDensityMatrix &rho, double a_deg, double b_deg) {
    const auto p = analyzer_probabilities(rho, a_deg, b_deg);
    return std::clamp(p[0] + p[3] - p[1] - p[2], -1.0, 1.0);
}

struct ChshReport {
    double a = 0.0, a_prime = 45.0, b = 22.5, b_prime = 67.5;
    std::array<double, 4> E{};  // E(a,b), E(a,b'), E(a',b), E(a',b')
    double S = 0.0;
    std::optional<std::array<double, 4>> E_sigma;
    std::optional<double> S_sigma;

    bool violates() const { return S > 2.0; }
};

inline double chsh_combine(const std::array<double, 4> &e) { return e[0] - e[1] + e[2] + e[3]; }

inline ChshReport chsh_S(const PolarizationDensityMatrix &rho, double a, double a_prime, double b, double b_prime) {
    ChshReport r{a, a_prime, b, b_prime, {}, 0.0, std::nullopt, std::nullopt};
    r.E = {correlation_E(rho, a, b), correlation_E(rho, a, b_prime), correlation_E(rho, a_prime, b),
           correlation_E(rho, a_prime, b_prime)};
    r.S = chsh_combine(r.E);
    return r;
}

/// Correlation from the four coincidence counts (pp, pf, fp, ff) with
/// Poissonian error propagation per count bin.
inline std::pair<double, double> correlation_from_counts(const std::array<std::uint64_t, 4> &n) {
    const double total = static_cast<double>(n[0] + n[1] + n[2] + n[3]);
    if (total <= 0.0) throw Error("correlation from zero counts");
    const double e = (static_cast<double>(n[0] + n[3]) - static_cast<double>(n[1] + n[2])) / total;
    const double var = ((1.0 - e) * (1.0 - e) * static_cast<double>(n[0] + n[3]) +
                        (1.0 + e) * (1.0 + e) * static_cast<double>(n[1] + n[2])) /
                       (total * total);
    return {e, std::sqrt(var)};
}

// ---- count sampling -------------------------------------------------------

enum class SamplingMode { Multinomial, Poisson };

/// Draws `shots` events from a discrete distribution. Multinomial mode uses
/// sequential conditional binomials so the total is exactly `shots`; Poisson
/// mode draws each bin independently with mean shots * p.
inline std::vector<std::uint64_t> sample_counts(std::span<const double> probabilities, std::uint64_t shots,
                                                std::uint64_t seed, SamplingMode mode = SamplingMode::Multinomial) {
    double total = 0.0;
    for (double p : probabilities) {
        if (!(p >= 0.0) || !std::isfinite(p)) throw Error("invalid distribution: negative or non-finite probability");
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error("invalid distribution: probabilities sum to " + std::to_string(total));
    std::mt19937_64 rng(seed);
    std::vector<std::uint64_t> counts(probabilities.size(), 0);
    if (mode == SamplingMode::Poisson) {
        for (std::size_t i = 0; i < probabilities.size(); ++i) {
            const double mean = static_cast<double>(shots) * probabilities[i];
            if (mean > 0.0) counts[i] = std::poisson_distribution<std::uint64_t>(mean)(rng);
        }
        return counts;
    }
    std::uint64_t left = shots;
    double mass = 1.0;
    for (std::size_t i = 0; i < probabilities.size() && left > 0; ++i) {
        if (i + 1 == probabilities.size()) {
            counts[i] = left;
            break;
        }
        const double q = mass > 0.0 ? std::clamp(probabilities[i] / mass, 0.0, 1.0) : 0.0;
        counts[i] = std::binomial_distribution<std::uint64_t>(left, q)(rng);
        left -= counts[i];
        mass -= probabilities[i];
    }
    return counts;
}

inline std::vector<std::uint64_t> sample_counts(std::span<const Outcome> distribution, std::uint64_t shots,
                                                std::uint64_t seed, SamplingMode mode = SamplingMode::Multinomial) {
    std::vector<double> p;
    for (const auto &o : distribution) p.push_back(o.probability);
    return sample_counts(std::span<const double>(p), shots, seed, mode);
}

// ---- fringe fitting -------------------------------------------------------

struct CurvePoint {
    double x = 0.0;
    double value = 0.0;
};

struct SinusoidFit {
    double offset = 0.0;
    double amplitude = 0.0;
    double phase = 0.0;  // value = offset + amplitude * cos(2 pi x / period - phase)
    double visibility = 0.0;
    double max = 0.0;
    double min = 0.0;
};

/// Least-squares sinusoid with fixed known period; visibility is
/// (max - min) / (max + min) of the fitted curve.
inline SinusoidFit visibility(std::span<const CurvePoint> curve, double period) {
    if (!(period > 0.0)) throw Error("fit period must be positive");
    if (curve.size() < 8) throw Error("visibility fit needs at least 8 points");
    auto [lo, hi] = std::minmax_element(curve.begin(), curve.end(), [](auto &a, auto &b) { return a.x < b.x; });
    if (hi->x - lo->x < period - 1e-9) throw Error("visibility fit needs at least one full period");
    const double w = 2.0 * std::numbers::pi / period;
    Eigen::MatrixXd a(curve.size(), 3);
    Eigen::VectorXd y(curve.size());
    for (std::size_t i = 0; i < curve.size(); ++i) {
        a(i, 0) = 1.0;
        a(i, 1) = std::cos(w * curve[i].x);
        a(i, 2) = std::sin(w * curve[i].x);
        y(i) = curve[i].value;
    }
    const Eigen::Vector3d c = a.colPivHouseholderQr().solve(y);
    SinusoidFit f;
    f.offset = c(0);
    f.amplitude = std::hypot(c(1), c(2));
    f.phase = std::atan2(c(2), c(1));
    f.max = f.offset + f.amplitude;
    f.min = f.offset - f.amplitude;
    if (f.max + f.min == 0.0) throw Error("degenerate curve: max + min = 0");
    f.visibility = (f.max - f.min) / (f.max + f.min);
    return f;
}

/// Joint fit of several curves sharing offset and amplitude, each with its
/// own phase. Alternates the linear (offset, amplitude) solve with per-curve
/// phase updates.
inline SinusoidFit joint_visibility(std::span<const std::vector<CurvePoint>> curves, double period,
                                    std::vector<double> *phases = nullptr) {
    if (curves.empty()) throw Error("joint fit needs at least one curve");
    const double w = 2.0 * std::numbers::pi / period;
    std::vector<double> ph;
    for (const auto &c : curves) ph.push_back(visibility(c, period).phase);
    double offset = 0.0, amplitude = 0.0;
    for (int iter = 0; iter < 200; ++iter) {
        std::size_t n = 0;
        for (const auto &c : curves) n += c.size();
        Eigen::MatrixXd a(n, 2);
        Eigen::VectorXd y(n);
        std::size_t r = 0;
        for (std::size_t k = 0; k < curves.size(); ++k)
            for (const auto &p : curves[k]) {
                a(r, 0) = 1.0;
                a(r, 1) = std::cos(w * p.x - ph[k]);
                y(r++) = p.value;
            }
        const Eigen::Vector2d c = a.colPivHouseholderQr().solve(y);
        offset = c(0);
        amplitude = c(1);
        double change = 0.0;
        for (std::size_t k = 0; k < curves.size(); ++k) {
            // Least-squares cos/sin weights of this curve at fixed offset.
            Eigen::Matrix2d nm = Eigen::Matrix2d::Zero();
            Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
            for (const auto &p : curves[k]) {
                const Eigen::Vector2d basis(std::cos(w * p.x), std::sin(w * p.x));
                nm += basis * basis.transpose();
                rhs += (p.value - offset) * basis;
            }
            const Eigen::Vector2d cs = nm.ldlt().solve(rhs);
            double next = std::atan2(cs(1), cs(0));
            if (amplitude < 0.0) next += std::numbers::pi;
            change = std::max(change, std::abs(std::remainder(next - ph[k], 2.0 * std::numbers::pi)));
            ph[k] = next;
        }
        if (change < 1e-14) break;
    }
    SinusoidFit f;
    f.offset = offset;
    f.amplitude = std::abs(amplitude);
    f.phase = ph.front();
    f.max = offset + f.amplitude;
    f.min = offset - f.amplitude;
    if (f.max + f.min == 0.0) throw Error("degenerate curve: max + min = 0");
    f.visibility = (f.max - f.min) / (f.max + f.min);
    if (phases) *phases = ph;
    return f;
}

}  // namespace lofsim
