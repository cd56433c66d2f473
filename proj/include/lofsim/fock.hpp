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

// Exact few-photon bosonic states over a finite, ordered set of modes.
//
// A mode is a (spatial label, polarization, temporal bin) triple. States are
// stored sparsely as occupation-number kets with complex amplitudes, using
// normalized kets |n> = prod_i (a_i^dag)^{n_i} / sqrt(n_i!) |0>.

#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "lofsim/density.hpp"

namespace lofsim {

inline constexpr std::size_t kMaxModes = 128;
inline constexpr std::size_t kDefaultBins = 4;
inline constexpr int kDefaultPhotonBudget = 4;
inline constexpr double kPruneThreshold = 1e-14;
inline constexpr double kUnitarityTolerance = 1e-12;

struct ModeId {
    std::string spatial;
    Pol pol = Pol::H;
    std::uint32_t bin = 0;

    auto operator<=>(const ModeId &) const = default;
    bool operator==(const ModeId &) const = default;

    std::string str() const { return spatial + "/" + pol_name(pol) + "/" + std::to_string(bin); }
};

/// Ordered mode list: every spatial label crossed with {H, V} and `bins`
/// temporal bins, sorted lexicographically by (spatial, pol, bin).
class ModeRegistry {
   public:
    explicit ModeRegistry(std::vector<std::string> spatial_labels, std::size_t bins = kDefaultBins)
        : bins_(bins) {
        if (bins == 0) throw Error("mode registry needs at least one temporal bin");
        std::sort(spatial_labels.begin(), spatial_labels.end());
        if (std::adjacent_find(spatial_labels.begin(), spatial_labels.end()) != spatial_labels.end())
            throw Error("duplicate spatial label in mode registry");
        labels_ = std::move(spatial_labels);
        if (labels_.size() * 2 * bins_ > kMaxModes)
            throw Error("mode registry exceeds " + std::to_string(kMaxModes) + " modes");
        for (const auto &s : labels_)
            for (Pol p : {Pol::H, Pol::V})
                for (std::uint32_t b = 0; b < bins_; ++b) {
                    index_.emplace(ModeId{s, p, b}, modes_.size());
                    modes_.push_back(ModeId{s, p, b});
                }
    }

    std::size_t size() const { return modes_.size(); }
    std::size_t bins() const { return bins_; }
    const std::vector<ModeId> &modes() const { return modes_; }
    const std::vector<std::string> &spatial_labels() const { return labels_; }
    const ModeId &mode(std::size_t i) const { return modes_.at(i); }

    bool has_spatial(const std::string &label) const {
        return std::binary_search(labels_.begin(), labels_.end(), label);
    }

    std::optional<std::size_t> find(const ModeId &m) const {
        auto it = index_.find(m);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    std::size_t index(const ModeId &m) const {
        auto i = find(m);
        if (!i) throw Error("unknown mode " + m.str());
        return *i;
    }

    /// All mode indices of a spatial label, optionally restricted to one
    /// polarization, across every bin.
    std::vector<std::size_t> indices_of(const std::string &spatial, std::optional<Pol> pol = {}) const {
        if (!has_spatial(spatial)) throw Error("unknown spatial label '" + spatial + "'");
        std::vector<std::size_t> out;
        for (Pol p : {Pol::H, Pol::V}) {
            if (pol && *pol != p) continue;
            for (std::uint32_t b = 0; b < bins_; ++b) out.push_back(index_.at(ModeId{spatial, p, b}));
        }
        return out;
    }

    bool operator==(const ModeRegistry &o) const { return bins_ == o.bins_ && labels_ == o.labels_; }

   private:
    std::size_t bins_;
    std::vector<std::string> labels_;
    std::vector<ModeId> modes_;
    std::map<ModeId, std::size_t> index_;
};

using RegistryPtr = std::shared_ptr<const ModeRegistry>;

inline RegistryPtr make_registry(std::vector<std::string> labels, std::size_t bins = kDefaultBins) {
    return std::make_shared<const ModeRegistry>(std::move(labels), bins);
}

/// Photon counts per registered mode, in registry order.
using Occupation = std::vector<std::uint8_t>;

inline int photon_count(const Occupation &occ) {
    int n = 0;
    for (auto c : occ) n += c;
    return n;
}

inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

class PureState {
   public:
    using Terms = std::map<Occupation, Complex>;

    explicit PureState(RegistryPtr registry) : registry_(std::move(registry)) {
        if (!registry_) throw Error("state requires a mode registry");
    }
    PureState(RegistryPtr registry, Terms terms) : PureState(std::move(registry)) {
        for (auto &[occ, amp] : terms) add(occ, amp);
        prune();
    }

    static PureState vacuum(RegistryPtr registry) {
        PureState s(std::move(registry));
        s.terms_.emplace(Occupation(s.registry_->size(), 0), Complex(1.0));
        return s;
    }

    const ModeRegistry &registry() const { return *registry_; }
    const RegistryPtr &registry_ptr() const { return registry_; }
    const Terms &terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool empty() const { return terms_.empty(); }

    Complex amplitude(const Occupation &occ) const {
        auto it = terms_.find(occ);
        return it == terms_.end() ? Complex(0.0) : it->second;
    }

    void add(const Occupation &occ, Complex amp) {
        if (occ.size() != registry_->size()) throw Error("occupation length does not match registry");
        terms_[occ] += amp;
    }

    double norm_squared() const {
        double n = 0.0;
        for (const auto &[occ, amp] : terms_) n += std::norm(amp);
        return n;
    }

    /// Total photon number; throws if terms disagree.
    int photon_number() const {
        if (terms_.empty()) return 0;
        int n = photon_count(terms_.begin()->first);
        for (const auto &[occ, amp] : terms_)
            if (photon_count(occ) != n) throw Error("state mixes photon numbers");
        return n;
    }

    PureState normalized() const {
        double n = std::sqrt(norm_squared());
        if (n == 0.0) throw Error("cannot normalize the zero state");
        PureState out(registry_);
        for (const auto &[occ, amp] : terms_) out.terms_.emplace(occ, amp / n);
        return out;
    }

    void prune(double threshold = kPruneThreshold) {
        std::erase_if(terms_, [threshold](const auto &kv) { return std::abs(kv.second) <= threshold; });
    }

   private:
    RegistryPtr registry_;
    Terms terms_;
};

/// Unitary acting on an ordered subset of modes. Column j is the image of
/// the creation operator of modes[j]: a_j^dag -> sum_i matrix(i, j) a_i^dag.
struct ModeTransform {
    std::vector<ModeId> modes;
    Eigen::MatrixXcd matrix;
};

inline double unitarity_deviation(const Eigen::MatrixXcd &u) {
    if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
    if (u.size() == 0) return 0.0;
    Eigen::MatrixXcd d = u.adjoint() * u - Eigen::MatrixXcd::Identity(u.rows(), u.cols());
    return d.cwiseAbs().maxCoeff();
}

/// Embeds a sequence of transforms into one matrix over the sorted union of
/// their modes, applied first to last.
inline ModeTransform compose(std::span<const ModeTransform> ts) {
    std::set<ModeId> all;
    for (const auto &t : ts) all.insert(t.modes.begin(), t.modes.end());
    ModeTransform out{{all.begin(), all.end()}, {}};
    const auto n = static_cast<Eigen::Index>(out.modes.size());
    out.matrix = Eigen::MatrixXcd::Identity(n, n);
    std::map<ModeId, Eigen::Index> pos;
    for (Eigen::Index i = 0; i < n; ++i) pos[out.modes[i]] = i;
    for (const auto &t : ts) {
        Eigen::MatrixXcd e = Eigen::MatrixXcd::Identity(n, n);
        for (std::size_t c = 0; c < t.modes.size(); ++c)
            for (std::size_t r = 0; r < t.modes.size(); ++r)
                e(pos[t.modes[r]], pos[t.modes[c]]) = t.matrix(r, c);
        out.matrix = e * out.matrix;
    }
    return out;
}

/// One photon to be created on vacuum: polarization amplitudes (H, V) and a
/// temporal wavepacket over bins.
struct PhotonSpec {
    std::string spatial;
    Complex h{1.0};
    Complex v{0.0};
    std::vector<Complex> bins{Complex(1.0)};
};

inline PureState prepare_product_state(const RegistryPtr &registry, std::span<const PhotonSpec> photons,
                                       int photon_budget = kDefaultPhotonBudget) {
    if (static_cast<int>(photons.size()) > photon_budget)
        throw Error("photon budget exceeded: " + std::to_string(photons.size()) + " > " +
                    std::to_string(photon_budget));
    PureState state = PureState::vacuum(registry);
    for (const auto &ph : photons) {
        if (!registry->has_spatial(ph.spatial)) throw Error("unknown spatial label '" + ph.spatial + "'");
        if (std::abs(std::norm(ph.h) + std::norm(ph.v) - 1.0) > 1e-12)
            throw Error("unnormalized polarization amplitudes for photon in " + ph.spatial);
        double bn = 0.0;
        for (auto b : ph.bins) bn += std::norm(b);
        if (std::abs(bn - 1.0) > 1e-12) throw Error("unnormalized bin amplitudes for photon in " + ph.spatial);
        if (ph.bins.size() > registry->bins()) throw Error("photon wavepacket exceeds registry bin count");

        // Creation operator sum_{pol,bin} c a^dag applied to every term.
        std::vector<std::pair<std::size_t, Complex>> creation;
        for (std::uint32_t b = 0; b < ph.bins.size(); ++b) {
            if (ph.h * ph.bins[b] != Complex(0.0))
                creation.emplace_back(registry->index({ph.spatial, Pol::H, b}), ph.h * ph.bins[b]);
            if (ph.v * ph.bins[b] != Complex(0.0))
                creation.emplace_back(registry->index({ph.spatial, Pol::V, b}), ph.v * ph.bins[b]);
        }
        PureState next(registry);
        for (const auto &[occ, amp] : state.terms()) {
            for (const auto &[mode, c] : creation) {
                Occupation o = occ;
                o[mode] += 1;
                next.add(o, amp * c * std::sqrt(static_cast<double>(o[mode])));
            }
        }
        next.prune();
        state = std::move(next);
    }
    return state.normalized();
}

namespace detail {

// Distributes the photons of each input column over its nonzero rows, each
// column contributing the multinomial n!/prod k! prod U^k.
struct Expansion {
    const std::vector<std::vector<std::pair<std::size_t, Complex>>> &columns;
    const std::vector<int> &inputs;
    std::vector<int> out;
    std::vector<std::pair<std::vector<int>, Complex>> results;

    void column(std::size_t j, Complex coeff) {
        if (j == inputs.size()) {
            results.emplace_back(out, coeff);
            return;
        }
        if (inputs[j] == 0) {
            column(j + 1, coeff);
            return;
        }
        spread(j, 0, inputs[j], coeff * factorial(inputs[j]));
    }

    void spread(std::size_t j, std::size_t row, int remaining, Complex coeff) {
        const auto &col = columns[j];
        if (remaining == 0) {
            column(j + 1, coeff);
            return;
        }
        if (row == col.size()) return;
        const auto [target, u] = col[row];
        const int kmin = (row + 1 == col.size()) ? remaining : 0;
        Complex power = std::pow(u, kmin);
        for (int k = kmin; k <= remaining; ++k) {
            out[target] += k;
            spread(j, row + 1, remaining - k, coeff * power / factorial(k));
            out[target] -= k;
            power *= u;
        }
    }
};

}  // namespace detail

/// Rewrites every ket by substituting the transform's image for each creation
/// operator on its modes and expanding multinomially.
inline PureState apply_mode_unitary(const PureState &state, const ModeTransform &t) {
    const auto k = t.modes.size();
    if (static_cast<std::size_t>(t.matrix.rows()) != k || static_cast<std::size_t>(t.matrix.cols()) != k)
        throw Error("transform matrix does not match its mode list");
    const double dev = unitarity_deviation(t.matrix);
    if (!(dev < kUnitarityTolerance)) throw Error("non-unitary transform (deviation " + std::to_string(dev) + ")");

    const auto &reg = state.registry();
    std::vector<std::size_t> global(k);
    for (std::size_t i = 0; i < k; ++i) global[i] = reg.index(t.modes[i]);

    std::vector<std::vector<std::pair<std::size_t, Complex>>> columns(k);
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t r = 0; r < k; ++r)
            if (t.matrix(r, c) != Complex(0.0)) columns[c].emplace_back(r, t.matrix(r, c));

    PureState out(state.registry_ptr());
    std::vector<int> inputs(k);
    for (const auto &[occ, amp] : state.terms()) {
        Occupation base = occ;
        double in_norm = 1.0;
        bool any = false;
        for (std::size_t i = 0; i < k; ++i) {
            inputs[i] = occ[global[i]];
            base[global[i]] = 0;
            in_norm *= factorial(inputs[i]);
            any = any || inputs[i] > 0;
        }
        if (!any) {
            out.add(occ, amp);
            continue;
        }
        detail::Expansion ex{columns, inputs, std::vector<int>(k, 0), {}};
        ex.column(0, Complex(1.0));
        const double scale = 1.0 / std::sqrt(in_norm);
        for (const auto &[counts, coeff] : ex.results) {
            Occupation o = base;
            double out_norm = 1.0;
            for (std::size_t i = 0; i < k; ++i) {
                o[global[i]] = static_cast<std::uint8_t>(counts[i]);
                out_norm *= factorial(counts[i]);
            }
            out.add(o, amp * coeff * scale * std::sqrt(out_norm));
        }
    }
    out.prune();
    return out;
}

inline Complex inner_product(const PureState &a, const PureState &b) {
    if (!(a.registry() == b.registry())) throw Error("registry mismatch in inner product");
    Complex s(0.0);
    for (const auto &[occ, amp] : a.terms()) s += std::conj(amp) * b.amplitude(occ);
    return s;
}

/// Reduces a state with exactly one photon in each of two kept spatial modes
/// to their polarization density matrix, tracing out temporal bins. Modes
/// whose spatial label is listed in `traced` are traced out as well; any
/// other occupied mode is an error.
inline PolarizationDensityMatrix partial_trace_to_polarization(const PureState &state,
                                                               const std::array<std::string, 2> &kept,
                                                               std::span<const std::string> traced = {}) {
    const auto &reg = state.registry();
    if (kept[0] == kept[1]) throw Error("kept spatial labels must differ");
    std::array<std::vector<std::size_t>, 2> kept_modes{reg.indices_of(kept[0]), reg.indices_of(kept[1])};
    std::vector<char> role(reg.size(), 0);  // 1 = kept, 2 = traced
    for (const auto &km : kept_modes)
        for (auto i : km) role[i] = 1;
    for (const auto &label : traced) {
        if (label == kept[0] || label == kept[1]) continue;
        for (auto i : reg.indices_of(label)) role[i] = 2;
    }
    if (state.empty()) throw Error("cannot reduce the zero state");

    std::map<Occupation, Vector4c> env;
    for (const auto &[occ, amp] : state.terms()) {
        std::array<int, 2> pol{};
        Occupation key = occ;
        for (int q = 0; q < 2; ++q) {
            int count = 0;
            for (auto i : kept_modes[q]) {
                if (occ[i] == 0) continue;
                count += occ[i];
                pol[q] = static_cast<int>(reg.mode(i).pol);
                key[i] = 0;
                key.push_back(static_cast<std::uint8_t>(reg.mode(i).bin));
            }
            if (count != 1) throw Error("non-qubit support: " + kept[q] + " holds " + std::to_string(count) + " photons");
        }
        for (std::size_t i = 0; i < occ.size(); ++i)
            if (occ[i] != 0 && role[i] == 0) throw Error("non-vacuum residual mode " + reg.mode(i).str());
        auto [it, inserted] = env.try_emplace(key, Vector4c::Zero());
        it->second(2 * pol[0] + pol[1]) += amp;
    }
    Matrix4c rho = Matrix4c::Zero();
    for (const auto &[key, v] : env) rho += v * v.adjoint();
    const double tr = rho.trace().real();
    if (tr <= 0.0) throw Error("cannot reduce the zero state");
    return PolarizationDensityMatrix(rho / tr);
}

}  // namespace lofsim
