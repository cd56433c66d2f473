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

// Partial distinguishability through a finite set of orthonormal temporal
// bins. A photon's internal state is a vector over bins; the overlap of two
// photons is the inner product of their vectors.

#pragma once

#include <numbers>
#include <vector>

#include "lofsim/fock.hpp"

namespace lofsim {

struct OverlapModel {
    double coherence_length_um = 200.0;
    double fringe_period_um = 0.788;

    void validate() const {
        if (!(coherence_length_um > 0.0)) throw Error("coherence length must be positive");
        if (!(fringe_period_um > 0.0)) throw Error("fringe period must be positive");
    }

    bool operator==(const OverlapModel &) const = default;
};

/// Overlap of a wavepacket with its copy displaced by `delay_um`: a Gaussian
/// envelope of 1/sqrt(e) half-width equal to the coherence length, times the
/// carrier phase.
inline Complex overlap_from_delay(double delay_um, const OverlapModel &model) {
    model.validate();
    const double l = model.coherence_length_um;
    const double envelope = std::exp(-delay_um * delay_um / (2.0 * l * l));
    return std::polar(envelope, 2.0 * std::numbers::pi * delay_um / model.fringe_period_um);
}

using Wavepacket = std::vector<Complex>;

struct PairOverlap {
    std::size_t i = 0;
    std::size_t j = 0;
    Complex value{1.0};  // <xi_i | xi_j>
};

/// Builds bin vectors for `photons` photons whose pairwise overlaps match
/// the requested ones. Unlisted pairs are taken as identical (overlap 1).
/// Photon 0 sits in bin 0; each later photon reuses the span of earlier ones
/// and opens a fresh bin only for its residual.
inline std::vector<Wavepacket> assign_wavepackets(std::size_t photons, std::span<const PairOverlap> overlaps,
                                                  std::size_t max_bins = kDefaultBins) {
    Eigen::MatrixXcd gram = Eigen::MatrixXcd::Ones(photons, photons);
    for (const auto &o : overlaps) {
        if (o.i >= photons || o.j >= photons) throw Error("overlap refers to an unknown photon");
        if (o.i == o.j) {
            if (std::abs(o.value - Complex(1.0)) > 1e-12) throw Error("self-overlap must be 1");
            continue;
        }
        if (std::abs(o.value) > 1.0 + 1e-12) throw Error("overlap magnitude exceeds 1");
        gram(o.i, o.j) = o.value;
        gram(o.j, o.i) = std::conj(o.value);
    }

    constexpr double tol = 1e-10;
    std::vector<Eigen::VectorXcd> vecs;
    std::size_t rank = 0;
    for (std::size_t k = 0; k < photons; ++k) {
        Eigen::VectorXcd c = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(rank));
        if (rank > 0) {
            // Rows are conj(c_i); solve conj(C) c_k = g_k in the least-squares sense.
            Eigen::MatrixXcd cc(k, rank);
            Eigen::VectorXcd g(k);
            for (std::size_t i = 0; i < k; ++i) {
                Eigen::VectorXcd padded = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(rank));
                padded.head(vecs[i].size()) = vecs[i];
                cc.row(i) = padded.conjugate().transpose();
                g(i) = gram(i, k);
            }
            c = cc.completeOrthogonalDecomposition().solve(g);
            if ((cc * c - g).norm() > tol) throw Error("infeasible overlap matrix (not positive semidefinite)");
        }
        const double residual = 1.0 - c.squaredNorm();
        if (residual < -tol) throw Error("infeasible overlap matrix (not positive semidefinite)");
        Eigen::VectorXcd full = c;
        if (residual > tol) {
            if (rank + 1 > max_bins) throw Error("temporal bin budget exceeded");
            full.conservativeResize(static_cast<Eigen::Index>(rank + 1));
            full(static_cast<Eigen::Index>(rank)) = std::sqrt(residual);
            ++rank;
        } else if (full.size() > 0) {
            full /= full.norm();
        }
        vecs.push_back(full);
    }

    std::vector<Wavepacket> out;
    for (const auto &v : vecs) {
        Wavepacket w(std::max<std::size_t>(rank, 1), Complex(0.0));
        for (Eigen::Index b = 0; b < v.size(); ++b) w[b] = v(b);
        if (rank == 0) w[0] = 1.0;
        out.push_back(std::move(w));
    }
    return out;
}

inline Complex wavepacket_overlap(const Wavepacket &a, const Wavepacket &b) {
    Complex s(0.0);
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

}  // namespace lofsim
