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

#pragma once

#include <iomanip>
#include <optional>
#include <set>
#include <sstream>

#include "lofsim/config.hpp"

namespace lofsim {

struct CircuitStep {
    ElementSpec spec;
    std::vector<ModeTransform> transforms;
};

/// Immutable after compile(); run() may be called concurrently.
struct Circuit {
    RegistryPtr registry;
    std::vector<PhotonSpec> sources;
    std::vector<CircuitStep> steps;
    std::map<std::string, std::string> outputs;
    std::vector<Detector> detectors;
    std::vector<HeraldPattern> heralds;
    int photon_budget = kDefaultPhotonBudget;

    const HeraldPattern &herald(const std::string &name) const {
        for (const auto &h : heralds)
            if (h.name == name) return h;
        throw Error("unknown herald '" + name + "'");
    }

    std::string display(const std::string &spatial) const {
        auto it = outputs.find(spatial);
        return it == outputs.end() ? spatial : it->second;
    }
};

struct UnitarityReport {
    bool pass = true;
    double deviation = 0.0;
};

inline UnitarityReport check_unitarity(const ModeTransform &t, double tol = kUnitarityTolerance) {
    const double d = unitarity_deviation(t.matrix);
    return {d <= tol, d};
}

/// Source polarization angle, measured from V: cos(a)|V> + sin(a)|H>.
inline std::pair<Complex, Complex> polarization_amplitudes(double angle_deg) {
    const double a = detail::deg(angle_deg);
    double h = std::sin(a), v = std::cos(a);
    if (std::abs(h) < 1e-15) h = 0.0;
    if (std::abs(v) < 1e-15) v = 0.0;
    return {h, v};
}

inline Circuit compile(const ExperimentConfig &cfg) {
    cfg.model.validate();
    std::set<std::string> labels(cfg.modes.begin(), cfg.modes.end());
    if (labels.size() != cfg.modes.size()) throw Error("duplicate spatial label in mode list");
    auto bound = [&](const std::string &l, const std::string &where) {
        if (!labels.count(l)) throw Error("unbound spatial label \"" + l + "\" in " + where);
    };

    std::set<std::string> loss, fed;
    for (const auto &s : cfg.sources) {
        bound(s.spatial, "sources");
        fed.insert(s.spatial);
    }
    std::size_t delays = 0;
    for (std::size_t i = 0; i < cfg.elements.size(); ++i) {
        const auto &e = cfg.elements[i];
        const std::string where = "element " + std::to_string(i) + " (" + kind_name(e.kind) + ")";
        for (const auto &s : e.spatial) bound(s, where);
        if (e.kind == ElementKind::Polarizer) {
            bound(e.loss, where);
            if (!loss.insert(e.loss).second) throw Error("duplicate loss label \"" + e.loss + "\"");
            if (fed.count(e.loss)) throw Error("loss label \"" + e.loss + "\" does not start in vacuum");
        }
        if (e.kind == ElementKind::Delay) ++delays;
    }

    std::vector<PairOverlap> overlaps;
    for (const auto &o : cfg.overlaps)
        for (auto [i, j] : o.pairs) overlaps.push_back({i, j, o.value});
    const auto packets = assign_wavepackets(cfg.sources.size(), overlaps, kDefaultBins);
    const std::size_t base = packets.empty() ? 1 : packets.front().size();
    const std::size_t bins = base + delays;
    if (bins > kDefaultBins)
        throw Error("temporal bin budget exceeded: " + std::to_string(bins) + " > " + std::to_string(kDefaultBins));

    Circuit c;
    c.registry = make_registry(cfg.modes, bins);
    c.photon_budget = cfg.photon_budget;
    c.outputs = cfg.outputs;
    c.detectors = cfg.detectors;
    for (std::size_t i = 0; i < cfg.sources.size(); ++i) {
        auto [h, v] = polarization_amplitudes(cfg.sources[i].angle_deg);
        c.sources.push_back({cfg.sources[i].spatial, h, v, packets[i]});
    }

    LoweringContext ctx{bins, cfg.convention, cfg.model, base};
    for (const auto &e : cfg.elements) {
        CircuitStep step{e, lower_element(e, ctx)};
        for (const auto &t : step.transforms) {
            auto r = check_unitarity(t);
            if (!r.pass) throw Error(std::string("non-unitary transform from ") + kind_name(e.kind));
        }
        if (e.kind == ElementKind::Delay) ++ctx.spare_bin;
        c.steps.push_back(std::move(step));
    }

    for (const auto &d : cfg.detectors) bound(d.spatial, "detector " + d.name);
    for (const auto &h : cfg.heralds) {
        HeraldPattern p{h.name, cfg.detectors, std::vector<int>(cfg.detectors.size(), 0)};
        for (const auto &[name, n] : h.counts) {
            auto it = std::find_if(cfg.detectors.begin(), cfg.detectors.end(),
                                   [&](const Detector &d) { return d.name == name; });
            if (it == cfg.detectors.end()) throw Error("herald '" + h.name + "' names unknown detector " + name);
            p.counts[static_cast<std::size_t>(it - cfg.detectors.begin())] = n;
        }
        p.validate();
        c.heralds.push_back(std::move(p));
    }
    return c;
}

/// Prepares the sources and applies the steps in order. `halt_after` stops
/// after that many configured elements.
inline PureState run(const Circuit &c, std::optional<std::size_t> halt_after = std::nullopt) {
    PureState s = prepare_product_state(c.registry, c.sources, c.photon_budget);
    const std::size_t n = std::min(c.steps.size(), halt_after.value_or(c.steps.size()));
    for (std::size_t i = 0; i < n; ++i)
        for (const auto &t : c.steps[i].transforms) s = apply_mode_unitary(s, t);
    const double norm = s.norm_squared();
    if (std::abs(norm - 1.0) > 1e-10) throw Error("output state lost normalization: " + std::to_string(norm));
    return s;
}

/// Occupation key such as "A1/H/0:1 A2/V/0:2"; vacuum is "vac".
inline std::string occupation_key(const ModeRegistry &reg, const Occupation &occ,
                                  const std::map<std::string, std::string> &rename = {}) {
    std::string key;
    for (std::size_t i = 0; i < occ.size(); ++i) {
        if (occ[i] == 0) continue;
        ModeId m = reg.mode(i);
        if (auto it = rename.find(m.spatial); it != rename.end()) m.spatial = it->second;
        if (!key.empty()) key += ' ';
        key += m.str() + ":" + std::to_string(occ[i]);
    }
    return key.empty() ? "vac" : key;
}

/// Amplitude listing in registry order: occupation key -> [re, im].
inline json amplitude_dump(const PureState &s, const std::map<std::string, std::string> &rename = {}) {
    json j = json::object();
    for (const auto &[occ, amp] : s.terms()) j[occupation_key(s.registry(), occ, rename)] = {amp.real(), amp.imag()};
    return j;
}

}  // namespace lofsim
