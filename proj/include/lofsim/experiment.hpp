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

// Built-in experiment topologies, observable evaluation and parameter scans.

#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "lofsim/circuit.hpp"

namespace lofsim {

// ---- built-in configurations ----------------------------------------------

/// Four single photons at 45 deg, two PBSs and the rotated PBS, with
/// polarization-resolving detectors behind the fusion outputs.
inline ExperimentConfig pbs_fusion(PbsConvention convention = PbsConvention::Permutation) {
    ExperimentConfig c;
    c.name = "pbs_fusion";
    c.convention = convention;
    c.modes = {"A1", "A2", "B1", "B2"};
    c.sources = {{"A1", 45.0}, {"A2", 45.0}, {"B1", 45.0}, {"B2", 45.0}};
    c.elements = {
        {.kind = ElementKind::PBS, .spatial = {"A1", "A2"}},
        {.kind = ElementKind::PBS, .spatial = {"B1", "B2"}},
        {.kind = ElementKind::RPBS, .spatial = {"A2", "B2"}, .angle_deg = 22.5},
    };
    c.outputs = {{"A1", "A1'"}, {"A2", "A2'"}, {"B1", "B1'"}, {"B2", "B2'"}};
    c.detectors = {{"D1h", "A2", Pol::H}, {"D1v", "A2", Pol::V}, {"D2h", "B2", Pol::H},
                   {"D2v", "B2", Pol::V}, {"D3", "A1", std::nullopt}, {"D4", "B1", std::nullopt}};
    auto pattern = [](std::string name, const char *d1, const char *d2) {
        return HeraldSpec{std::move(name), {{d1, 1}, {d2, 1}, {"D3", 1}, {"D4", 1}}};
    };
    c.heralds = {pattern("hh", "D1h", "D2h"), pattern("hv", "D1h", "D2v"), pattern("vh", "D1v", "D2h"),
                 pattern("vv", "D1v", "D2v")};
    c.analysis = AnalysisSpec{{"A1", "B1"}, "hh", "phi+"};
    c.analyzers = {{0.0, 22.5}, {0.0, 67.5}, {45.0, 22.5}, {45.0, 67.5}};
    return c;
}

/// Demonstration variant: 0 deg polarizers replace the detection PBSs and a
/// fourfold coincidence heralds. `pair_overlap` is the wavepacket overlap of
/// the photons meeting at each first PBS, `fusion_overlap` that of the A and
/// B photons meeting at the rotated PBS (tensor-product wavepacket model).
inline ExperimentConfig polarizer_fusion(double pair_overlap = 1.0, double fusion_overlap = 1.0,
                                     PbsConvention convention = PbsConvention::Permutation) {
    ExperimentConfig c;
    c.name = "polarizer_fusion";
    c.convention = convention;
    c.modes = {"A1", "A2", "B1", "B2", "LA", "LB"};
    c.sources = {{"A1", 45.0}, {"A2", 45.0}, {"B1", 45.0}, {"B2", 45.0}};
    // photon order: 0 = A1, 1 = A2, 2 = B1, 3 = B2
    if (pair_overlap == 1.0) {
        c.overlaps = {{{{0, 2}, {1, 3}, {0, 3}, {1, 2}}, fusion_overlap}};
    } else {
        c.overlaps = {{{{0, 2}, {1, 3}}, fusion_overlap},
                      {{{0, 1}, {2, 3}}, pair_overlap},
                      {{{0, 3}, {1, 2}}, pair_overlap * fusion_overlap}};
    }
    c.elements = {
        {.kind = ElementKind::PBS, .spatial = {"A1", "A2"}},
        {.kind = ElementKind::PBS, .spatial = {"B1", "B2"}},
        {.kind = ElementKind::RPBS, .spatial = {"A2", "B2"}, .angle_deg = 22.5},
        {.kind = ElementKind::Polarizer, .spatial = {"A2"}, .angle_deg = 0.0, .loss = "LA"},
        {.kind = ElementKind::Polarizer, .spatial = {"B2"}, .angle_deg = 0.0, .loss = "LB"},
    };
    c.outputs = {{"A1", "A1'"}, {"A2", "A2'"}, {"B1", "B1'"}, {"B2", "B2'"}};
    c.detectors = {{"D1", "A2", std::nullopt}, {"D2", "B2", std::nullopt}, {"D3", "A1", std::nullopt},
                   {"D4", "B1", std::nullopt}, {"LA", "LA", std::nullopt}, {"LB", "LB", std::nullopt}};
    c.heralds = {{"fourfold", {{"D1", 1}, {"D2", 1}, {"D3", 1}, {"D4", 1}}}};
    c.analysis = AnalysisSpec{{"A1", "B1"}, "fourfold", "phi+"};
    c.analyzers = {{0.0, 22.5}, {0.0, 67.5}, {45.0, 22.5}, {45.0, 67.5}};
    return c;
}

/// Two photons at 45 deg meeting at the first PBS after a path delay, read
/// out behind 45 / 135 deg polarizers. `visibility` is the peak dip depth
/// (the squared residual mode overlap).
inline ExperimentConfig hom_first_pbs(double visibility = 0.94,
                                      PbsConvention convention = PbsConvention::Permutation) {
    if (!(visibility >= 0.0 && visibility <= 1.0)) throw Error("visibility outside [0, 1]");
    ExperimentConfig c;
    c.name = "hom_first_pbs";
    c.convention = convention;
    c.modes = {"A1", "A2", "L1", "L2"};
    c.sources = {{"A1", 45.0}, {"A2", 45.0}};
    c.elements = {
        {.kind = ElementKind::Delay, .spatial = {"A2"}, .delay_um = 0.0, .mode_overlap = std::sqrt(visibility)},
        {.kind = ElementKind::PBS, .spatial = {"A1", "A2"}},
        {.kind = ElementKind::Polarizer, .spatial = {"A1"}, .angle_deg = 45.0, .loss = "L1"},
        {.kind = ElementKind::Polarizer, .spatial = {"A2"}, .angle_deg = 135.0, .loss = "L2"},
    };
    c.outputs = {{"A1", "A1'"}, {"A2", "A2'"}};
    c.detectors = {{"DA", "A1", std::nullopt}, {"DB", "A2", std::nullopt}};
    c.heralds = {{"coincidence", {{"DA", 1}, {"DB", 1}}}};
    return c;
}

/// Alignment mode of the fusion stage: a bunched H/V pair split at a
/// beamsplitter, one arm delayed, the rotated PBS with its input plates at
/// 0 deg, and twofold detection behind 0 deg polarizers that follow the
/// output plates. `visibility` is the fringe visibility at zero delay.
inline ExperimentConfig fusion_alignment(double visibility = 0.9,
                                         PbsConvention convention = PbsConvention::Permutation) {
    if (!(visibility >= 0.0 && visibility <= 1.0)) throw Error("visibility outside [0, 1]");
    ExperimentConfig c;
    c.name = "fusion_alignment";
    c.convention = convention;
    c.modes = {"A2", "B2", "LA", "LB"};
    c.sources = {{"A2", 90.0}, {"A2", 0.0}};
    c.elements = {
        {.kind = ElementKind::BeamSplitter, .spatial = {"A2", "B2"}, .transmissivity = 0.5},
        {.kind = ElementKind::Delay, .spatial = {"B2"}, .delay_um = 0.0, .mode_overlap = std::sqrt(visibility)},
        {.kind = ElementKind::RPBS, .spatial = {"A2", "B2"}, .angle_deg = 0.0},
        {.kind = ElementKind::Polarizer, .spatial = {"A2"}, .angle_deg = 0.0, .loss = "LA"},
        {.kind = ElementKind::Polarizer, .spatial = {"B2"}, .angle_deg = 0.0, .loss = "LB"},
    };
    c.outputs = {{"A2", "A2'"}, {"B2", "B2'"}};
    c.detectors = {{"D1", "A2", std::nullopt}, {"D2", "B2", std::nullopt}};
    c.heralds = {{"twofold", {{"D1", 1}, {"D2", 1}}}};
    return c;
}

/// Two photons on a beamsplitter with a chosen overlap; used for the
/// coincidence-versus-overlap check.
inline ExperimentConfig hom_beamsplitter(Complex overlap, double transmissivity = 0.5) {
    ExperimentConfig c;
    c.name = "hom_beamsplitter";
    c.modes = {"a", "b"};
    c.sources = {{"a", 90.0}, {"b", 90.0}};
    c.overlaps = {{{{0, 1}}, overlap}};
    c.elements = {{.kind = ElementKind::BeamSplitter, .spatial = {"a", "b"}, .transmissivity = transmissivity}};
    c.detectors = {{"Da", "a", std::nullopt}, {"Db", "b", std::nullopt}};
    c.heralds = {{"coincidence", {{"Da", 1}, {"Db", 1}}}};
    return c;
}

// ---- observables ----------------------------------------------------------

inline PolarizationDensityMatrix heralded_state(const Circuit &c, const PureState &out, const AnalysisSpec &a,
                                                double *probability = nullptr) {
    return heralded_pair(out, c.herald(a.herald), a.kept, probability);
}

inline double herald_probability(const PureState &out, const HeraldPattern &p) {
    const auto modes = detail::detector_modes(out.registry(), p.detectors);
    double prob = 0.0;
    for (const auto &[occ, amp] : out.terms())
        if (detail::read(occ, modes) == p.counts) prob += std::norm(amp);
    return prob;
}

/// Best-matching Bell state and its fidelity.
inline std::pair<BellState, double> closest_bell(const PolarizationDensityMatrix &rho) {
    BellState best = BellState::PhiPlus;
    double f = -1.0;
    for (auto b : {BellState::PhiPlus, BellState::PhiMinus, BellState::PsiPlus, BellState::PsiMinus}) {
        const double x = fidelity(rho, bell_vector(b));
        if (x > f + 1e-12) {
            f = x;
            best = b;
        }
    }
    return {best, f};
}

using Observables = std::vector<std::pair<std::string, double>>;

/// Named scalar results of one configuration: herald probabilities, then
/// heralded-pair figures and analyzer correlations when an analysis block
/// is present.
inline Observables evaluate(const ExperimentConfig &cfg) {
    const Circuit c = compile(cfg);
    const PureState out = run(c);
    Observables obs;
    for (const auto &h : c.heralds) obs.emplace_back("p_" + h.name, herald_probability(out, h));
    if (cfg.analysis) {
        double p = 0.0;
        const auto rho = heralded_state(c, out, *cfg.analysis, &p);
        obs.emplace_back("fidelity", fidelity(rho, bell_vector(parse_bell(cfg.analysis->target))));
        obs.emplace_back("concurrence", concurrence(rho));
        for (std::size_t i = 0; i < cfg.analyzers.size(); ++i) {
            const auto &s = cfg.analyzers[i];
            const auto pr = analyzer_probabilities(rho, s.a, s.b);
            obs.emplace_back("E_" + std::to_string(i), pr[0] + pr[3] - pr[1] - pr[2]);
            obs.emplace_back("pp_" + std::to_string(i), pr[0]);
        }
    }
    return obs;
}

// ---- scans ----------------------------------------------------------------

struct ScanSpec {
    std::string path;  // JSON pointer into the canonical config
    double start = 0.0;
    double stop = 0.0;
    double step = 0.0;

    std::vector<double> points() const {
        if (!(step > 0.0) || !(stop >= start)) throw Error("empty range " + describe());
        const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        if (n < 2) throw Error("empty range " + describe() + " (needs at least 2 points)");
        std::vector<double> x(n);
        for (std::size_t i = 0; i < n; ++i) x[i] = start + static_cast<double>(i) * step;
        return x;
    }

    std::string describe() const {
        std::ostringstream os;
        os << path << "=" << start << ":" << stop << ":" << step;
        return os.str();
    }
};

/// Parses "PATH=START:STOP:STEP".
inline ScanSpec parse_scan(const std::string &text) {
    const auto eq = text.rfind('=');
    if (eq == std::string::npos || eq == 0) throw Error("scan spec must be PATH=START:STOP:STEP, got '" + text + "'");
    ScanSpec s;
    s.path = text.substr(0, eq);
    if (s.path.front() != '/') s.path = "/" + s.path;
    std::vector<double> v;
    std::stringstream ss(text.substr(eq + 1));
    std::string part;
    while (std::getline(ss, part, ':')) {
        try {
            std::size_t used = 0;
            v.push_back(std::stod(part, &used));
            if (used != part.size()) throw std::invalid_argument(part);
        } catch (const std::exception &) {
            throw Error("scan range component '" + part + "' is not a number");
        }
    }
    if (v.size() != 3) throw Error("scan range must be START:STOP:STEP, got '" + text.substr(eq + 1) + "'");
    s.start = v[0];
    s.stop = v[1];
    s.step = v[2];
    return s;
}

/// Copy of `cfg` with the numeric field at `path` set to `value`.
inline ExperimentConfig with_parameter(const ExperimentConfig &cfg, const std::string &path, double value) {
    json j = to_json(cfg);
    json::json_pointer ptr;
    try {
        ptr = json::json_pointer(path);
    } catch (const json::exception &) {
        throw Error("malformed parameter path '" + path + "'");
    }
    if (!j.contains(ptr)) throw Error("parameter path '" + path + "' does not exist");
    json &target = j[ptr];
    if (target.is_array() && target.size() == 2 && target[0].is_number() && target[1].is_number())
        target[0] = value;  // complex overlap: scan the real part
    else if (target.is_number())
        target = value;
    else
        throw Error("non-numeric target at '" + path + "'");
    return config_from_json(j);
}

struct ScanTable {
    std::vector<std::string> columns;  // "x" followed by observable names
    std::vector<std::vector<double>> rows;
};

inline ScanTable scan(const ExperimentConfig &cfg, const ScanSpec &spec) {
    const auto xs = spec.points();
    with_parameter(cfg, spec.path, xs.front());  // surfaces path errors before any work
    ScanTable t;
    for (double x : xs) {
        const auto obs = evaluate(with_parameter(cfg, spec.path, x));
        if (t.columns.empty()) {
            t.columns.push_back("x");
            for (const auto &[k, v] : obs) t.columns.push_back(k);
        }
        std::vector<double> row{x};
        for (const auto &[k, v] : obs) row.push_back(v);
        t.rows.push_back(std::move(row));
    }
    return t;
}

// ---- correlation-curve calibration -----------------------------------------

/// Exact visibilities of the heralded-pair coincidence curves versus the A
/// analyzer angle, with the B analyzer at 0 and 45 deg.
inline std::pair<double, double> correlation_visibilities(const ExperimentConfig &cfg) {
    if (!cfg.analysis) throw Error("correlation curves need an analysis block");
    const Circuit c = compile(cfg);
    const auto rho = heralded_state(c, run(c), *cfg.analysis);
    auto vis = [&](double b) {
        std::vector<CurvePoint> curve;
        for (int a = 0; a <= 180; a += 10) curve.push_back({double(a), analyzer_probabilities(rho, a, b)[0]});
        return visibility(curve, 180.0).visibility;
    };
    return {vis(0.0), vis(45.0)};
}

/// Finds the (pair, fusion) overlaps for which both correlation curves of
/// the demonstration variant have visibility `target`.
inline std::pair<double, double> calibrate_overlaps(double target,
                                                    PbsConvention convention = PbsConvention::Permutation) {
    if (!(target > 0.0 && target <= 1.0)) throw Error("target visibility outside (0, 1]");
    if (target == 1.0) return {1.0, 1.0};
    auto residual = [&](double vp, double vf) {
        auto [v0, v45] = correlation_visibilities(polarizer_fusion(vp, vf, convention));
        return Eigen::Vector2d(v0 - target, v45 - target);
    };
    Eigen::Vector2d x(1.0 - (1.0 - target) / 5.5, std::sqrt(target));
    Eigen::Vector2d r = residual(x(0), x(1));
    const double h = 1e-7;
    for (int iter = 0; iter < 40 && r.cwiseAbs().maxCoeff() > 1e-13; ++iter) {
        Eigen::Matrix2d jac;
        for (int k = 0; k < 2; ++k) {
            Eigen::Vector2d xs = x;
            xs(k) -= h;  // step inward, the box is [0, 1]
            jac.col(k) = (r - residual(xs(0), xs(1))) / h;
        }
        Eigen::Vector2d dx = jac.fullPivLu().solve(-r);
        double lambda = 1.0;
        for (int back = 0; back < 30; ++back, lambda /= 2.0) {
            Eigen::Vector2d nx = (x + lambda * dx).cwiseMax(1e-6).cwiseMin(1.0);
            Eigen::Vector2d nr = residual(nx(0), nx(1));
            if (nr.norm() < r.norm()) {
                x = nx;
                r = nr;
                break;
            }
        }
    }
    if (r.cwiseAbs().maxCoeff() > 1e-10) throw Error("overlap calibration did not converge for visibility target");
    return {x(0), x(1)};
}

/// Rounds to 12 decimals so that built-in configs serialize to short,
/// stable numbers.
inline double round12(double x) { return std::round(x * 1e12) / 1e12; }

inline ExperimentConfig polarizer_fusion_at_visibility(double target, PbsConvention convention = PbsConvention::Permutation) {
    auto [vp, vf] = calibrate_overlaps(target, convention);
    auto cfg = polarizer_fusion(round12(vp), round12(vf), convention);
    return cfg;
}

}  // namespace lofsim
