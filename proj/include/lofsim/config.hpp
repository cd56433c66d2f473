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

// Experiment configuration: JSON ingestion with full violation reporting,
// and serialization back to canonical JSON.

#pragma once

#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lofsim/distinguishability.hpp"
#include "lofsim/elements.hpp"
#include "lofsim/measurement.hpp"

namespace lofsim {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct SourceSpec {
    std::string spatial;
    double angle_deg = 45.0;

    bool operator==(const SourceSpec &) const = default;
};

/// One overlap value applied to every listed photon pair.
struct OverlapSpec {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    Complex value{1.0};

    bool operator==(const OverlapSpec &) const = default;
};

struct HeraldSpec {
    std::string name;
    std::map<std::string, int> counts;  // detector name -> exact count; unlisted detectors require 0

    bool operator==(const HeraldSpec &) const = default;
};

struct AnalysisSpec {
    std::array<std::string, 2> kept;
    std::string herald;
    std::string target = "phi+";

    bool operator==(const AnalysisSpec &) const = default;
};

struct AnalyzerSetting {
    double a = 0.0;
    double b = 0.0;

    bool operator==(const AnalyzerSetting &) const = default;
};

struct SamplingSpec {
    std::uint64_t shots = 0;
    std::uint64_t seed = 0;

    bool operator==(const SamplingSpec &) const = default;
};

struct ExperimentConfig {
    int schema_version = kSchemaVersion;
    std::string name;
    PbsConvention convention = PbsConvention::Permutation;
    OverlapModel model{};
    int photon_budget = kDefaultPhotonBudget;
    std::vector<std::string> modes;  // spatial labels of the registry
    std::vector<SourceSpec> sources;
    std::vector<OverlapSpec> overlaps;
    std::vector<ElementSpec> elements;
    std::map<std::string, std::string> outputs;  // display relabeling only
    std::vector<Detector> detectors;
    std::vector<HeraldSpec> heralds;
    std::optional<AnalysisSpec> analysis;
    std::vector<AnalyzerSetting> analyzers;
    std::optional<SamplingSpec> sampling;

    bool operator==(const ExperimentConfig &) const = default;
};

/// Raised by parse_config; carries every violation found, each prefixed
/// with the JSON pointer of the offending field.
class ConfigError : public Error {
   public:
    explicit ConfigError(std::vector<std::string> violations)
        : Error(join(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string> &violations() const { return violations_; }

   private:
    static std::string join(const std::vector<std::string> &v) {
        std::string s = "invalid config (" + std::to_string(v.size()) + " violation(s))";
        for (const auto &x : v) s += "\n  " + x;
        return s;
    }
    std::vector<std::string> violations_;
};

namespace detail {

class Checker {
   public:
    std::vector<std::string> errors;

    void fail(const std::string &path, const std::string &msg) { errors.push_back(path + ": " + msg); }

    static std::string type_of(const json &j) { return j.type_name(); }

    const json *field(const json &obj, const std::string &key, const std::string &path, bool required) {
        if (!obj.is_object()) return nullptr;
        auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) fail(path + "/" + key, "required field missing");
            return nullptr;
        }
        return &*it;
    }

    std::optional<double> number(const json &obj, const std::string &key, const std::string &path, bool required) {
        const json *j = field(obj, key, path, required);
        if (!j) return std::nullopt;
        if (!j->is_number()) {
            fail(path + "/" + key, "expected number, got " + type_of(*j) + " " + j->dump());
            return std::nullopt;
        }
        return j->get<double>();
    }

    std::optional<std::int64_t> integer(const json &obj, const std::string &key, const std::string &path,
                                        bool required) {
        const json *j = field(obj, key, path, required);
        if (!j) return std::nullopt;
        if (!j->is_number_integer()) {
            fail(path + "/" + key, "expected integer, got " + type_of(*j) + " " + j->dump());
            return std::nullopt;
        }
        return j->get<std::int64_t>();
    }

    std::optional<std::string> string(const json &obj, const std::string &key, const std::string &path,
                                      bool required) {
        const json *j = field(obj, key, path, required);
        if (!j) return std::nullopt;
        if (!j->is_string()) {
            fail(path + "/" + key, "expected string, got " + type_of(*j) + " " + j->dump());
            return std::nullopt;
        }
        return j->get<std::string>();
    }

    const json *array(const json &obj, const std::string &key, const std::string &path, bool required) {
        const json *j = field(obj, key, path, required);
        if (!j) return nullptr;
        if (!j->is_array()) {
            fail(path + "/" + key, "expected array, got " + type_of(*j));
            return nullptr;
        }
        return j;
    }

    std::optional<Complex> complex(const json &obj, const std::string &key, const std::string &path, bool required) {
        const json *j = field(obj, key, path, required);
        if (!j) return std::nullopt;
        if (j->is_number()) return Complex(j->get<double>());
        if (j->is_array() && j->size() == 2 && (*j)[0].is_number() && (*j)[1].is_number())
            return Complex((*j)[0].get<double>(), (*j)[1].get<double>());
        fail(path + "/" + key, "expected number or [re, im], got " + j->dump());
        return std::nullopt;
    }

    void object_keys(const json &obj, const std::string &path, std::initializer_list<const char *> allowed) {
        if (!obj.is_object()) {
            fail(path.empty() ? "/" : path, "expected object, got " + type_of(obj));
            return;
        }
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            bool ok = false;
            for (const char *a : allowed) ok = ok || it.key() == a;
            if (!ok) fail(path + "/" + it.key(), "unknown field");
        }
    }
};

inline std::optional<Pol> parse_pol(const std::string &s) {
    if (s == "H") return Pol::H;
    if (s == "V") return Pol::V;
    return std::nullopt;
}

}  // namespace detail

/// Parses and validates a config document. Collects every violation before
/// throwing ConfigError.
inline ExperimentConfig config_from_json(const json &doc) {
    detail::Checker ck;
    ExperimentConfig cfg;
    ck.object_keys(doc, "", {"schema_version", "name", "convention", "model", "photon_budget", "modes", "sources",
                             "overlaps", "elements", "outputs", "detectors", "heralds", "analysis", "analyzers",
                             "sampling"});
    if (!doc.is_object()) throw ConfigError(ck.errors);

    if (auto v = ck.integer(doc, "schema_version", "", true); v && *v != kSchemaVersion)
        ck.fail("/schema_version", "unsupported schema version " + std::to_string(*v));
    if (auto v = ck.string(doc, "name", "", false)) cfg.name = *v;
    if (auto v = ck.string(doc, "convention", "", false)) {
        if (*v == "perm" || *v == "i-reflect")
            cfg.convention = parse_convention(*v);
        else
            ck.fail("/convention", "expected \"perm\" or \"i-reflect\", got \"" + *v + "\"");
    }
    if (auto v = ck.integer(doc, "photon_budget", "", false)) {
        if (*v < 1)
            ck.fail("/photon_budget", "must be positive");
        else
            cfg.photon_budget = static_cast<int>(*v);
    }
    if (const json *m = ck.field(doc, "model", "", false)) {
        ck.object_keys(*m, "/model", {"coherence_length_um", "fringe_period_um"});
        if (auto v = ck.number(*m, "coherence_length_um", "/model", false)) {
            if (*v <= 0) ck.fail("/model/coherence_length_um", "must be positive");
            cfg.model.coherence_length_um = *v;
        }
        if (auto v = ck.number(*m, "fringe_period_um", "/model", false)) {
            if (*v <= 0) ck.fail("/model/fringe_period_um", "must be positive");
            cfg.model.fringe_period_um = *v;
        }
    }

    if (const json *m = ck.array(doc, "modes", "", true)) {
        for (std::size_t i = 0; i < m->size(); ++i) {
            if (!(*m)[i].is_string())
                ck.fail("/modes/" + std::to_string(i), "expected string, got " + (*m)[i].dump());
            else
                cfg.modes.push_back((*m)[i].get<std::string>());
        }
    }
    std::set<std::string> labels(cfg.modes.begin(), cfg.modes.end());
    if (labels.size() != cfg.modes.size()) ck.fail("/modes", "duplicate spatial label");
    auto check_label = [&](const std::string &label, const std::string &path) {
        if (!labels.count(label)) ck.fail(path, "dangling label \"" + label + "\" (not in /modes)");
    };

    if (const json *arr = ck.array(doc, "sources", "", true)) {
        for (std::size_t i = 0; i < arr->size(); ++i) {
            const std::string p = "/sources/" + std::to_string(i);
            const json &s = (*arr)[i];
            ck.object_keys(s, p, {"spatial", "angle"});
            SourceSpec src;
            if (auto v = ck.string(s, "spatial", p, true)) {
                src.spatial = *v;
                check_label(*v, p + "/spatial");
            }
            if (auto v = ck.number(s, "angle", p, false)) src.angle_deg = *v;
            cfg.sources.push_back(src);
        }
        if (static_cast<int>(cfg.sources.size()) > cfg.photon_budget)
            ck.fail("/sources", "photon budget exceeded (" + std::to_string(cfg.sources.size()) + " > " +
                                    std::to_string(cfg.photon_budget) + ")");
    }

    if (const json *arr = ck.array(doc, "overlaps", "", false)) {
        for (std::size_t i = 0; i < arr->size(); ++i) {
            const std::string p = "/overlaps/" + std::to_string(i);
            const json &o = (*arr)[i];
            ck.object_keys(o, p, {"pairs", "value"});
            OverlapSpec spec;
            if (const json *pairs = ck.array(o, "pairs", p, true)) {
                for (std::size_t k = 0; k < pairs->size(); ++k) {
                    const json &pr = (*pairs)[k];
                    auto index = [](const json &x) { return x.is_number_integer() && x.get<long long>() >= 0; };
                    if (!pr.is_array() || pr.size() != 2 || !index(pr[0]) || !index(pr[1])) {
                        ck.fail(p + "/pairs/" + std::to_string(k), "expected [i, j] photon indices");
                        continue;
                    }
                    auto a = pr[0].get<std::size_t>(), b = pr[1].get<std::size_t>();
                    if (a >= cfg.sources.size() || b >= cfg.sources.size())
                        ck.fail(p + "/pairs/" + std::to_string(k), "photon index out of range");
                    spec.pairs.emplace_back(a, b);
                }
            }
            if (auto v = ck.complex(o, "value", p, true)) {
                if (std::abs(*v) > 1.0 + 1e-12) ck.fail(p + "/value", "overlap magnitude exceeds 1");
                spec.value = *v;
            }
            cfg.overlaps.push_back(spec);
        }
    }

    std::set<std::string> loss_labels;
    if (const json *arr = ck.array(doc, "elements", "", true)) {
        for (std::size_t i = 0; i < arr->size(); ++i) {
            const std::string p = "/elements/" + std::to_string(i);
            const json &e = (*arr)[i];
            ck.object_keys(e, p,
                           {"kind", "spatial", "angle", "phase", "pol", "transmissivity", "delay_um", "mode_overlap",
                            "loss"});
            ElementSpec el;
            auto kind_s = ck.string(e, "kind", p, true);
            std::optional<ElementKind> kind;
            if (kind_s) {
                kind = parse_kind(*kind_s);
                if (!kind) ck.fail(p + "/kind", "unknown element kind \"" + *kind_s + "\"");
            }
            if (kind) el.kind = *kind;
            if (const json *sp = ck.array(e, "spatial", p, true)) {
                for (std::size_t k = 0; k < sp->size(); ++k) {
                    if (!(*sp)[k].is_string()) {
                        ck.fail(p + "/spatial/" + std::to_string(k), "expected string");
                        continue;
                    }
                    el.spatial.push_back((*sp)[k].get<std::string>());
                    check_label(el.spatial.back(), p + "/spatial/" + std::to_string(k));
                }
                if (kind) {
                    const std::size_t want = is_two_port(*kind) ? 2 : 1;
                    if (el.spatial.size() != want)
                        ck.fail(p + "/spatial", std::string(kind_name(*kind)) + " binds exactly " +
                                                    std::to_string(want) + " label(s)");
                    else if (want == 2 && el.spatial[0] == el.spatial[1])
                        ck.fail(p + "/spatial", "two-port element needs distinct labels");
                }
            }
            if (kind == ElementKind::RPBS) el.angle_deg = 22.5;
            if (auto v = ck.number(e, "angle", p, kind == ElementKind::HWP || kind == ElementKind::Polarizer))
                el.angle_deg = *v;
            if (auto v = ck.number(e, "phase", p, kind == ElementKind::Phase)) el.phase_rad = *v;
            if (auto v = ck.string(e, "pol", p, false)) {
                el.pol = detail::parse_pol(*v);
                if (!el.pol) ck.fail(p + "/pol", "expected \"H\" or \"V\"");
            }
            if (auto v = ck.number(e, "transmissivity", p, false)) {
                if (*v < 0.0 || *v > 1.0) ck.fail(p + "/transmissivity", "outside [0, 1]");
                el.transmissivity = *v;
            }
            if (auto v = ck.number(e, "delay_um", p, kind == ElementKind::Delay)) el.delay_um = *v;
            if (auto v = ck.number(e, "mode_overlap", p, false)) {
                if (*v < 0.0 || *v > 1.0) ck.fail(p + "/mode_overlap", "outside [0, 1]");
                el.mode_overlap = *v;
            }
            if (auto v = ck.string(e, "loss", p, kind == ElementKind::Polarizer)) {
                el.loss = *v;
                check_label(*v, p + "/loss");
                if (!loss_labels.insert(*v).second) ck.fail(p + "/loss", "duplicate loss label \"" + *v + "\"");
                for (const auto &s : cfg.sources)
                    if (s.spatial == *v) ck.fail(p + "/loss", "loss label \"" + *v + "\" is fed by a source");
                if (!el.spatial.empty() && el.spatial[0] == *v) ck.fail(p + "/loss", "loss label equals its input");
            }
            cfg.elements.push_back(el);
        }
    }

    if (const json *o = ck.field(doc, "outputs", "", false)) {
        if (!o->is_object())
            ck.fail("/outputs", "expected object");
        else
            for (auto it = o->begin(); it != o->end(); ++it) {
                check_label(it.key(), "/outputs/" + it.key());
                if (!it->is_string())
                    ck.fail("/outputs/" + it.key(), "expected string");
                else
                    cfg.outputs[it.key()] = it->get<std::string>();
            }
    }

    std::set<std::string> detector_names;
    if (const json *arr = ck.array(doc, "detectors", "", false)) {
        for (std::size_t i = 0; i < arr->size(); ++i) {
            const std::string p = "/detectors/" + std::to_string(i);
            const json &d = (*arr)[i];
            ck.object_keys(d, p, {"name", "spatial", "pol"});
            Detector det;
            if (auto v = ck.string(d, "name", p, true)) {
                det.name = *v;
                if (!detector_names.insert(*v).second) ck.fail(p + "/name", "duplicate detector name");
            }
            if (auto v = ck.string(d, "spatial", p, true)) {
                det.spatial = *v;
                check_label(*v, p + "/spatial");
            }
            if (auto v = ck.string(d, "pol", p, false)) {
                det.pol = detail::parse_pol(*v);
                if (!det.pol) ck.fail(p + "/pol", "expected \"H\" or \"V\"");
            }
            cfg.detectors.push_back(det);
        }
    }

    std::set<std::string> herald_names;
    if (const json *arr = ck.array(doc, "heralds", "", false)) {
        for (std::size_t i = 0; i < arr->size(); ++i) {
            const std::string p = "/heralds/" + std::to_string(i);
            const json &h = (*arr)[i];
            ck.object_keys(h, p, {"name", "counts"});
            HeraldSpec hs;
            if (auto v = ck.string(h, "name", p, true)) {
                hs.name = *v;
                if (!herald_names.insert(*v).second) ck.fail(p + "/name", "duplicate herald name");
            }
            if (const json *c = ck.field(h, "counts", p, true)) {
                if (!c->is_object()) {
                    ck.fail(p + "/counts", "expected object");
                } else {
                    bool positive = false;
                    for (auto it = c->begin(); it != c->end(); ++it) {
                        const std::string cp = p + "/counts/" + it.key();
                        if (!detector_names.count(it.key())) ck.fail(cp, "dangling label \"" + it.key() + "\" (no such detector)");
                        if (!it->is_number_integer() || it->get<int>() < 0) {
                            ck.fail(cp, "expected non-negative integer, got " + it->dump());
                            continue;
                        }
                        positive = positive || it->get<int>() > 0;
                        hs.counts[it.key()] = it->get<int>();
                    }
                    if (!positive) ck.fail(p + "/counts", "needs at least one positive count");
                }
            }
            cfg.heralds.push_back(hs);
        }
    }

    if (const json *a = ck.field(doc, "analysis", "", false)) {
        ck.object_keys(*a, "/analysis", {"kept", "herald", "target"});
        AnalysisSpec an;
        if (const json *k = ck.array(*a, "kept", "/analysis", true)) {
            if (k->size() != 2 || !(*k)[0].is_string() || !(*k)[1].is_string()) {
                ck.fail("/analysis/kept", "expected two spatial labels");
            } else {
                an.kept = {(*k)[0].get<std::string>(), (*k)[1].get<std::string>()};
                check_label(an.kept[0], "/analysis/kept/0");
                check_label(an.kept[1], "/analysis/kept/1");
                if (an.kept[0] == an.kept[1]) ck.fail("/analysis/kept", "kept labels must differ");
            }
        }
        if (auto v = ck.string(*a, "herald", "/analysis", true)) {
            an.herald = *v;
            if (!herald_names.count(*v)) ck.fail("/analysis/herald", "dangling label \"" + *v + "\" (no such herald)");
        }
        if (auto v = ck.string(*a, "target", "/analysis", false)) {
            an.target = *v;
            if (*v != "phi+" && *v != "phi-" && *v != "psi+" && *v != "psi-")
                ck.fail("/analysis/target", "expected one of phi+, phi-, psi+, psi-");
        }
        cfg.analysis = an;
    }

    if (const json *arr = ck.array(doc, "analyzers", "", false)) {
        if (!cfg.analysis && !arr->empty()) ck.fail("/analyzers", "analyzers need an /analysis block");
        for (std::size_t i = 0; i < arr->size(); ++i) {
            const std::string p = "/analyzers/" + std::to_string(i);
            ck.object_keys((*arr)[i], p, {"a", "b"});
            AnalyzerSetting s;
            if (auto v = ck.number((*arr)[i], "a", p, true)) s.a = *v;
            if (auto v = ck.number((*arr)[i], "b", p, true)) s.b = *v;
            cfg.analyzers.push_back(s);
        }
    }

    if (const json *s = ck.field(doc, "sampling", "", false)) {
        ck.object_keys(*s, "/sampling", {"shots", "seed"});
        SamplingSpec sp;
        if (auto v = ck.integer(*s, "shots", "/sampling", true)) {
            if (*v < 0) ck.fail("/sampling/shots", "must be non-negative");
            sp.shots = static_cast<std::uint64_t>(std::max<std::int64_t>(0, *v));
        }
        if (auto v = ck.integer(*s, "seed", "/sampling", true)) sp.seed = static_cast<std::uint64_t>(*v);
        cfg.sampling = sp;
    }

    if (!ck.errors.empty()) throw ConfigError(ck.errors);
    return cfg;
}

inline ExperimentConfig parse_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read config file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error &e) {
        throw ConfigError({"/: parse error: " + std::string(e.what())});
    }
    return config_from_json(doc);
}

inline json complex_to_json(Complex c) {
    if (c.imag() == 0.0) return c.real();
    return json::array({c.real(), c.imag()});
}

/// Canonical JSON form; parsing it back yields an equal config.
inline json to_json(const ExperimentConfig &cfg) {
    json j;
    j["schema_version"] = cfg.schema_version;
    j["name"] = cfg.name;
    j["convention"] = convention_name(cfg.convention);
    j["model"] = {{"coherence_length_um", cfg.model.coherence_length_um},
                  {"fringe_period_um", cfg.model.fringe_period_um}};
    j["photon_budget"] = cfg.photon_budget;
    j["modes"] = cfg.modes;
    j["sources"] = json::array();
    for (const auto &s : cfg.sources) j["sources"].push_back({{"spatial", s.spatial}, {"angle", s.angle_deg}});
    j["overlaps"] = json::array();
    for (const auto &o : cfg.overlaps) {
        json pairs = json::array();
        for (auto [a, b] : o.pairs) pairs.push_back({a, b});
        j["overlaps"].push_back({{"pairs", pairs}, {"value", complex_to_json(o.value)}});
    }
    j["elements"] = json::array();
    for (const auto &e : cfg.elements) {
        json el{{"kind", kind_name(e.kind)}, {"spatial", e.spatial}};
        switch (e.kind) {
            case ElementKind::HWP:
            case ElementKind::RPBS: el["angle"] = e.angle_deg; break;
            case ElementKind::Polarizer:
                el["angle"] = e.angle_deg;
                el["loss"] = e.loss;
                break;
            case ElementKind::Phase:
                el["phase"] = e.phase_rad;
                if (e.pol) el["pol"] = pol_name(*e.pol);
                break;
            case ElementKind::BeamSplitter: el["transmissivity"] = e.transmissivity; break;
            case ElementKind::Delay:
                el["delay_um"] = e.delay_um;
                el["mode_overlap"] = e.mode_overlap;
                break;
            case ElementKind::PBS: break;
        }
        j["elements"].push_back(el);
    }
    j["outputs"] = json::object();
    for (const auto &[k, v] : cfg.outputs) j["outputs"][k] = v;
    j["detectors"] = json::array();
    for (const auto &d : cfg.detectors) {
        json dj{{"name", d.name}, {"spatial", d.spatial}};
        if (d.pol) dj["pol"] = pol_name(*d.pol);
        j["detectors"].push_back(dj);
    }
    j["heralds"] = json::array();
    for (const auto &h : cfg.heralds) j["heralds"].push_back({{"name", h.name}, {"counts", h.counts}});
    if (cfg.analysis)
        j["analysis"] = {{"kept", cfg.analysis->kept}, {"herald", cfg.analysis->herald}, {"target", cfg.analysis->target}};
    j["analyzers"] = json::array();
    for (const auto &a : cfg.analyzers) j["analyzers"].push_back({{"a", a.a}, {"b", a.b}});
    if (cfg.sampling) j["sampling"] = {{"shots", cfg.sampling->shots}, {"seed", cfg.sampling->seed}};
    return j;
}

/// FNV-1a over the canonical JSON text, as 16 hex digits.
inline std::string config_hash(const ExperimentConfig &cfg) {
    const std::string text = to_json(cfg).dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << h;
    return os.str();
}

}  // namespace lofsim
