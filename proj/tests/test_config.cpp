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

#include <fstream>

#include "lofsim/lofsim.hpp"

using namespace lofsim;

namespace {

json minimal() {
    return json::parse(R"({
      "schema_version": 1,
      "modes": ["A"],
      "sources": [{"spatial": "A", "angle": 0}],
      "elements": [],
      "detectors": [{"name": "D", "spatial": "A"}]
    })");
}

std::vector<std::string> violations_of(const json &j) {
    try {
        config_from_json(j);
    } catch (const ConfigError &e) {
        return e.violations();
    }
    return {};
}

bool mentions(const std::vector<std::string> &v, const std::string &needle) {
    for (const auto &s : v)
        if (s.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST(Config, MinimalParses) {
    auto cfg = config_from_json(minimal());
    EXPECT_EQ(cfg.sources.size(), 1u);
    EXPECT_EQ(cfg.detectors.size(), 1u);
    EXPECT_EQ(cfg.convention, PbsConvention::Permutation);
}

TEST(Config, WrongTypeNamesFieldAndPath) {
    auto j = minimal();
    j["sources"][0]["angle"] = "ninety";
    auto v = violations_of(j);
    ASSERT_EQ(v.size(), 1u);
    EXPECT_TRUE(mentions(v, "/sources/0/angle"));
    EXPECT_TRUE(mentions(v, "ninety"));
}

TEST(Config, CollectsEveryViolation) {
    auto j = minimal();
    j["sources"][0]["angle"] = "ninety";
    j["convention"] = "mirror";
    j["elements"] = json::parse(R"([{"kind": "LENS", "spatial": ["A"]},
                                     {"kind": "HWP", "spatial": ["Z9"], "angle": 10},
                                     {"kind": "PBS", "spatial": ["A"]}])");
    j["heralds"] = json::parse(R"([{"name": "h", "counts": {"Dx": 1}}])");
    j["bogus"] = 1;
    auto v = violations_of(j);
    EXPECT_GE(v.size(), 6u);
    EXPECT_TRUE(mentions(v, "/sources/0/angle"));
    EXPECT_TRUE(mentions(v, "/convention"));
    EXPECT_TRUE(mentions(v, "/elements/0/kind"));
    EXPECT_TRUE(mentions(v, "/elements/1/spatial/0: dangling label \"Z9\""));
    EXPECT_TRUE(mentions(v, "/elements/2/spatial"));
    EXPECT_TRUE(mentions(v, "/heralds/0/counts/Dx"));
    EXPECT_TRUE(mentions(v, "/bogus"));
}

TEST(Config, MissingRequiredAndBadVersion) {
    json j = {{"schema_version", 7}};
    auto v = violations_of(j);
    EXPECT_TRUE(mentions(v, "/schema_version"));
    EXPECT_TRUE(mentions(v, "/modes: required"));
    EXPECT_TRUE(mentions(v, "/sources: required"));
    EXPECT_TRUE(mentions(v, "/elements: required"));
}

TEST(Config, CrossReferenceChecks) {
    auto j = to_json(polarizer_fusion());
    j["elements"][4]["loss"] = "LA";
    j["analysis"]["herald"] = "nope";
    j["overlaps"][0]["pairs"][0] = {0, 9};
    auto v = violations_of(j);
    EXPECT_TRUE(mentions(v, "duplicate loss label"));
    EXPECT_TRUE(mentions(v, "/analysis/herald"));
    EXPECT_TRUE(mentions(v, "photon index out of range"));
}

TEST(Config, ParseErrorsFromFiles) {
    EXPECT_THROW(parse_config("/nonexistent/config.json"), Error);
    const std::string path = testing::TempDir() + "broken.json";
    std::ofstream(path) << "{ not json";
    EXPECT_THROW(parse_config(path), ConfigError);
}

TEST(Config, RoundTripThroughJson) {
    for (const auto &cfg : {pbs_fusion(PbsConvention::IReflect), polarizer_fusion(0.97, 0.93), hom_first_pbs(0.8),
                            fusion_alignment(), hom_beamsplitter(Complex(0.3, 0.4))}) {
        auto back = config_from_json(json::parse(to_json(cfg).dump()));
        EXPECT_EQ(back, cfg) << cfg.name;
        EXPECT_EQ(config_hash(back), config_hash(cfg));
    }
    EXPECT_NE(config_hash(pbs_fusion()), config_hash(pbs_fusion(PbsConvention::IReflect)));
}

TEST(Config, ShippedPresetFilesEqualBuiltins) {
    for (const auto &name : builtin_names()) {
        const auto path = std::string(LOFSIM_SOURCE_DIR) + "/presets/" + name + ".json";
        auto parsed = parse_config(path);
        EXPECT_EQ(parsed, builtin_config(name)) << path;
    }
}

TEST(Scan, SpecParsingAndErrors) {
    auto s = parse_scan("/analyzers/0/a=0:180:10");
    EXPECT_EQ(s.path, "/analyzers/0/a");
    EXPECT_EQ(s.points().size(), 19u);
    EXPECT_THROW(parse_scan("nopath"), Error);
    EXPECT_THROW(parse_scan("/x=0:1"), Error);
    EXPECT_THROW(parse_scan("/x=a:1:2"), Error);
    EXPECT_THROW(parse_scan("/x=1:0:0.1").points(), Error);
    EXPECT_THROW(parse_scan("/x=0:0.05:0.1").points(), Error);
    EXPECT_THROW(with_parameter(pbs_fusion(), "/name", 1.0), Error);
    EXPECT_THROW(with_parameter(pbs_fusion(), "/nothing/here", 1.0), Error);
}

TEST(Scan, AnalyzerAngleFollowsMalusLaw) {
    auto cfg = polarizer_fusion();
    cfg.analyzers = {{0.0, 45.0}};
    auto t = scan(cfg, parse_scan("/analyzers/0/a=0:180:10"));
    ASSERT_EQ(t.rows.size(), 19u);
    const auto col = std::find(t.columns.begin(), t.columns.end(), "pp_0") - t.columns.begin();
    for (const auto &row : t.rows) {
        const double th = (row[0] - 45.0) * std::numbers::pi / 180.0;
        EXPECT_NEAR(row[col], (1.0 + std::cos(2.0 * th)) / 4.0, 1e-12) << row[0];
    }
    for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_GT(t.rows[i][0], t.rows[i - 1][0]);
}

TEST(Scan, FusionOverlapLowersFidelityToOneHalf) {
    auto t = scan(polarizer_fusion(1.0, 1.0), parse_scan("/overlaps/0/value=0:1:0.1"));
    ASSERT_EQ(t.rows.size(), 11u);
    const auto col = std::find(t.columns.begin(), t.columns.end(), "fidelity") - t.columns.begin();
    EXPECT_NEAR(t.rows.front()[col], 0.5, 1e-12);
    EXPECT_NEAR(t.rows.back()[col], 1.0, 1e-12);
    for (std::size_t i = 1; i < t.rows.size(); ++i) EXPECT_GE(t.rows[i][col], t.rows[i - 1][col] - 1e-12);
}

TEST(Scan, DelayScanEnvelopeMatchesCoherenceLength) {
    auto cfg = fusion_alignment(1.0);
    auto t = scan(cfg, parse_scan("/elements/1/delay_um=-600:600:1"));
    std::vector<CurvePoint> curve;
    for (const auto &row : t.rows) curve.push_back({row[0], row[1]});
    const double period = detail::aliased_period(cfg.model.fringe_period_um / 2.0, 1.0);
    auto env = detail::fit_envelope(curve, period, 41, 10);
    EXPECT_NEAR(env.coherence_length_um, 200.0, 10.0);
    EXPECT_NEAR(env.peak_visibility, 1.0, 0.01);
}
