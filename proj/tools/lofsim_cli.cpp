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


// Command-line front end: presets, user configs and parameter scans.

#include <iostream>

#include <CLI11.hpp>

#include "lofsim/lofsim.hpp"

namespace {

std::map<std::string, double> parse_sets(const std::vector<std::string> &sets) {
    std::map<std::string, double> out;
    for (const auto &s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw lofsim::Error("--set expects KEY=VALUE, got '" + s + "'");
        try {
            std::size_t used = 0;
            const std::string v = s.substr(eq + 1);
            out[s.substr(0, eq)] = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
        } catch (const std::exception &) {
            throw lofsim::Error("--set value for '" + s.substr(0, eq) + "' is not a number");
        }
    }
    return out;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Linear-optics Fock-state simulator for heralded entangled photon pairs"};
    std::string preset, config_path, out_dir = "lofsim-out", scan_spec, convention, format = "csv", emit;
    std::uint64_t seed = 1, shots = 10000;
    std::vector<std::string> sets;
    bool list = false;

    auto *p = app.add_option("--preset", preset, "Preset experiment")
                  ->check(CLI::IsMember(lofsim::preset_names()));
    auto *c = app.add_option("--config", config_path, "Experiment config file (JSON)");
    p->excludes(c);
    app.add_option("--out", out_dir, "Output directory")->capture_default_str();
    app.add_option("--seed", seed, "Sampling seed")->capture_default_str();
    app.add_option("--shots", shots, "Sampled events per point (0: exact probabilities only)")->capture_default_str();
    app.add_option("--scan", scan_spec, "Parameter scan PATH=START:STOP:STEP (JSON pointer into the config)");
    auto *conv = app.add_option("--convention", convention, "PBS reflection phase convention")
                     ->check(CLI::IsMember({"perm", "i-reflect"}));
    app.add_option("--format", format, "Curve output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    app.add_option("--set", sets, "Preset parameter override KEY=VALUE (e.g. visibility=0.89)");
    app.add_flag("--list-presets", list, "List presets and built-in configs");
    app.add_option("--emit-config", emit, "Print a built-in or preset config as JSON and exit");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (list) {
            for (const auto &n : lofsim::preset_names()) std::cout << "preset  " << n << "\n";
            for (const auto &n : lofsim::builtin_names()) std::cout << "config  " << n << "\n";
            return 0;
        }
        lofsim::PresetOptions opts;
        opts.seed = seed;
        opts.shots = shots;
        opts.csv = format == "csv";
        if (!convention.empty()) opts.convention = lofsim::parse_convention(convention);
        opts.params = parse_sets(sets);

        if (!emit.empty()) {
            const auto &b = lofsim::builtin_names();
            const auto cfg = std::find(b.begin(), b.end(), emit) != b.end() ? lofsim::builtin_config(emit)
                                                                            : lofsim::preset_config(emit, opts);
            std::cout << lofsim::to_json(cfg).dump(2) << "\n";
            return 0;
        }
        if (preset.empty() && config_path.empty()) {
            std::cerr << "error: one of --preset or --config is required\n";
            return 1;
        }

        lofsim::RunResult result;
        std::string run_name;
        if (!scan_spec.empty()) {
            auto cfg = preset.empty() ? lofsim::parse_config(config_path) : lofsim::preset_config(preset, opts);
            if (*conv) cfg.convention = opts.convention;
            result = lofsim::run_scan(cfg, lofsim::parse_scan(scan_spec), opts);
            run_name = "scan:" + (preset.empty() ? cfg.name : preset);
        } else if (!preset.empty()) {
            result = lofsim::run_preset(preset, opts);
            run_name = preset;
        } else {
            auto cfg = lofsim::parse_config(config_path);
            if (*conv) cfg.convention = opts.convention;
            result = lofsim::run_config(cfg, opts);
            run_name = "config:" + cfg.name;
        }
        lofsim::write_outputs(out_dir, result, run_name, opts);

        std::cout << run_name << ": " << (result.checks_passed ? "ok" : "CHECK FAILED") << " -> " << out_dir << "\n";
        if (result.report.contains("checks"))
            for (const auto &ch : result.report["checks"])
                if (!ch["pass"].get<bool>()) std::cerr << "  failed: " << ch.dump() << "\n";
        return result.exit_code();
    } catch (const lofsim::Error &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
