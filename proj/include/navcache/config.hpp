// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "navcache/gating.hpp"
#include "navcache/kv_cache.hpp"
#include "navcache/simulator.hpp"
#include "navcache/toy_model.hpp"

namespace navcache {

enum class RunMode { kFull, kNoCache, kNoRemap, kNoSemanticGate, kNoVisualGate };

std::string run_mode_name(RunMode mode);
RunMode run_mode_from_name(const std::string& name);

enum class RelevanceSource { kOracle, kAttention };

/// The four pipeline switches. Each ablation mode flips exactly one of them
/// relative to the full configuration.
struct ModeSwitches {
    bool caching = true;        // off: every mask forced to zero, frame gate off
    bool remap = true;          // off: position-wise correspondence, pi(i) = i
    bool visual_gate = true;    // off: any in-view remap counts as visually stable
    bool semantic_gate = true;  // off: the refresh veto never fires

    bool operator==(const ModeSwitches&) const = default;
};

ModeSwitches switches_for(RunMode mode);

struct RunConfig {
    std::string scene_preset;  // empty when the scene is inline
    SceneConfig scene;
    TrajectorySpec trajectory;
    Intrinsics camera{64.0, 64.0, 64.0, 64.0, 128, 128, 16};
    ModelSpec model;
    GateConfig gates;
    BudgetConfig budget;
    int focus_k = 0;  // 0 selects ceil(0.1 * M)
    RelevanceSource relevance_source = RelevanceSource::kOracle;
    int k_window = 3;
    double eta = 0.02;
    std::vector<uint64_t> seeds{1, 2, 3, 4, 5};
    RunMode mode = RunMode::kFull;

    int token_count() const { return camera.token_count(); }
    int effective_focus_k() const;
    void validate() const;
};

std::vector<std::string> preset_names();
RunConfig preset_config(const std::string& name);
RunConfig default_config();  // the corridor preset

nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig config_from_json(const nlohmann::json& j);

/// Parses a config file. Syntax and schema problems raise ConfigError with
/// the parser's line/column or the offending key path.
RunConfig load_config_file(const std::string& path);

}  // namespace navcache
