// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "navcache/accounting.hpp"
#include "navcache/config.hpp"

namespace navcache {

struct LayerTrace {
    double rho = 0.0;      // budget applied this step
    int reused = 0;        // tokens spliced from cache
    double entropy = 0.0;  // normalized entropy reported by this layer
};

struct StepTrace {
    StepMetrics metrics;
    std::vector<double> action_scores;
    std::vector<LayerTrace> layers;
    int reuse_sites = 0;          // fused-mask popcount before budget trim
    double reuse_site_sim = 0.0;  // mean aligned cosine over those sites
};

struct EpisodeResult {
    uint64_t seed = 0;
    std::vector<StepTrace> steps;
    EpisodeReport report;
};

/// Runs the full per-step loop: render, frame gate, remap, dual gates, mask
/// fusion, per-layer budget, splice, decoder step, cache update, metrics.
/// Pure function of (config, seed); ablation modes flip single switches.
class EpisodeRunner {
  public:
    explicit EpisodeRunner(RunConfig cfg);

    const RunConfig& config() const { return cfg_; }

    EpisodeResult run(uint64_t seed) const;

  private:
    RunConfig cfg_;
    WeightSet weights_;
    TokenGrid grid_;
};

/// Per-seed report document: config echo, per-step rows with action scores,
/// aggregates and full-scale reference constants.
nlohmann::json episode_to_json(const RunConfig& cfg, const EpisodeResult& result);

std::string episode_to_csv(const EpisodeResult& result);

/// Cross-seed summary document.
nlohmann::json aggregate_to_json(const RunConfig& cfg, const std::vector<EpisodeResult>& results);

/// Reference constants of the full-scale system the cost models describe.
nlohmann::json fullscale_reference();

struct StepDivergence {
    int step = 0;
    double action_gap = 0.0;   // max-abs action score difference
    double reuse_delta = 0.0;  // reuse ratio difference (a - b)
};

struct CompareResult {
    std::vector<StepDivergence> steps;
    double max_action_gap = 0.0;
    double mean_reuse_delta = 0.0;
};

/// Divergence between two per-seed reports of the same scene, trajectory,
/// camera, model and seed. Throws ComparisonError on mismatched provenance.
CompareResult compare_reports(const nlohmann::json& report_a, const nlohmann::json& report_b);

nlohmann::json compare_to_json(const CompareResult& result);

/// Writes via a temp file and rename so readers never see partial output.
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace navcache
