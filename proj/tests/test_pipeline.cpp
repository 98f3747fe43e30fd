// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#include <doctest.h>

#include <cmath>

#include "navcache/pipeline.hpp"

using namespace navcache;

namespace {

RunConfig static_room_config() {
    RunConfig cfg = preset_config("corridor");
    cfg.scene_preset.clear();
    cfg.eta = 0.0;
    cfg.trajectory.phases = {Phase{PhaseKind::kCruising, 8, 0.0, 0.0, "table"}};
    cfg.seeds = {1};
    return cfg;
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("config JSON round trip is lossless") {
    for (const std::string& name : preset_names()) {
        const RunConfig cfg = preset_config(name);
        const auto j = config_to_json(cfg);
        const RunConfig back = config_from_json(j);
        CHECK(config_to_json(back) == j);
    }
}

TEST_CASE("every preset trajectory stays inside its room and runs end to end") {
    for (const std::string& name : preset_names()) {
        RunConfig cfg = preset_config(name);
        cfg.seeds = {1};
        const EpisodeRunner runner(cfg);
        const EpisodeResult result = runner.run(1);
        CHECK(result.steps.size() == static_cast<size_t>(cfg.trajectory.total_steps()));
        for (const StepTrace& s : result.steps) {
            CHECK(s.metrics.reuse_ratio >= 0.0);
            CHECK(s.metrics.reuse_ratio <= 1.0);
            CHECK(s.metrics.d_sem >= 0.0);
            CHECK(s.metrics.d_sem <= 1.0);
        }
    }
}

TEST_CASE("identical configs produce byte-identical CSV reports") {
    RunConfig cfg = preset_config("turn-heavy");
    cfg.seeds = {3};
    const EpisodeResult a = EpisodeRunner(cfg).run(3);
    const EpisodeResult b = EpisodeRunner(cfg).run(3);
    CHECK(episode_to_csv(a) == episode_to_csv(b));
    CHECK(episode_to_json(cfg, a).dump() == episode_to_json(cfg, b).dump());
}

TEST_CASE("each ablation mode flips exactly one switch") {
    const ModeSwitches full = switches_for(RunMode::kFull);
    for (RunMode mode : {RunMode::kNoCache, RunMode::kNoRemap, RunMode::kNoSemanticGate,
                         RunMode::kNoVisualGate}) {
        const ModeSwitches s = switches_for(mode);
        int diff = 0;
        diff += s.caching != full.caching;
        diff += s.remap != full.remap;
        diff += s.visual_gate != full.visual_gate;
        diff += s.semantic_gate != full.semantic_gate;
        CHECK(diff == 1);
    }
}

TEST_CASE("no_cache mode never reuses and saves nothing") {
    RunConfig cfg = preset_config("turn-heavy");
    cfg.mode = RunMode::kNoCache;
    cfg.seeds = {1};
    const EpisodeResult result = EpisodeRunner(cfg).run(1);
    CHECK(result.report.overall.mean_reuse_ratio == 0.0);
    CHECK(result.report.total_flops_saved == 0);
    CHECK(result.report.overall.bypass_rate == 0.0);
}

TEST_CASE("permissive gates on a static scene pin reuse at the budget cap") {
    RunConfig cfg = static_room_config();
    cfg.gates.tau_vis = 0.0;
    cfg.gates.tau_abs = 1.0;    // scores never exceed 1
    cfg.gates.tau_delta = 1.0;  // jumps never exceed 1
    cfg.gates.tau_frame = 2.0;  // never bypass, keep the encoder running
    cfg.budget.alpha = 0.0;     // rho pinned at rho_max
    const EpisodeResult result = EpisodeRunner(cfg).run(1);
    const int m = cfg.token_count();
    const double expected = std::floor(cfg.budget.rho_max * m) / m;
    for (size_t t = 1; t < result.steps.size(); ++t)
        CHECK(result.steps[t].metrics.reuse_ratio == doctest::Approx(expected));
}

TEST_CASE("global budget mode caps every layer at rho_max") {
    RunConfig cfg = static_room_config();
    cfg.budget.mode = BudgetMode::kGlobal;
    const EpisodeResult result = EpisodeRunner(cfg).run(1);
    for (size_t t = 1; t < result.steps.size(); ++t)
        for (const LayerTrace& lt : result.steps[t].layers)
            CHECK(lt.rho == doctest::Approx(cfg.budget.rho_max));
}

TEST_CASE("per-layer budgets respect the clip range and the reuse cap") {
    RunConfig cfg = preset_config("turn-heavy");
    cfg.seeds = {1, 2};
    for (uint64_t seed : cfg.seeds) {
        const EpisodeResult result = EpisodeRunner(cfg).run(seed);
        for (const StepTrace& s : result.steps)
            for (const LayerTrace& lt : s.layers) {
                CHECK(lt.rho >= cfg.budget.rho_min);
                CHECK(lt.rho <= cfg.budget.rho_max);
                CHECK(lt.reused <= static_cast<int>(std::floor(lt.rho * cfg.token_count())));
            }
    }
}

TEST_CASE("attention relevance source runs and stays in range") {
    RunConfig cfg = preset_config("corridor");
    cfg.relevance_source = RelevanceSource::kAttention;
    cfg.seeds = {1};
    const EpisodeResult result = EpisodeRunner(cfg).run(1);
    for (const StepTrace& s : result.steps) {
        CHECK(s.metrics.d_sem >= 0.0);
        CHECK(s.metrics.d_sem <= 1.0);
    }
}

TEST_CASE("frame gate fires more while cruising than while turning") {
    RunConfig cfg = preset_config("turn-heavy");
    double cruise = 0.0, explore = 0.0;
    const int seeds = 5;
    for (uint64_t seed = 1; seed <= seeds; ++seed) {
        const EpisodeResult result = EpisodeRunner(cfg).run(seed);
        cruise += result.report.per_phase.at(PhaseKind::kCruising).bypass_rate;
        explore += result.report.per_phase.at(PhaseKind::kExploration).bypass_rate;
    }
    CHECK(cruise / seeds > explore / seeds);
}

TEST_CASE("compare: a report against itself is all zeros") {
    RunConfig cfg = static_room_config();
    const EpisodeResult result = EpisodeRunner(cfg).run(1);
    const auto doc = episode_to_json(cfg, result);
    const CompareResult cmp = compare_reports(doc, doc);
    CHECK(cmp.max_action_gap == 0.0);
    CHECK(cmp.mean_reuse_delta == 0.0);
    for (const StepDivergence& d : cmp.steps)
        CHECK(d.action_gap == 0.0);
}

TEST_CASE("compare rejects mismatched provenance") {
    RunConfig cfg = static_room_config();
    const EpisodeRunner runner(cfg);
    const auto doc1 = episode_to_json(cfg, runner.run(1));
    const auto doc2 = episode_to_json(cfg, runner.run(2));
    CHECK_THROWS_AS(compare_reports(doc1, doc2), ComparisonError);

    RunConfig other = cfg;
    other.trajectory.phases[0].steps += 1;
    const auto doc3 = episode_to_json(other, EpisodeRunner(other).run(1));
    CHECK_THROWS_AS(compare_reports(doc1, doc3), ComparisonError);
}

TEST_CASE("config validation surfaces key paths and bad values") {
    auto j = config_to_json(default_config());
    j["typo_key"] = 1;
    CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("typo_key"), ConfigError);

    j = config_to_json(default_config());
    j["mode"] = "everything";
    CHECK_THROWS_AS(config_from_json(j), ConfigError);

    j = config_to_json(default_config());
    j["budget"]["rho_max"] = 1.5;
    CHECK_THROWS_AS(config_from_json(j), ConfigError);

    j = config_to_json(default_config());
    j["camera"]["patch"] = 13;  // 128 % 13 != 0
    CHECK_THROWS_AS(config_from_json(j), ConfigError);
}

TEST_CASE("per-seed JSON reports carry action scores and layer traces") {
    RunConfig cfg = static_room_config();
    const EpisodeResult result = EpisodeRunner(cfg).run(1);
    const auto doc = episode_to_json(cfg, result);
    CHECK(doc.at("steps").size() == result.steps.size());
    CHECK(doc.at("steps")[0].at("action_scores").size() == static_cast<size_t>(kActionCount));
    CHECK(doc.at("steps")[1].at("layers").size() == static_cast<size_t>(cfg.model.layers));
    CHECK(doc.at("reference_fullscale").contains("reported_footprint_mb"));
    const std::string csv = episode_to_csv(result);
    CHECK(csv.rfind("step,phase,r_pos,r_align,delta_r,d_sem,reuse_ratio,flops_saved,bypass\n", 0) == 0);
}

}  // TEST_SUITE
