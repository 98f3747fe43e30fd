// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#include "navcache/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "navcache/rng.hpp"
#include "navcache/semantics.hpp"

namespace navcache {

using nlohmann::json;

EpisodeRunner::EpisodeRunner(RunConfig cfg) : cfg_(std::move(cfg)) {
    cfg_.validate();
    weights_ = init_weights(cfg_.model);
    grid_ = TokenGrid::from_intrinsics(cfg_.camera);
}

namespace {

std::vector<RemapResult> identity_remaps(int tokens) {
    std::vector<RemapResult> remaps;
    remaps.reserve(static_cast<size_t>(tokens));
    for (int i = 0; i < tokens; ++i)
        remaps.push_back(RemapResult::at(i));
    return remaps;
}

/// Language-to-vision relevance: per-layer vision blocks are row-normalized,
/// averaged over layers, then max-normalized.
std::vector<double> relevance_from_step(const StepOutput& out, int tokens, double epsilon) {
    const int lq = out.attention.front().rows;
    Matrix block(lq, tokens, 0.0);
    for (const Matrix& attn : out.attention) {
        for (int r = 0; r < lq; ++r) {
            double vision_mass = 0.0;
            for (int c = 0; c < tokens; ++c)
                vision_mass += attn.at(r, c);
            if (vision_mass <= 0.0)
                continue;
            for (int c = 0; c < tokens; ++c)
                block.at(r, c) += attn.at(r, c) / vision_mass / static_cast<double>(out.attention.size());
        }
    }
    return relevance_from_attention(block, epsilon);
}

std::vector<double> clamped_oracle_relevance(const Observation& obs) {
    std::vector<double> s = obs.oracle_relevance;
    for (double& v : s)
        v = std::clamp(v, 0.0, 1.0);
    return s;
}

}  // namespace

EpisodeResult EpisodeRunner::run(uint64_t seed) const {
    const ModeSwitches sw = switches_for(cfg_.mode);
    const Scene scene = Scene::build(cfg_.scene).with_seed(hash_combine(cfg_.scene.seed, seed));
    const std::vector<Observation> episode =
        run_episode(scene, cfg_.trajectory, cfg_.camera, cfg_.model.feature_dim, cfg_.eta);

    const int m = cfg_.token_count();
    const int layers = cfg_.model.layers;
    const double eps = cfg_.gates.epsilon;
    const int focus_k = cfg_.effective_focus_k();

    EpisodeResult result;
    result.seed = seed;
    KvCacheState cache;
    std::vector<double> prev_entropy(static_cast<size_t>(layers), 0.0);
    std::vector<double> prev_scores;
    std::vector<int> prev_focus;
    const Observation* prev_obs = nullptr;
    StepOutput prev_out;

    std::vector<StepMetrics> metric_rows;
    for (size_t t = 0; t < episode.size(); ++t) {
        const Observation& obs = episode[t];
        const int phase_idx = cfg_.trajectory.phase_index_of(static_cast<int>(t));
        const PhaseKind phase = cfg_.trajectory.phases[static_cast<size_t>(phase_idx)].kind;

        StepTrace trace;
        StepMetrics metrics;
        metrics.step = static_cast<int>(t);
        metrics.phase = phase;

        Matrix features = obs.features;
        bool bypass = false;
        CachePlan plan;
        std::vector<double> align_sims;
        std::vector<uint8_t> fused;

        if (t > 0) {
            const auto pooled = column_mean(obs.features);
            const auto pooled_prev = column_mean(cache.feature_cache);
            bypass = sw.caching && frame_gate(pooled, pooled_prev, cfg_.gates.tau_frame, eps);
            if (bypass)
                features = cache.feature_cache;

            const PoseSE3 rel_pose = prev_obs->pose.inverse().compose(obs.pose);
            plan.remap = sw.remap
                             ? remap_frame(obs.depth, obs.depth_valid, rel_pose, cfg_.camera, grid_, features,
                                           cache.feature_cache, cfg_.k_window, eps)
                             : identity_remaps(m);
            align_sims = align_similarities(features, cache.feature_cache, plan.remap, eps);

            std::vector<uint8_t> m_vis(static_cast<size_t>(m), 0);
            if (sw.caching) {
                for (int i = 0; i < m; ++i) {
                    const bool in_view = plan.remap[static_cast<size_t>(i)].in_view();
                    m_vis[static_cast<size_t>(i)] =
                        in_view && (!sw.visual_gate || align_sims[static_cast<size_t>(i)] > cfg_.gates.tau_vis)
                            ? 1
                            : 0;
                }
            }

            std::vector<double> scores = cfg_.relevance_source == RelevanceSource::kOracle
                                             ? clamped_oracle_relevance(obs)
                                             : relevance_from_step(prev_out, m, eps);
            std::vector<uint8_t> m_sem =
                sw.semantic_gate ? semantic_gate(scores, prev_scores, cfg_.gates.tau_abs, cfg_.gates.tau_delta)
                                 : std::vector<uint8_t>(static_cast<size_t>(m), 0);

            fused = fuse(m_vis, m_sem);

            ReuseMasks masks{m_vis, m_sem, fused, plan.remap};
            masks.validate();

            trace.reuse_sites = static_cast<int>(std::count(fused.begin(), fused.end(), uint8_t{1}));
            if (trace.reuse_sites > 0) {
                double sum = 0.0;
                for (int i = 0; i < m; ++i)
                    if (fused[static_cast<size_t>(i)])
                        sum += align_sims[static_cast<size_t>(i)];
                trace.reuse_site_sim = sum / trace.reuse_sites;
            }

            plan.layer_masks.reserve(static_cast<size_t>(layers));
            for (int l = 0; l < layers; ++l) {
                const double rho = cfg_.budget.mode == BudgetMode::kPerLayer
                                       ? layer_budget(prev_entropy[static_cast<size_t>(l)], cfg_.budget)
                                       : cfg_.budget.rho_max;
                if (rho < cfg_.budget.rho_min - 1e-12 || rho > cfg_.budget.rho_max + 1e-12)
                    throw Error("pipeline: layer budget escaped [rho_min, rho_max]");
                std::vector<uint8_t> trimmed = enforce_budget(fused, align_sims, rho);
                const int reused = static_cast<int>(std::count(trimmed.begin(), trimmed.end(), uint8_t{1}));
                if (reused > static_cast<int>(std::floor(rho * m)))
                    throw Error("pipeline: reuse count exceeds the layer budget");
                trace.layers.push_back(LayerTrace{rho, reused, prev_entropy[static_cast<size_t>(l)]});
                plan.layer_masks.push_back(std::move(trimmed));
            }

            const ReuseGap gap = reuse_gap(obs, *prev_obs, plan.remap, eps);
            metrics.r_pos = gap.r_pos_mean;
            metrics.r_align = gap.r_align_mean;
            metrics.delta_r = gap.delta_r;

            const std::vector<int> focus = top_k_set(scores, focus_k);
            metrics.d_sem = focus_shift(focus, prev_focus);
            prev_focus = focus;
            prev_scores = std::move(scores);
        } else {
            // First step: nothing cached, full compute, self-comparison metrics.
            metrics.r_pos = 1.0;
            metrics.r_align = 1.0;
            prev_scores = cfg_.relevance_source == RelevanceSource::kOracle
                              ? clamped_oracle_relevance(obs)
                              : std::vector<double>(static_cast<size_t>(m), 0.0);
            prev_focus = top_k_set(prev_scores, focus_k);
        }

        StepOutput out = forward_step(cfg_.model, weights_, features, weights_.lang_embed,
                                      t > 0 ? &plan : nullptr, t > 0 ? &cache : nullptr, eps);
        update_cache(cache, out.kv, features, static_cast<int64_t>(t));

        metrics.bypass = bypass;
        double reuse_sum = 0.0;
        uint64_t flops = 0;
        for (const LayerTrace& lt : trace.layers) {
            reuse_sum += static_cast<double>(lt.reused) / m;
            flops += static_cast<uint64_t>(4) * static_cast<uint64_t>(lt.reused) *
                     static_cast<uint64_t>(cfg_.model.feature_dim) * static_cast<uint64_t>(cfg_.model.kv_dim);
        }
        metrics.reuse_ratio = trace.layers.empty() ? 0.0 : reuse_sum / layers;
        metrics.flops_saved = flops;

        if (t + 1 < episode.size() && cfg_.relevance_source == RelevanceSource::kAttention)
            prev_out = out;
        prev_entropy = out.entropy;
        prev_obs = &obs;

        trace.metrics = metrics;
        trace.action_scores = out.action_scores;
        metric_rows.push_back(metrics);
        result.steps.push_back(std::move(trace));
    }

    result.report = aggregate_episode(metric_rows);
    return result;
}

json fullscale_reference() {
    // Published full-scale figures for context, next to what the cost models
    // give at those dimensions (L=28, M=196, D=3584, d_kv=512, L_q=20).
    const double L = 28, M = 196, D = 3584, dkv = 512, Lq = 20, rho = 0.31;
    return json{
        {"dims", {{"layers", L}, {"tokens", M}, {"feature_dim", D}, {"kv_dim", dkv}, {"lang_queries", Lq}}},
        {"flop_savings_at_rho_0p31", flop_savings(rho, L, M, D, dkv)},
        {"reported_gflops_saved", 12.3},
        {"selection_overhead_charged", selection_overhead(M, D, 3, Lq)},
        {"selection_overhead_literal", selection_overhead_literal(M, D, 3, Lq)},
        {"memory_footprint_bf16_bytes", memory_footprint(L, M, dkv, D, 2)},
        {"reported_footprint_mb", 85.8},
        {"reported_reuse_ratio", 0.31},
        {"reported_encoder_bypass_rate", 0.83},
        {"reported_step_speedup", 1.52},
    };
}

namespace {

json phase_aggregate_to_json(const PhaseAggregate& agg) {
    return json{{"steps", agg.steps},
                {"r_pos", agg.mean_r_pos},
                {"r_align", agg.mean_r_align},
                {"delta_r", agg.mean_delta_r},
                {"d_sem", agg.mean_d_sem},
                {"reuse_ratio", agg.mean_reuse_ratio},
                {"bypass_rate", agg.bypass_rate}};
}

json report_aggregate_to_json(const EpisodeReport& report) {
    json per_phase = json::object();
    for (const auto& [kind, agg] : report.per_phase)
        per_phase[phase_kind_name(kind)] = phase_aggregate_to_json(agg);
    return json{{"overall", phase_aggregate_to_json(report.overall)},
                {"per_phase", per_phase},
                {"total_flops_saved", report.total_flops_saved}};
}

}  // namespace

json episode_to_json(const RunConfig& cfg, const EpisodeResult& result) {
    json steps = json::array();
    for (const StepTrace& s : result.steps) {
        json layers = json::array();
        for (const LayerTrace& lt : s.layers)
            layers.push_back({{"rho", lt.rho}, {"reused", lt.reused}, {"entropy", lt.entropy}});
        steps.push_back({{"step", s.metrics.step},
                         {"phase", phase_kind_name(s.metrics.phase)},
                         {"r_pos", s.metrics.r_pos},
                         {"r_align", s.metrics.r_align},
                         {"delta_r", s.metrics.delta_r},
                         {"d_sem", s.metrics.d_sem},
                         {"reuse_ratio", s.metrics.reuse_ratio},
                         {"flops_saved", s.metrics.flops_saved},
                         {"bypass", s.metrics.bypass ? 1 : 0},
                         {"action_scores", s.action_scores},
                         {"layers", layers},
                         {"reuse_sites", s.reuse_sites},
                         {"reuse_site_sim", s.reuse_site_sim}});
    }
    return json{{"config", config_to_json(cfg)},
                {"seed", result.seed},
                {"steps", steps},
                {"aggregate", report_aggregate_to_json(result.report)},
                {"reference_fullscale", fullscale_reference()}};
}

std::string episode_to_csv(const EpisodeResult& result) {
    std::vector<StepMetrics> rows;
    rows.reserve(result.steps.size());
    for (const StepTrace& s : result.steps)
        rows.push_back(s.metrics);
    return metrics_to_csv(rows);
}

json aggregate_to_json(const RunConfig& cfg, const std::vector<EpisodeResult>& results) {
    json per_seed = json::array();
    double reuse = 0.0, delta_r = 0.0, bypass = 0.0;
    uint64_t flops = 0;
    for (const EpisodeResult& r : results) {
        per_seed.push_back({{"seed", r.seed}, {"aggregate", report_aggregate_to_json(r.report)}});
        reuse += r.report.overall.mean_reuse_ratio;
        delta_r += r.report.overall.mean_delta_r;
        bypass += r.report.overall.bypass_rate;
        flops += r.report.total_flops_saved;
    }
    const double n = results.empty() ? 1.0 : static_cast<double>(results.size());
    return json{{"config", config_to_json(cfg)},
                {"per_seed", per_seed},
                {"mean",
                 {{"reuse_ratio", reuse / n},
                  {"delta_r", delta_r / n},
                  {"bypass_rate", bypass / n},
                  {"total_flops_saved", flops}}},
                {"reference_fullscale", fullscale_reference()}};
}

CompareResult compare_reports(const json& report_a, const json& report_b) {
    for (const char* key : {"config", "seed", "steps"})
        if (!report_a.contains(key) || !report_b.contains(key))
            throw ComparisonError(std::string("compare: reports must contain '") + key + "'");
    if (report_a.at("seed") != report_b.at("seed"))
        throw ComparisonError("compare: reports come from different seeds");
    for (const char* section : {"scene", "trajectory", "camera", "model"})
        if (report_a.at("config").at(section) != report_b.at("config").at(section))
            throw ComparisonError(std::string("compare: reports differ in config section '") + section + "'");
    const auto& steps_a = report_a.at("steps");
    const auto& steps_b = report_b.at("steps");
    if (steps_a.size() != steps_b.size())
        throw ComparisonError("compare: reports differ in step count");

    CompareResult result;
    double reuse_sum = 0.0;
    for (size_t i = 0; i < steps_a.size(); ++i) {
        const auto scores_a = steps_a[i].at("action_scores").get<std::vector<double>>();
        const auto scores_b = steps_b[i].at("action_scores").get<std::vector<double>>();
        if (scores_a.size() != scores_b.size())
            throw ComparisonError("compare: action score lengths differ");
        StepDivergence d;
        d.step = steps_a[i].at("step").get<int>();
        for (size_t a = 0; a < scores_a.size(); ++a)
            d.action_gap = std::max(d.action_gap, std::abs(scores_a[a] - scores_b[a]));
        d.reuse_delta = steps_a[i].at("reuse_ratio").get<double>() - steps_b[i].at("reuse_ratio").get<double>();
        reuse_sum += d.reuse_delta;
        result.max_action_gap = std::max(result.max_action_gap, d.action_gap);
        result.steps.push_back(d);
    }
    result.mean_reuse_delta = result.steps.empty() ? 0.0 : reuse_sum / static_cast<double>(result.steps.size());
    return result;
}

json compare_to_json(const CompareResult& result) {
    json steps = json::array();
    for (const StepDivergence& d : result.steps)
        steps.push_back({{"step", d.step}, {"action_gap", d.action_gap}, {"reuse_delta", d.reuse_delta}});
    return json{{"steps", steps},
                {"max_action_gap", result.max_action_gap},
                {"mean_reuse_delta", result.mean_reuse_delta}};
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw Error("cannot open '" + tmp + "' for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out)
            throw Error("short write to '" + tmp + "'");
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw Error("cannot rename '" + tmp + "' to '" + path + "'");
}

}  // namespace navcache
