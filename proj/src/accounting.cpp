// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#include "navcache/accounting.hpp"

#include <cmath>
#include <cstdio>

namespace navcache {

ReuseGap reuse_gap(const Observation& current, const Observation& previous,
                   const std::vector<RemapResult>& remaps, double epsilon) {
    if (!current.features.same_shape(previous.features))
        throw DimensionError("reuse_gap: observations differ in token grid shape");
    if (remaps.size() != static_cast<size_t>(current.features.rows))
        throw DimensionError("reuse_gap: remap length != token count");

    const int m = current.features.rows;
    ReuseGap gap;
    for (int i = 0; i < m; ++i) {
        const double r_pos = cosine(current.features.row(i), previous.features.row(i), epsilon);
        const double r_align = remaps[static_cast<size_t>(i)].in_view()
                                   ? cosine(current.features.row(i),
                                            previous.features.row(remaps[static_cast<size_t>(i)].index), epsilon)
                                   : r_pos;
        gap.r_pos_mean += r_pos;
        gap.r_align_mean += r_align;
    }
    gap.r_pos_mean /= m;
    gap.r_align_mean /= m;
    gap.delta_r = gap.r_align_mean - gap.r_pos_mean;
    return gap;
}

double flop_savings(double rho, double layers, double tokens, double feature_dim, double kv_dim) {
    return 4.0 * rho * layers * tokens * feature_dim * kv_dim;
}

double selection_overhead(double tokens, double feature_dim, double k_window, double lang_queries) {
    return tokens * (feature_dim + k_window * k_window * feature_dim + lang_queries * feature_dim);
}

double selection_overhead_literal(double tokens, double feature_dim, double k_window, double lang_queries) {
    return tokens * (feature_dim + k_window * k_window + lang_queries * feature_dim);
}

double memory_footprint(double layers, double tokens, double kv_dim, double feature_dim,
                        double bytes_per_scalar) {
    return 2.0 * layers * tokens * kv_dim * bytes_per_scalar + tokens * feature_dim * bytes_per_scalar;
}

namespace {

void accumulate(PhaseAggregate& agg, const StepMetrics& s) {
    agg.steps += 1;
    agg.mean_r_pos += s.r_pos;
    agg.mean_r_align += s.r_align;
    agg.mean_delta_r += s.delta_r;
    agg.mean_d_sem += s.d_sem;
    agg.mean_reuse_ratio += s.reuse_ratio;
    agg.bypass_rate += s.bypass ? 1.0 : 0.0;
}

void finalize(PhaseAggregate& agg) {
    if (agg.steps == 0)
        return;
    agg.mean_r_pos /= agg.steps;
    agg.mean_r_align /= agg.steps;
    agg.mean_delta_r /= agg.steps;
    agg.mean_d_sem /= agg.steps;
    agg.mean_reuse_ratio /= agg.steps;
    agg.bypass_rate /= agg.steps;
}

}  // namespace

EpisodeReport aggregate_episode(const std::vector<StepMetrics>& steps) {
    if (steps.empty())
        throw EmptyEpisode("aggregate_episode: no step metrics");
    EpisodeReport report;
    report.steps = steps;
    for (const StepMetrics& s : steps) {
        accumulate(report.overall, s);
        accumulate(report.per_phase[s.phase], s);
        report.total_flops_saved += s.flops_saved;
        report.d_sem_trace.push_back(s.d_sem);
    }
    finalize(report.overall);
    for (auto& [kind, agg] : report.per_phase)
        finalize(agg);
    return report;
}

std::string metrics_to_csv(const std::vector<StepMetrics>& steps) {
    std::string out(kCsvHeader);
    out += '\n';
    char buf[256];
    for (const StepMetrics& s : steps) {
        std::snprintf(buf, sizeof(buf), "%d,%s,%.9g,%.9g,%.9g,%.9g,%.9g,%llu,%d\n", s.step,
                      phase_kind_name(s.phase).c_str(), s.r_pos, s.r_align, s.delta_r, s.d_sem, s.reuse_ratio,
                      static_cast<unsigned long long>(s.flops_saved), s.bypass ? 1 : 0);
        out += buf;
    }
    return out;
}

}  // namespace navcache
