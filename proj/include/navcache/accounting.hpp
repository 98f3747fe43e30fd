// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "navcache/gating.hpp"
#include "navcache/simulator.hpp"

namespace navcache {

struct StepMetrics {
    int step = 0;
    PhaseKind phase = PhaseKind::kCruising;
    double r_pos = 0.0;
    double r_align = 0.0;
    double delta_r = 0.0;
    double d_sem = 0.0;
    double reuse_ratio = 0.0;  // mean per-layer reused fraction
    uint64_t flops_saved = 0;
    bool bypass = false;
};

struct ReuseGap {
    double r_pos_mean = 0.0;
    double r_align_mean = 0.0;
    double delta_r = 0.0;
};

/// Mean position-wise and view-aligned cross-frame similarity plus their gap.
/// Out-of-view tokens contribute their position-wise value to the aligned
/// mean, so identity motion gives delta_r = 0 exactly.
ReuseGap reuse_gap(const Observation& current, const Observation& previous,
                   const std::vector<RemapResult>& remaps, double epsilon);

/// FLOPs avoided per step by reusing a fraction rho of K/V projections:
/// 4 * rho * L * M * D * d_kv.
double flop_savings(double rho, double layers, double tokens, double feature_dim, double kv_dim);

/// Cost of the reuse decision itself, charging the k^2 neighborhood
/// comparisons at feature cost D each: M * (D + k^2 * D + L_q * D).
double selection_overhead(double tokens, double feature_dim, double k_window, double lang_queries);

/// The uncharged variant M * (D + k^2 + L_q * D), reported alongside.
double selection_overhead_literal(double tokens, double feature_dim, double k_window, double lang_queries);

/// Cache bytes per frame: K and V blocks over every layer plus the encoder
/// feature cache: 2*L*M*d_kv*bytes + M*D*bytes.
double memory_footprint(double layers, double tokens, double kv_dim, double feature_dim,
                        double bytes_per_scalar);

struct PhaseAggregate {
    int steps = 0;
    double mean_r_pos = 0.0;
    double mean_r_align = 0.0;
    double mean_delta_r = 0.0;
    double mean_d_sem = 0.0;
    double mean_reuse_ratio = 0.0;
    double bypass_rate = 0.0;
};

struct EpisodeReport {
    std::vector<StepMetrics> steps;
    std::map<PhaseKind, PhaseAggregate> per_phase;
    PhaseAggregate overall;
    uint64_t total_flops_saved = 0;
    std::vector<double> d_sem_trace;
};

/// Arithmetic means per phase kind and overall. Throws EmptyEpisode on an
/// empty input.
EpisodeReport aggregate_episode(const std::vector<StepMetrics>& steps);

inline constexpr const char* kCsvHeader = "step,phase,r_pos,r_align,delta_r,d_sem,reuse_ratio,flops_saved,bypass";

/// Fixed-header CSV rows, one line per step, deterministic formatting.
std::string metrics_to_csv(const std::vector<StepMetrics>& steps);

}  // namespace navcache
