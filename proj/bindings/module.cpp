// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>

#include "navcache/pipeline.hpp"
#include "navcache/semantics.hpp"

namespace py = pybind11;
using namespace navcache;

namespace {

Matrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty())
        return Matrix{};
    Matrix m(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()));
    for (size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.front().size())
            throw DimensionError("matrix rows differ in length");
        std::copy(rows[r].begin(), rows[r].end(), m.row(static_cast<int>(r)).begin());
    }
    return m;
}

std::vector<RemapResult> remaps_from_indices(const std::vector<int>& indices) {
    std::vector<RemapResult> remaps;
    remaps.reserve(indices.size());
    for (int idx : indices)
        remaps.push_back(idx < 0 ? RemapResult::out_of_view() : RemapResult::at(idx));
    return remaps;
}

std::string run_json(const std::string& config_text) {
    const RunConfig cfg = config_from_json(nlohmann::json::parse(config_text));
    EpisodeRunner runner(cfg);
    std::vector<EpisodeResult> results;
    nlohmann::json reports = nlohmann::json::array();
    for (uint64_t seed : cfg.seeds) {
        results.push_back(runner.run(seed));
        reports.push_back(episode_to_json(cfg, results.back()));
    }
    nlohmann::json out{{"aggregate", aggregate_to_json(cfg, results)}, {"reports", reports}};
    return out.dump();
}

std::string compare_json(const std::string& report_a, const std::string& report_b) {
    const CompareResult result =
        compare_reports(nlohmann::json::parse(report_a), nlohmann::json::parse(report_b));
    return compare_to_json(result).dump();
}

std::string preset_json(const std::string& name) { return config_to_json(preset_config(name)).dump(); }

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "View-aligned dual-gated KV token caching: core operations and the episode pipeline";

    py::register_exception<Error>(m, "NavcacheError");

    py::class_<Intrinsics>(m, "Intrinsics")
        .def(py::init([](double fx, double fy, double cx, double cy, int width, int height, int patch) {
                 Intrinsics k{fx, fy, cx, cy, width, height, patch};
                 k.validate();
                 return k;
             }),
             py::arg("fx"), py::arg("fy"), py::arg("cx"), py::arg("cy"), py::arg("width"), py::arg("height"),
             py::arg("patch"))
        .def_readonly("fx", &Intrinsics::fx)
        .def_readonly("fy", &Intrinsics::fy)
        .def_readonly("cx", &Intrinsics::cx)
        .def_readonly("cy", &Intrinsics::cy)
        .def_readonly("width", &Intrinsics::width)
        .def_readonly("height", &Intrinsics::height)
        .def_readonly("patch", &Intrinsics::patch)
        .def_property_readonly("tokens", &Intrinsics::token_count);

    m.def(
        "back_project",
        [](std::pair<double, double> u, double depth, const Intrinsics& k) {
            const Vec3 p = back_project(Pixel{u.first, u.second}, depth, k);
            return std::make_tuple(p.x, p.y, p.z);
        },
        py::arg("u"), py::arg("depth"), py::arg("intrinsics"));

    m.def(
        "project",
        [](std::tuple<double, double, double> p, const Intrinsics& k) -> py::object {
            const auto px = project(Vec3{std::get<0>(p), std::get<1>(p), std::get<2>(p)}, k);
            if (!px)
                return py::none();
            return py::make_tuple(px->x, px->y);
        },
        py::arg("point"), py::arg("intrinsics"), "Returns (u, v) or None when the point is behind the camera");

    m.def(
        "cosine",
        [](const std::vector<double>& a, const std::vector<double>& b, double epsilon) {
            return cosine(std::span<const double>(a), std::span<const double>(b), epsilon);
        },
        py::arg("a"), py::arg("b"), py::arg("epsilon") = 1e-6);

    m.def(
        "visual_gate",
        [](const std::vector<std::vector<double>>& features, const std::vector<std::vector<double>>& cached,
           const std::vector<int>& remap, double tau_vis, double epsilon) {
            return visual_gate(matrix_from_rows(features), matrix_from_rows(cached),
                               remaps_from_indices(remap), tau_vis, epsilon);
        },
        py::arg("features"), py::arg("cached"), py::arg("remap"), py::arg("tau_vis") = 0.85,
        py::arg("epsilon") = 1e-6, "remap entries < 0 mean out of view");

    m.def("semantic_gate", &semantic_gate, py::arg("scores"), py::arg("scores_prev"), py::arg("tau_abs") = 0.70,
          py::arg("tau_delta") = 0.30);

    m.def("fuse", &fuse, py::arg("m_vis"), py::arg("m_sem"));

    m.def(
        "frame_gate",
        [](const std::vector<double>& pooled, const std::vector<double>& pooled_prev, double tau_frame,
           double epsilon) { return frame_gate(pooled, pooled_prev, tau_frame, epsilon); },
        py::arg("pooled"), py::arg("pooled_prev"), py::arg("tau_frame") = 0.95, py::arg("epsilon") = 1e-6);

    m.def(
        "relevance_from_attention",
        [](const std::vector<std::vector<double>>& rows, double epsilon) {
            return relevance_from_attention(matrix_from_rows(rows), epsilon);
        },
        py::arg("attention"), py::arg("epsilon") = 1e-6);

    m.def("top_k_set", &top_k_set, py::arg("scores"), py::arg("k"));
    m.def("focus_shift", &focus_shift, py::arg("current"), py::arg("previous"));

    m.def(
        "layer_budget",
        [](double entropy, double rho_min, double rho_max, double alpha) {
            return layer_budget(entropy, BudgetConfig{rho_min, rho_max, alpha, BudgetMode::kPerLayer});
        },
        py::arg("entropy"), py::arg("rho_min") = 0.0, py::arg("rho_max") = 0.90, py::arg("alpha") = 0.5);

    m.def(
        "attention_entropy",
        [](const std::vector<std::vector<double>>& rows, double epsilon) {
            return attention_entropy(matrix_from_rows(rows), epsilon);
        },
        py::arg("attention"), py::arg("epsilon") = 1e-6);

    m.def("enforce_budget", &enforce_budget, py::arg("mask"), py::arg("align_scores"), py::arg("rho"));

    m.def(
        "apply_rope",
        [](const std::vector<double>& vec, int position, double rope_base) {
            return apply_rope(vec, position, rope_base);
        },
        py::arg("vec"), py::arg("position"), py::arg("rope_base") = 10000.0);

    m.def("flop_savings", &flop_savings, py::arg("rho"), py::arg("layers"), py::arg("tokens"),
          py::arg("feature_dim"), py::arg("kv_dim"));
    m.def("selection_overhead", &selection_overhead, py::arg("tokens"), py::arg("feature_dim"),
          py::arg("k_window"), py::arg("lang_queries"));
    m.def("selection_overhead_literal", &selection_overhead_literal, py::arg("tokens"), py::arg("feature_dim"),
          py::arg("k_window"), py::arg("lang_queries"));
    m.def("memory_footprint", &memory_footprint, py::arg("layers"), py::arg("tokens"), py::arg("kv_dim"),
          py::arg("feature_dim"), py::arg("bytes_per_scalar") = 4.0);

    m.def("preset_names", &preset_names);
    m.def("preset_json", &preset_json, py::arg("name"), "Full run configuration of a preset as a JSON string");
    m.def("run_json", &run_json, py::arg("config_json"),
          "Run every seed of the configuration; returns {aggregate, reports} as a JSON string");
    m.def("compare_json", &compare_json, py::arg("report_a"), py::arg("report_b"),
          "Divergence summary between two per-seed report JSON strings");
}
