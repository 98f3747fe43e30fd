// Copyright (C) 2026 navcache authors
// SPDX-License-Identifier: Apache-2.0
//
#include "navcache/cli_app.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "navcache/pipeline.hpp"

namespace navcache::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInvariant = 3;

struct RunOptions {
    std::string config_path;
    std::string mode;
    std::optional<uint64_t> seed;
    std::string out_dir = "out";
    std::string format = "both";
};

RunConfig load_with_overrides(const RunOptions& opt) {
    RunConfig cfg = load_config_file(opt.config_path);
    if (!opt.mode.empty())
        cfg.mode = run_mode_from_name(opt.mode);
    if (opt.seed)
        cfg.seeds = {*opt.seed};
    cfg.validate();
    return cfg;
}

std::vector<EpisodeResult> run_all_seeds(const RunConfig& cfg) {
    EpisodeRunner runner(cfg);
    std::vector<EpisodeResult> results;
    results.reserve(cfg.seeds.size());
    for (uint64_t seed : cfg.seeds)
        results.push_back(runner.run(seed));
    return results;
}

void write_reports(const RunConfig& cfg, const std::vector<EpisodeResult>& results, const std::string& out_dir,
                   const std::string& format) {
    fs::create_directories(out_dir);
    const std::string mode = run_mode_name(cfg.mode);
    for (const EpisodeResult& r : results) {
        const std::string stem = (fs::path(out_dir) / (mode + "_seed" + std::to_string(r.seed))).string();
        if (format == "csv" || format == "both")
            write_text_atomic(stem + ".csv", episode_to_csv(r));
        if (format == "json" || format == "both")
            write_text_atomic(stem + ".json", episode_to_json(cfg, r).dump(2) + "\n");
    }
    write_text_atomic((fs::path(out_dir) / (mode + "_aggregate.json")).string(),
                      aggregate_to_json(cfg, results).dump(2) + "\n");
}

void print_summary(const RunConfig& cfg, const std::vector<EpisodeResult>& results) {
    const std::string mode = run_mode_name(cfg.mode);
    for (const EpisodeResult& r : results) {
        std::printf("mode=%s seed=%llu steps=%zu reuse_ratio=%.4f delta_r=%.4f bypass_rate=%.3f\n",
                    mode.c_str(), static_cast<unsigned long long>(r.seed), r.steps.size(),
                    r.report.overall.mean_reuse_ratio, r.report.overall.mean_delta_r,
                    r.report.overall.bypass_rate);
    }
}

int command_run(const RunOptions& opt) {
    const RunConfig cfg = load_with_overrides(opt);
    const auto results = run_all_seeds(cfg);
    write_reports(cfg, results, opt.out_dir, opt.format);
    print_summary(cfg, results);
    return kExitOk;
}

/// Sets a dotted path like "gates.tau_vis" inside a config document.
void set_json_path(json& doc, const std::string& path, const json& value) {
    json* node = &doc;
    size_t start = 0;
    while (true) {
        const size_t dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
        if (key.empty())
            throw ConfigError("sweep: empty key segment in '" + path + "'");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

json parse_scalar(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error&) {
        return json(text);  // bare string such as a mode name
    }
}

struct SweepAxis {
    std::string path;
    std::vector<json> values;
};

SweepAxis parse_axis(const std::string& spec) {
    const size_t eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 >= spec.size())
        throw ConfigError("sweep: --param expects key.path=v1,v2,... got '" + spec + "'");
    SweepAxis axis;
    axis.path = spec.substr(0, eq);
    size_t start = eq + 1;
    while (start <= spec.size()) {
        const size_t comma = spec.find(',', start);
        const std::string item = spec.substr(start, comma == std::string::npos ? comma : comma - start);
        if (item.empty())
            throw ConfigError("sweep: empty value in '" + spec + "'");
        axis.values.push_back(parse_scalar(item));
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    return axis;
}

std::string combo_name(const std::vector<SweepAxis>& axes, const std::vector<size_t>& pick) {
    std::string name;
    for (size_t a = 0; a < axes.size(); ++a) {
        if (!name.empty())
            name += "__";
        json v = axes[a].values[pick[a]];
        std::string vs = v.is_string() ? v.get<std::string>() : v.dump();
        name += axes[a].path + "=" + vs;
    }
    return name;
}

int command_sweep(const std::string& config_path, const std::vector<std::string>& param_specs,
                  const std::string& out_dir, const std::string& format) {
    if (param_specs.empty())
        throw ConfigError("sweep: at least one --param axis is required");
    std::ifstream in(config_path);
    if (!in)
        throw ConfigError("cannot open config file '" + config_path + "'");
    json base;
    try {
        base = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }

    std::vector<SweepAxis> axes;
    for (const std::string& spec : param_specs)
        axes.push_back(parse_axis(spec));

    json summary = json::array();
    std::vector<size_t> pick(axes.size(), 0);
    while (true) {
        json doc = base;
        for (size_t a = 0; a < axes.size(); ++a)
            set_json_path(doc, axes[a].path, axes[a].values[pick[a]]);
        const RunConfig cfg = config_from_json(doc);
        const std::string name = combo_name(axes, pick);
        const auto results = run_all_seeds(cfg);
        const std::string combo_dir = (fs::path(out_dir) / name).string();
        write_reports(cfg, results, combo_dir, format);

        double reuse = 0.0, delta_r = 0.0;
        for (const EpisodeResult& r : results) {
            reuse += r.report.overall.mean_reuse_ratio;
            delta_r += r.report.overall.mean_delta_r;
        }
        reuse /= static_cast<double>(results.size());
        delta_r /= static_cast<double>(results.size());
        json entry{{"combo", name}, {"mean_reuse_ratio", reuse}, {"mean_delta_r", delta_r}};
        for (size_t a = 0; a < axes.size(); ++a)
            entry["params"][axes[a].path] = axes[a].values[pick[a]];
        summary.push_back(entry);
        std::printf("sweep %s reuse_ratio=%.4f delta_r=%.4f\n", name.c_str(), reuse, delta_r);

        size_t a = 0;
        for (; a < axes.size(); ++a) {
            if (++pick[a] < axes[a].values.size())
                break;
            pick[a] = 0;
        }
        if (a == axes.size())
            break;
    }
    fs::create_directories(out_dir);
    write_text_atomic((fs::path(out_dir) / "sweep_summary.json").string(), summary.dump(2) + "\n");
    return kExitOk;
}

int command_compare(const std::string& path_a, const std::string& path_b, const std::string& out_path) {
    auto load = [](const std::string& path) {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open report '" + path + "'");
        try {
            return json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("report parse error: ") + e.what());
        }
    };
    const CompareResult result = compare_reports(load(path_a), load(path_b));
    std::printf("step  action_gap    reuse_delta\n");
    for (const StepDivergence& d : result.steps)
        std::printf("%4d  %12.6e  %+.4f\n", d.step, d.action_gap, d.reuse_delta);
    std::printf("max_action_gap=%.6e mean_reuse_delta=%+.4f\n", result.max_action_gap, result.mean_reuse_delta);
    if (!out_path.empty())
        write_text_atomic(out_path, compare_to_json(result).dump(2) + "\n");
    return kExitOk;
}

int command_presets(const std::string& dump_name) {
    if (dump_name.empty()) {
        for (const std::string& name : preset_names())
            std::printf("%s\n", name.c_str());
        return kExitOk;
    }
    const RunConfig cfg = preset_config(dump_name);
    std::printf("%s\n", config_to_json(cfg).dump(2).c_str());
    return kExitOk;
}

}  // namespace

int run_main(const std::vector<std::string>& args) {
    CLI::App app{"View-aligned dual-gated KV token caching on synthetic navigation episodes"};
    app.require_subcommand(1);

    RunOptions run_opt;
    uint64_t seed_override = 0;
    auto* run = app.add_subcommand("run", "Run episodes for every seed and write CSV/JSON reports");
    run->add_option("--config", run_opt.config_path, "Run configuration (JSON)")->required();
    run->add_option("--mode", run_opt.mode, "Override mode: full|no_cache|no_remap|no_semantic_gate|no_visual_gate");
    auto* seed_opt = run->add_option("--seed", seed_override, "Run a single seed instead of the config list");
    run->add_option("--out", run_opt.out_dir, "Output directory (default out)");
    run->add_option("--format", run_opt.format, "Report format")->check(CLI::IsMember({"csv", "json", "both"}));

    std::string sweep_config, sweep_out = "out", sweep_format = "both";
    std::vector<std::string> sweep_params;
    auto* sweep = app.add_subcommand("sweep", "Cartesian sweep over config values");
    sweep->add_option("--config", sweep_config, "Base configuration (JSON)")->required();
    sweep->add_option("--param", sweep_params, "Axis as key.path=v1,v2,... (repeatable)")->required();
    sweep->add_option("--out", sweep_out, "Output directory (default out)");
    sweep->add_option("--format", sweep_format, "Report format")->check(CLI::IsMember({"csv", "json", "both"}));

    std::string cmp_a, cmp_b, cmp_out;
    auto* compare = app.add_subcommand("compare", "Divergence between two per-seed JSON reports");
    compare->add_option("report_a", cmp_a)->required();
    compare->add_option("report_b", cmp_b)->required();
    compare->add_option("--out", cmp_out, "Write the divergence table as JSON");

    std::string dump_name;
    auto* presets = app.add_subcommand("presets", "List scene presets or dump one as a full config");
    presets->add_option("--dump", dump_name, "Preset name to print as JSON");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (run->parsed()) {
            if (seed_opt->count() > 0)
                run_opt.seed = seed_override;
            return command_run(run_opt);
        }
        if (sweep->parsed())
            return command_sweep(sweep_config, sweep_params, sweep_out, sweep_format);
        if (compare->parsed())
            return command_compare(cmp_a, cmp_b, cmp_out);
        if (presets->parsed())
            return command_presets(dump_name);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const ComparisonError& e) {
        std::fprintf(stderr, "compare error: %s\n", e.what());
        return kExitConfig;
    } catch (const Error& e) {
        std::fprintf(stderr, "runtime invariant violated: %s\n", e.what());
        return kExitInvariant;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInvariant;
    }
    return kExitConfig;
}

}  // namespace navcache::cli
