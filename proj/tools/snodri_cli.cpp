#include "snodri/config.hpp"
#include "snodri/csv.hpp"
#include "snodri/errors.hpp"
#include "snodri/pipeline.hpp"
#include "snodri/stats.hpp"
#include "snodri/svgplot.hpp"
#include "snodri/synth.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace {

using namespace snodri;

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> sets;
    std::string in_path;
    std::string out_path;
};

void add_common(CLI::App* cmd, CommonOpts& o, bool with_in) {
    cmd->add_option("-c,--config", o.config_path, "TOML config file");
    cmd->add_option("--set", o.sets, "override a config key, key=value")->type_name("KEY=VALUE");
    if (with_in)
        cmd->add_option("--in", o.in_path, "input table CSV, overrides io.input");
    cmd->add_option("--out", o.out_path, "output path, default under io.output_dir");
}

ConfigMap load_map(const CommonOpts& o) {
    ConfigMap map;
    if (!o.config_path.empty()) map = parse_config_file(o.config_path);
    for (const std::string& kv : o.sets) apply_override(map, kv);
    if (!o.in_path.empty()) apply_override(map, "io.input=" + o.in_path);
    return map;
}

void ensure_parent(const std::string& path) {
    std::filesystem::path parent = std::filesystem::path(path).parent_path();
    if (parent.empty()) return;
    std::error_code ec;
    std::filesystem::create_directories(parent, ec);
    if (ec) throw DataError("cannot create directory " + parent.string());
}

/// Explicit --out wins; otherwise the same name a full run would use.
std::string artifact_path(const PipelineConfig& cfg, const std::string& out_override,
                          const char* prefix, const char* ext) {
    if (!out_override.empty()) {
        ensure_parent(out_override);
        return out_override;
    }
    std::filesystem::path dir(cfg.output_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw DataError("cannot create output directory " + cfg.output_dir);
    return (dir / (std::string(prefix) + "_" + cfg.hash_suffix() + ext)).string();
}

void report(const std::string& path) { std::cout << "wrote " << path << "\n"; }

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open output file: " + path);
    return out;
}

void cmd_synth(const CommonOpts& o) {
    ConfigMap map = load_map(o);
    SynthConfig scfg = make_synth_config(map);
    if (o.out_path.empty()) throw ConfigError("synth needs --out <csv path>");
    SynthResult r = generate_synthetic_basin(scfg);
    MonthlySeries mask = r.mask;
    mask.variable_id = "DROUGHT";
    r.table.add(std::move(mask));
    ensure_parent(o.out_path);
    csv::write_table_file(o.out_path, r.table,
                          {"synthetic basin " + scfg.basin_id + " seed " +
                           std::to_string(scfg.seed)});
    report(o.out_path);
}

void cmd_ingest(const CommonOpts& o) {
    PipelineConfig cfg = make_pipeline_config(load_map(o));
    BasinTable table = pipeline_ingest(cfg);
    std::string path = artifact_path(cfg, o.out_path, "ingest", ".csv");
    csv::write_table_file(path, table, emit::stamp_comments(cfg, table.basin_id()));
    report(path);
}

void cmd_spi(const CommonOpts& o) {
    PipelineConfig cfg = make_pipeline_config(load_map(o));
    BasinTable raw = pipeline_ingest(cfg);
    std::vector<std::string> spi_ids;
    BasinTable derived = pipeline_derive(cfg, raw, &spi_ids);
    std::vector<MonthlySeries> cols;
    for (const std::string& id : spi_ids) cols.push_back(derived.at(id));
    std::string path = artifact_path(cfg, o.out_path, "spi", ".csv");
    std::ofstream out = open_out(path);
    csv::write_columns(out, cols, emit::stamp_comments(cfg, raw.basin_id()));
    report(path);
}

void cmd_snowfrac(const CommonOpts& o) {
    PipelineConfig cfg = make_pipeline_config(load_map(o));
    BasinTable raw = pipeline_ingest(cfg);
    BasinTable derived = pipeline_derive(cfg, raw);
    std::string path = artifact_path(cfg, o.out_path, "snowfrac", ".csv");
    std::ofstream out = open_out(path);
    csv::write_columns(out, {derived.at("SNOWFRAC")},
                       emit::stamp_comments(cfg, raw.basin_id()));
    report(path);
}

void cmd_select_features(const CommonOpts& o) {
    PipelineConfig cfg = make_pipeline_config(load_map(o));
    BasinTable raw = pipeline_ingest(cfg);
    FeatureSelection sel = pipeline_select_features(cfg, raw);
    std::string path = artifact_path(cfg, o.out_path, "feature_selection", ".csv");
    emit::features(path, sel, cfg, raw.basin_id());
    report(path);
}

void cmd_train(const CommonOpts& o) {
    PipelineConfig cfg = make_pipeline_config(load_map(o));
    BasinTable raw = pipeline_ingest(cfg);
    FitOutput fit = pipeline_fit(cfg, raw);
    std::string path = artifact_path(cfg, o.out_path, "model", ".json");
    emit::model(path, fit, cfg, raw.basin_id());
    report(path);
}

void cmd_weights(const CommonOpts& o) {
    PipelineConfig cfg = make_pipeline_config(load_map(o));
    BasinTable raw = pipeline_ingest(cfg);
    FitOutput fit = pipeline_fit(cfg, raw);
    std::string path = artifact_path(cfg, o.out_path, "weights", ".csv");
    emit::weights(path, fit, cfg, raw.basin_id());
    report(path);
}

void cmd_index(const CommonOpts& o) {
    PipelineConfig cfg = make_pipeline_config(load_map(o));
    BasinTable raw = pipeline_ingest(cfg);
    FitOutput fit = pipeline_fit(cfg, raw);
    IndexSeries index = pipeline_index(cfg, fit);
    std::string path = artifact_path(cfg, o.out_path, "index", ".csv");
    emit::index_csv(path, fit, index, cfg, raw.basin_id());
    report(path);
}

void cmd_evaluate(const CommonOpts& o) {
    PipelineConfig cfg = make_pipeline_config(load_map(o));
    BasinTable raw = pipeline_ingest(cfg);
    FitOutput fit = pipeline_fit(cfg, raw);
    IndexSeries index = pipeline_index(cfg, fit);
    EvaluationOutput eval = pipeline_evaluate(cfg, fit, index);
    std::string path = artifact_path(cfg, o.out_path, "evaluation", ".txt");
    emit::evaluation(path, eval.report, cfg, raw.basin_id());
    report(path);
}

void cmd_plot(const CommonOpts& o) {
    PipelineConfig cfg = make_pipeline_config(load_map(o));
    BasinTable raw = pipeline_ingest(cfg);
    FitOutput fit = pipeline_fit(cfg, raw);
    IndexSeries index = pipeline_index(cfg, fit);
    EvaluationOutput eval = pipeline_evaluate(cfg, fit, index);
    std::string path = artifact_path(cfg, o.out_path, "snodri", ".svg");
    emit::plot(path, fit, index, eval.swe_anomaly, cfg, raw.basin_id());
    report(path);
}

void cmd_run(const CommonOpts& o) {
    PipelineConfig cfg = make_pipeline_config(load_map(o));
    if (!o.out_path.empty()) cfg.output_dir = o.out_path;
    PipelineResult result = pipeline_run(cfg);
    const PipelineArtifacts& a = result.artifacts;
    for (const std::string& p : {a.model_path, a.weights_path, a.features_path, a.index_path,
                                 a.evaluation_path, a.plot_path})
        report(p);
    std::cout << "corr_swe_anomaly " << stats::format_double(result.report.pearson_corr_swe_anomaly)
              << " corr_discharge " << stats::format_double(result.report.pearson_corr_discharge)
              << " sign_coincidence " << stats::format_double(result.report.sign_coincidence)
              << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"composite snow drought index toolkit"};
    app.require_subcommand(1);

    struct Verb {
        const char* name;
        const char* help;
        bool with_in;
        void (*fn)(const CommonOpts&);
    };
    const Verb verbs[] = {
        {"synth", "generate a synthetic basin table", false, cmd_synth},
        {"ingest", "read a basin CSV and write it back as monthly columns", true, cmd_ingest},
        {"spi", "standardized precipitation index per configured timescale", true, cmd_spi},
        {"snowfrac", "wet-bulb snow fraction of monthly precipitation", true, cmd_snowfrac},
        {"select-features", "rank candidate variables by forest importance", true,
         cmd_select_features},
        {"train", "fit the full model and write it as JSON", true, cmd_train},
        {"weights", "mutual-information weights of the fitted model", true, cmd_weights},
        {"index", "compose the index over the full record", true, cmd_index},
        {"evaluate", "score the index against SWE anomaly and discharge", true, cmd_evaluate},
        {"plot", "render the index and indicators as an SVG", true, cmd_plot},
        {"run", "all stages; writes every artifact under io.output_dir", true, cmd_run},
    };

    std::vector<CommonOpts> opts(std::size(verbs));
    for (std::size_t i = 0; i < std::size(verbs); ++i) {
        CLI::App* cmd = app.add_subcommand(verbs[i].name, verbs[i].help);
        add_common(cmd, opts[i], verbs[i].with_in);
        auto fn = verbs[i].fn;
        const CommonOpts* o = &opts[i];
        cmd->callback([fn, o] { fn(*o); });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const snodri::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const snodri::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const snodri::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
