#include "snodri/pipeline.hpp"

#include "snodri/csv.hpp"
#include "snodri/errors.hpp"
#include "snodri/logging.hpp"
#include "snodri/rng.hpp"
#include "snodri/snowpart.hpp"
#include "snodri/spi.hpp"
#include "snodri/stats.hpp"
#include "snodri/svgplot.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

namespace snodri {

namespace {

/// Rethrow a stage failure with the stage and basin named, preserving the
/// error family so the process exit code stays meaningful.
template <typename F>
auto run_stage(const std::string& stage, const std::string& basin, F&& f) {
    const std::string where = "stage " + stage + " (basin " + basin + "): ";
    try {
        return f();
    } catch (const ConfigError& e) {
        throw ConfigError(where + e.what());
    } catch (const DataError& e) {
        throw DataError(where + e.what());
    } catch (const NumericError& e) {
        throw NumericError(where + e.what());
    }
}

MonthStamp earliest_start(const BasinTable& table) {
    long long lo = table.series().front().start.index();
    for (const MonthlySeries& s : table.series()) lo = std::min(lo, s.start.index());
    return MonthStamp::from_index(lo);
}

/// Target values matching the design-matrix rows, by stamp lookup.
std::vector<double> target_for_rows(const DesignMatrix& dm, const MonthlySeries& target) {
    std::vector<double> y(dm.rows());
    for (std::size_t i = 0; i < dm.rows(); ++i) {
        auto off = target.offset_of(dm.stamp(i));
        if (!off)
            throw DataError("target '" + target.variable_id + "' does not cover " +
                            dm.stamp(i).to_string());
        y[i] = target.values[*off];
    }
    return y;
}

void require_variable(const BasinTable& table, const std::string& id, const std::string& role) {
    if (!table.contains(id))
        throw MissingVariable("input table has no '" + id + "' column (" + role + ")");
}

std::ofstream open_artifact(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open output file: " + path);
    return out;
}

/// Derive SPI columns and the snow fraction onto a copy of the raw table.
/// All distribution fits stop at cfg.train_end; the mapped series span
/// the whole record.
BasinTable derive_table(const PipelineConfig& cfg, const BasinTable& raw,
                        std::vector<std::string>* spi_ids) {
    require_variable(raw, cfg.precip_id, "precipitation");
    require_variable(raw, cfg.temperature_id, "temperature");
    require_variable(raw, cfg.humidity_id, "specific humidity");
    require_variable(raw, cfg.pressure_id, "pressure");
    require_variable(raw, cfg.swe_id, "snow water equivalent");
    require_variable(raw, cfg.discharge_id, "discharge");
    for (const std::string& id : cfg.candidates) require_variable(raw, id, "feature candidate");

    const MonthlySeries& precip = raw.at(cfg.precip_id);
    if (cfg.train_end < precip.start || precip.last_stamp() < cfg.train_end)
        throw ConfigError("run.train_end " + cfg.train_end.to_string() +
                          " is outside the record " + precip.start.to_string() + ".." +
                          precip.last_stamp().to_string());

    BasinTable derived = raw;
    for (int k : cfg.spi_timescales) {
        SpiSeries spi = compute_spi(precip, k, cfg.train_end);
        if (spi_ids) spi_ids->push_back(spi.series.variable_id);
        derived.add(std::move(spi.series));
    }

    // Snow fraction needs the three met series on identical stamps.
    const MonthlySeries& tmp = raw.at(cfg.temperature_id);
    const MonthlySeries& spfh = raw.at(cfg.humidity_id);
    const MonthlySeries& pres = raw.at(cfg.pressure_id);
    long long lo = std::max({tmp.start.index(), spfh.start.index(), pres.start.index()});
    long long hi =
        std::min({tmp.last_stamp().index(), spfh.last_stamp().index(), pres.last_stamp().index()});
    if (lo > hi) throw DataError("temperature, humidity and pressure share no common months");
    MonthStamp first = MonthStamp::from_index(lo);
    MonthStamp last = MonthStamp::from_index(hi);
    derived.add(snow_fraction_series(restrict_series(tmp, first, last),
                                     restrict_series(spfh, first, last),
                                     restrict_series(pres, first, last), cfg.sigmoid));
    return derived;
}

FeatureSelection select_stage(const PipelineConfig& cfg, const BasinTable& table) {
    const BasinTable training = restrict_table(table, earliest_start(table), cfg.train_end);
    DesignMatrix x = align(training, cfg.candidates);
    std::vector<double> y_swe = target_for_rows(x, training.at(cfg.swe_id));
    std::vector<double> y_q = target_for_rows(x, training.at(cfg.discharge_id));

    ForestHyperparams hp = cfg.forest;
    hp.seed = seeds::derive_stage(cfg.seed, "features-swe");
    Forest forest_swe = train_forest(x.values, y_swe, cfg.candidates, hp);
    hp.seed = seeds::derive_stage(cfg.seed, "features-q");
    Forest forest_q = train_forest(x.values, y_q, cfg.candidates, hp);

    FeatureSelection sel;
    sel.importance_swe = average_importance({forest_importance(forest_swe)});
    sel.importance_q = average_importance({forest_importance(forest_q)});
    sel.selected = select_features(sel.importance_swe, sel.importance_q, cfg.top_k);
    return sel;
}

}  // namespace

BasinTable pipeline_ingest(const PipelineConfig& cfg, const std::string& path) {
    const std::string& input = path.empty() ? cfg.input : path;
    if (input.empty()) throw ConfigError("io.input is required (or pass an input path)");
    return run_stage("ingest", input, [&] {
        BasinTable raw;
        csv::RawTable parsed = csv::read_table_file(input);
        if (parsed.daily) {
            for (const DatedSeries& d : parsed.dated) {
                auto it = cfg.aggregation.find(d.variable_id);
                if (it == cfg.aggregation.end())
                    throw ConfigError("daily input needs aggregation." + d.variable_id +
                                      " = \"sum\" or \"mean\"");
                raw.add(aggregate_daily_to_monthly(d, it->second, MissingPolicy::reject));
            }
        } else {
            for (MonthlySeries& s : parsed.monthly) raw.add(std::move(s));
        }
        raw.set_basin_id(std::filesystem::path(input).stem().string());
        return raw;
    });
}

BasinTable pipeline_derive(const PipelineConfig& cfg, const BasinTable& raw,
                           std::vector<std::string>* spi_ids) {
    return run_stage("derive", raw.basin_id(), [&] { return derive_table(cfg, raw, spi_ids); });
}

FeatureSelection pipeline_select_features(const PipelineConfig& cfg, const BasinTable& table) {
    return run_stage("features", table.basin_id(), [&] { return select_stage(cfg, table); });
}

FitOutput pipeline_fit(const PipelineConfig& cfg, const BasinTable& raw) {
    const std::string& basin = raw.basin_id();
    FitOutput fit;

    fit.derived = pipeline_derive(cfg, raw, &fit.spi_ids);

    FeatureSelection sel = pipeline_select_features(cfg, fit.derived);
    fit.importance_swe = std::move(sel.importance_swe);
    fit.importance_q = std::move(sel.importance_q);
    fit.selected = std::move(sel.selected);

    fit.roster = fit.selected;
    fit.roster.insert(fit.roster.end(), fit.spi_ids.begin(), fit.spi_ids.end());
    fit.roster.push_back("SNOWFRAC");

    const BasinTable training = run_stage("train", basin, [&] {
        return restrict_table(fit.derived, earliest_start(fit.derived), cfg.train_end);
    });

    run_stage("train", basin, [&] {
        DesignMatrix dm = align(training, fit.roster);
        TrainConfig tc = cfg.train;
        tc.seed = seeds::derive_stage(cfg.seed, "train");
        fit.encoder = train_autoencoder(dm, tc);
        return 0;
    });

    run_stage("weights", basin, [&] {
        DesignMatrix dm = align(training, fit.roster);
        MonthlySeries bottleneck = encode(fit.encoder, dm);
        fit.weights = compute_weights(dm, bottleneck, cfg.mi_bins);

        IndexSeries trained = compose_index(dm, fit.weights);
        fit.index_params = trained.params;
        return 0;
    });

    return fit;
}

IndexSeries pipeline_index(const PipelineConfig&, const FitOutput& fit) {
    return run_stage("index", fit.derived.basin_id(), [&] {
        DesignMatrix dm_full = align(fit.derived, fit.roster, fit.encoder.column_params);
        return compose_index(dm_full, fit.weights, fit.index_params);
    });
}

EvaluationOutput pipeline_evaluate(const PipelineConfig& cfg, const FitOutput& fit,
                                   const IndexSeries& index) {
    return run_stage("evaluate", fit.derived.basin_id(), [&] {
        EvaluationOutput out;
        out.swe_anomaly = monthly_climatology_anomaly(fit.derived.at(cfg.swe_id));
        out.report = evaluate_index(index, out.swe_anomaly, fit.derived.at(cfg.discharge_id),
                                    cfg.event_windows);
        return out;
    });
}

namespace emit {

std::vector<std::string> stamp_comments(const PipelineConfig& cfg, const std::string& basin) {
    return {
        "config " + stats::to_hex(config_hash(cfg.raw)) + " seed " + std::to_string(cfg.seed),
        "basin " + basin,
    };
}

void model(const std::string& path, const FitOutput& fit, const PipelineConfig& cfg,
           const std::string& basin) {
    nlohmann::json j = nlohmann::json::parse(encoder_to_json(fit.encoder));
    j["provenance"] = {
        {"config_hash", stats::to_hex(config_hash(cfg.raw))},
        {"global_seed", cfg.seed},
        {"basin_id", basin},
        {"roster", fit.roster},
    };
    std::ofstream out = open_artifact(path);
    out << j.dump(2) << "\n";
    if (!out) throw DataError("failed writing " + path);
}

void weights(const std::string& path, const FitOutput& fit, const PipelineConfig& cfg,
             const std::string& basin) {
    // rank 1 = largest weight; ties broken by variable id
    std::vector<std::size_t> order(fit.weights.weights.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (fit.weights.weights[a] != fit.weights.weights[b])
            return fit.weights.weights[a] > fit.weights.weights[b];
        return fit.weights.variable_ids[a] < fit.weights.variable_ids[b];
    });
    std::vector<int> rank(order.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos)
        rank[order[pos]] = static_cast<int>(pos) + 1;

    std::ofstream out = open_artifact(path);
    for (const std::string& c : stamp_comments(cfg, basin)) out << "# " << c << "\n";
    out << "variable,mi_nats,mi_bits,rank\n";
    for (std::size_t i = 0; i < fit.weights.weights.size(); ++i) {
        double nats = fit.weights.weights[i];
        out << fit.weights.variable_ids[i] << "," << stats::format_double(nats) << ","
            << stats::format_double(nats / std::log(2.0)) << "," << rank[i] << "\n";
    }
    if (!out) throw DataError("failed writing " + path);
}

void features(const std::string& path, const FeatureSelection& sel, const PipelineConfig& cfg,
              const std::string& basin) {
    std::ofstream out = open_artifact(path);
    for (const std::string& c : stamp_comments(cfg, basin)) out << "# " << c << "\n";
    out << "# selected union, in rank order:";
    for (const std::string& id : sel.selected) out << " " << id;
    out << "\n";
    out << "variable,importance_swe,importance_q,selected\n";
    for (std::size_t i = 0; i < sel.importance_swe.feature_ids.size(); ++i) {
        const std::string& id = sel.importance_swe.feature_ids[i];
        bool in_union =
            std::find(sel.selected.begin(), sel.selected.end(), id) != sel.selected.end();
        out << id << "," << stats::format_double(sel.importance_swe.importances[i]) << ","
            << stats::format_double(sel.importance_q.importances[i]) << ","
            << (in_union ? 1 : 0) << "\n";
    }
    if (!out) throw DataError("failed writing " + path);
}

void index_csv(const std::string& path, const FitOutput& fit, const IndexSeries& index,
               const PipelineConfig& cfg, const std::string& basin) {
    std::uint64_t weight_hash =
        stats::fnv1a64(fit.weights.weights.data(), fit.weights.weights.size() * sizeof(double));
    std::vector<std::string> comments = stamp_comments(cfg, basin);
    comments.push_back("weights_hash " + stats::to_hex(weight_hash));
    std::ofstream out = open_artifact(path);
    csv::write_columns(out, {index.snodri, index.raw_weighted_sum}, comments);
    if (!out) throw DataError("failed writing " + path);
}

void evaluation(const std::string& path, const EvaluationReport& report,
                const PipelineConfig& cfg, const std::string& basin) {
    std::ofstream out = open_artifact(path);
    for (const std::string& c : stamp_comments(cfg, basin)) out << "# " << c << "\n";
    out << "overlap_months: " << report.overlap_months << "\n";
    out << "pearson_corr_swe_anomaly: " << stats::format_double(report.pearson_corr_swe_anomaly)
        << "\n";
    out << "pearson_corr_discharge: " << stats::format_double(report.pearson_corr_discharge)
        << "\n";
    out << "sign_coincidence: " << stats::format_double(report.sign_coincidence) << " (over "
        << report.sign_months_counted << " months outside the dead band)\n";
    if (!report.events.empty()) {
        out << "events:\n";
        for (const EventRow& e : report.events)
            out << "  " << e.window.first.to_string() << ".." << e.window.last.to_string()
                << ": mean_index " << stats::format_double(e.mean_index) << " over "
                << e.n_months << " months\n";
    }
    if (!out) throw DataError("failed writing " + path);
}

void plot(const std::string& path, const FitOutput& fit, const IndexSeries& index,
          const MonthlySeries& swe_anomaly, const PipelineConfig& cfg, const std::string& basin) {
    plot_emit(index,
              {swe_anomaly, fit.derived.at(cfg.swe_id), fit.derived.at(cfg.discharge_id)}, path,
              stamp_comments(cfg, basin).front());
}

}  // namespace emit

PipelineResult pipeline_run(const PipelineConfig& cfg) {
    PipelineResult result;
    BasinTable raw = pipeline_ingest(cfg);
    const std::string basin = raw.basin_id();

    result.fit = pipeline_fit(cfg, raw);
    result.index = pipeline_index(cfg, result.fit);

    EvaluationOutput eval = pipeline_evaluate(cfg, result.fit, result.index);
    result.swe_anomaly = std::move(eval.swe_anomaly);
    result.report = eval.report;

    run_stage("emit", basin, [&] {
        std::filesystem::path dir(cfg.output_dir);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw DataError("cannot create output directory " + cfg.output_dir);

        const std::string h8 = cfg.hash_suffix();
        auto path_of = [&](const char* prefix, const char* ext) {
            return (dir / (std::string(prefix) + "_" + h8 + ext)).string();
        };
        PipelineArtifacts& a = result.artifacts;
        a.model_path = path_of("model", ".json");
        a.weights_path = path_of("weights", ".csv");
        a.index_path = path_of("index", ".csv");
        a.evaluation_path = path_of("evaluation", ".txt");
        a.plot_path = path_of("snodri", ".svg");
        a.features_path = path_of("feature_selection", ".csv");

        emit::model(a.model_path, result.fit, cfg, basin);
        emit::weights(a.weights_path, result.fit, cfg, basin);
        FeatureSelection sel{result.fit.importance_swe, result.fit.importance_q,
                             result.fit.selected};
        emit::features(a.features_path, sel, cfg, basin);
        emit::index_csv(a.index_path, result.fit, result.index, cfg, basin);
        emit::evaluation(a.evaluation_path, result.report, cfg, basin);
        emit::plot(a.plot_path, result.fit, result.index, result.swe_anomaly, cfg, basin);
        return 0;
    });

    log::info("pipeline complete; artifacts under " + cfg.output_dir);
    return result;
}

}  // namespace snodri
