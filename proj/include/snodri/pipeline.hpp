#pragma once

#include "snodri/config.hpp"
#include "snodri/encoder.hpp"
#include "snodri/featsel.hpp"
#include "snodri/index.hpp"
#include "snodri/mi.hpp"
#include "snodri/timeseries.hpp"

#include <string>
#include <vector>

namespace snodri {

/**
 * Everything the fitting stages produce. Every fitted quantity is derived
 * from stamps at or before cfg.train_end only; the derived table spans
 * the full record (its SPI columns are mapped through fits that stop at
 * the boundary).
 */
struct FitOutput {
    BasinTable derived;  // raw variables + SPI columns + SNOWFRAC, full record
    std::vector<std::string> spi_ids;
    ImportanceVector importance_swe;
    ImportanceVector importance_q;
    std::vector<std::string> selected;  // union of top-k per target
    std::vector<std::string> roster;    // encoder input columns, in order
    TrainedEncoder encoder;
    WeightVector weights;               // MI weights, roster order
    ZScoreParams index_params;          // index standardization, training rows
};

/**
 * Run the fitting stages on an in-memory table: derive SPI and snow
 * fraction, select features against SWE and discharge, train the
 * autoencoder, extract MI weights, and fix the index standardization.
 * Exposed separately so tests can audit that evaluation-period rows
 * never influence any fitted parameter.
 */
FitOutput pipeline_fit(const PipelineConfig& cfg, const BasinTable& raw);

/// Read cfg's input CSV (or `path` when non-empty) into a basin table,
/// aggregating daily records with the configured per-variable methods.
BasinTable pipeline_ingest(const PipelineConfig& cfg, const std::string& path = "");

/// The derive stage alone: SPI per configured timescale (fits stop at
/// cfg.train_end) and the wet-bulb snow fraction, appended to a copy of
/// the raw table. `spi_ids` receives the new SPI column ids when given.
BasinTable pipeline_derive(const PipelineConfig& cfg, const BasinTable& raw,
                           std::vector<std::string>* spi_ids = nullptr);

struct FeatureSelection {
    ImportanceVector importance_swe;
    ImportanceVector importance_q;
    std::vector<std::string> selected;
};

/// The feature-selection stage alone: restrict to the training period,
/// align the candidate variables, train one forest per target, take the
/// union of the top-k. `table` may be raw or derived; only candidate
/// columns are consulted.
FeatureSelection pipeline_select_features(const PipelineConfig& cfg, const BasinTable& table);

/// Apply a fitted model to the full record: align the roster with the
/// stored column parameters, weight, and standardize with the stored
/// index parameters.
IndexSeries pipeline_index(const PipelineConfig& cfg, const FitOutput& fit);

struct EvaluationOutput {
    MonthlySeries swe_anomaly;  // monthly climatology anomaly, full record
    EvaluationReport report;
};

/// Score a composed index against the SWE anomaly, discharge and the
/// configured event windows.
EvaluationOutput pipeline_evaluate(const PipelineConfig& cfg, const FitOutput& fit,
                                   const IndexSeries& index);

// Artifact writers, shared by pipeline_run and the stage subcommands so
// a stage emitted alone is byte-identical to the one from a full run.
namespace emit {
/// The comment lines stamped into every artifact: config hash with the
/// global seed, then the basin id.
std::vector<std::string> stamp_comments(const PipelineConfig& cfg, const std::string& basin);
void model(const std::string& path, const FitOutput& fit, const PipelineConfig& cfg,
           const std::string& basin);
void weights(const std::string& path, const FitOutput& fit, const PipelineConfig& cfg,
             const std::string& basin);
void features(const std::string& path, const FeatureSelection& sel, const PipelineConfig& cfg,
              const std::string& basin);
void index_csv(const std::string& path, const FitOutput& fit, const IndexSeries& index,
               const PipelineConfig& cfg, const std::string& basin);
void evaluation(const std::string& path, const EvaluationReport& report,
                const PipelineConfig& cfg, const std::string& basin);
void plot(const std::string& path, const FitOutput& fit, const IndexSeries& index,
          const MonthlySeries& swe_anomaly, const PipelineConfig& cfg, const std::string& basin);
}  // namespace emit

struct PipelineArtifacts {
    std::string model_path;
    std::string weights_path;
    std::string index_path;
    std::string evaluation_path;
    std::string plot_path;
    std::string features_path;
};

struct PipelineResult {
    FitOutput fit;
    IndexSeries index;          // full record
    MonthlySeries swe_anomaly;  // indicator, full record
    EvaluationReport report;
    PipelineArtifacts artifacts;
};

/// Full batch run: read the input table, fit, apply to the whole record,
/// evaluate, and write every artifact under cfg.output_dir with the
/// config-hash suffix.
PipelineResult pipeline_run(const PipelineConfig& cfg);

}  // namespace snodri
