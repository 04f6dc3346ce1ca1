#pragma once

#include "snodri/encoder.hpp"
#include "snodri/featsel.hpp"
#include "snodri/index.hpp"
#include "snodri/snowpart.hpp"
#include "snodri/synth.hpp"
#include "snodri/timeseries.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace snodri {

/**
 * Scalar or array value from a config document. Arrays are homogeneous;
 * nesting is not supported.
 */
struct ConfigValue {
    std::variant<bool, std::int64_t, double, std::string, std::vector<ConfigValue>> v;

    bool is_array() const { return std::holds_alternative<std::vector<ConfigValue>>(v); }
    std::string type_name() const;
    /// Canonical text form, used for hashing. Round-trips through the parser.
    std::string to_text() const;
};

/// Flattened "section.key" -> value map parsed from a config document.
using ConfigMap = std::map<std::string, ConfigValue>;

/**
 * Parse a config document: `[section]` headers, `key = value` lines,
 * `#` comments, blank lines. Values are strings ("..."), integers,
 * floats, booleans (true/false) and flat arrays `[v, v, ...]`. Keys are
 * flattened to "section.key" ("key" alone before any section header).
 */
ConfigMap parse_config(const std::string& text);
ConfigMap parse_config_file(const std::string& path);

/// Apply one `--set key=value` override; the value uses the same grammar.
void apply_override(ConfigMap& map, const std::string& key_equals_value);

/**
 * FNV-1a hash of the canonical "key = value" lines in sorted key order.
 * Identical effective configs hash identically regardless of formatting.
 */
std::uint64_t config_hash(const ConfigMap& map);

/// First 8 hex digits of config_hash, the artifact file-name suffix.
std::string config_hash_suffix(const ConfigMap& map);

// Typed accessors. The *_or forms fall back to a default; the required
// forms throw ConfigError naming the key.
bool get_bool_or(const ConfigMap& m, const std::string& key, bool fallback);
std::int64_t get_int_or(const ConfigMap& m, const std::string& key, std::int64_t fallback);
double get_double_or(const ConfigMap& m, const std::string& key, double fallback);
std::string get_string_or(const ConfigMap& m, const std::string& key, std::string fallback);
std::string get_string_required(const ConfigMap& m, const std::string& key);
std::vector<std::int64_t> get_int_array_or(const ConfigMap& m, const std::string& key,
                                           std::vector<std::int64_t> fallback);
std::vector<std::string> get_string_array_or(const ConfigMap& m, const std::string& key,
                                             std::vector<std::string> fallback);

/**
 * Everything a full pipeline run needs. Field defaults match the module
 * defaults; `train_end` has no default and must come from the document:
 * silently defaulting the fit/evaluation boundary would decide what data
 * the model is allowed to see.
 */
struct PipelineConfig {
    // io
    std::string input;       // basin CSV path
    std::string output_dir = ".";

    // run
    std::uint64_t seed = 0;
    MonthStamp train_end{};  // fitting stages use stamps <= this

    // variables
    std::string precip_id = "APCP";
    std::string temperature_id = "TMP";
    std::string humidity_id = "SPFH";
    std::string pressure_id = "PRES";
    std::string swe_id = "SWE";
    std::string discharge_id = "Q";
    std::vector<std::string> candidates = {"APCP", "TMP", "DSWRF", "SPFH",
                                           "PRES", "UGRD", "VGRD"};

    // aggregation: variable_id -> sum|mean, consulted for daily inputs
    std::map<std::string, AggregateMethod> aggregation;

    std::vector<int> spi_timescales = {3, 4, 6, 12, 60};
    SigmoidParams sigmoid;
    ForestHyperparams forest;  // seed field ignored; stage seeds are derived
    int top_k = 3;
    TrainConfig train;         // seed field ignored likewise
    int mi_bins = 0;           // 0 = estimator default
    std::vector<EventWindow> event_windows;

    // The parsed document, kept for hashing and artifact provenance.
    ConfigMap raw;

    std::string hash_suffix() const { return config_hash_suffix(raw); }
};

/// Validate and bind a parsed document to a PipelineConfig.
PipelineConfig make_pipeline_config(const ConfigMap& map);

/// parse_config_file + overrides + make_pipeline_config.
PipelineConfig load_pipeline_config(const std::string& path,
                                    const std::vector<std::string>& overrides = {});

/// Bind the [synth] section; used by the generator subcommand, which does
/// not need the pipeline keys (in particular no train/eval boundary).
SynthConfig make_synth_config(const ConfigMap& map);

}  // namespace snodri
