#include "snodri/config.hpp"
#include "snodri/csv.hpp"
#include "snodri/encoder.hpp"
#include "snodri/errors.hpp"
#include "snodri/pipeline.hpp"
#include "snodri/stats.hpp"
#include "snodri/synth.hpp"

#include <doctest.h>

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace snodri;

namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

SynthConfig demo_synth() {
    SynthConfig s;
    s.n_years = 22;
    s.seed = 61803;
    s.start_year = 1984;
    s.basin_id = "demo";
    s.drought_winters = {{1990, 0.9}, {1996, 0.8}, {2002, 1.0}};
    return s;
}

/// A small, fast config over the synthetic basin written to `input`.
PipelineConfig demo_config(const std::string& input, const std::string& out_dir,
                           const std::string& extra = "") {
    ConfigMap map = parse_config(
        "[run]\n"
        "seed = 11\n"
        "train_end = \"1999-12\"\n"
        "[spi]\n"
        "timescales = [3, 6, 12]\n"
        "[forest]\n"
        "n_trees = 60\n"
        "[train]\n"
        "epochs = 400\n"
        "[evaluate]\n"
        "event_windows = [\"2002-01:2002-04\"]\n" +
        extra);
    apply_override(map, "io.input=" + input);
    apply_override(map, "io.output_dir=" + out_dir);
    return make_pipeline_config(map);
}

/// Synthetic basin written to disk; returns the CSV path.
std::string write_basin(const fs::path& dir) {
    SynthResult r = generate_synthetic_basin(demo_synth());
    fs::path path = dir / "demo.csv";
    csv::write_table_file(path, r.table);
    return path.string();
}

}  // namespace

TEST_SUITE("pipeline") {

TEST_CASE("full run produces every artifact, stamped and loadable") {
    fs::path dir = fresh_dir("snodri_pipe_run");
    PipelineConfig cfg = demo_config(write_basin(dir), (dir / "out").string());
    PipelineResult result = pipeline_run(cfg);

    const PipelineArtifacts& a = result.artifacts;
    for (const std::string& p : {a.model_path, a.weights_path, a.features_path, a.index_path,
                                 a.evaluation_path, a.plot_path}) {
        CAPTURE(p);
        CHECK(fs::exists(p));
        CHECK(p.find(cfg.hash_suffix()) != std::string::npos);
    }

    // basin id comes from the input file stem
    CHECK(result.fit.derived.basin_id() == "demo");

    // stamp comments carry the full config hash and seed
    std::string weights_text = slurp(a.weights_path);
    CHECK(weights_text.find("# config " + stats::to_hex(config_hash(cfg.raw)) + " seed 11") !=
          std::string::npos);
    CHECK(weights_text.find("# basin demo") != std::string::npos);

    // model file round-trips through the encoder loader and names its inputs
    TrainedEncoder loaded = load_encoder(a.model_path);
    CHECK(loaded.column_ids == result.fit.roster);
    CHECK(encoder_to_json(loaded) == encoder_to_json(result.fit.encoder));
    nlohmann::json j = nlohmann::json::parse(slurp(a.model_path));
    CHECK(j.at("provenance").at("basin_id") == "demo");
    CHECK(j.at("provenance").at("global_seed") == 11);

    // the index CSV has both columns and the weight-vector hash
    std::string index_text = slurp(a.index_path);
    CHECK(index_text.find("date,snodri,raw_weighted_sum") != std::string::npos);
    CHECK(index_text.find("weights_hash") != std::string::npos);

    // roster = selected union + SPI columns + snow fraction
    for (const std::string id : {"SPI3", "SPI6", "SPI12", "SNOWFRAC"})
        CHECK(std::find(result.fit.roster.begin(), result.fit.roster.end(), id) !=
              result.fit.roster.end());
    CHECK(result.fit.roster.size() ==
          result.fit.selected.size() + cfg.spi_timescales.size() + 1);

    // evaluation covers the record beyond the training split
    CHECK(result.report.overlap_months > 60);
    REQUIRE(result.report.events.size() == 1);
    CHECK(result.report.events[0].n_months == 4);
}

TEST_CASE("index is standardized over the training window") {
    fs::path dir = fresh_dir("snodri_pipe_std");
    PipelineConfig cfg = demo_config(write_basin(dir), (dir / "out").string());
    BasinTable raw = pipeline_ingest(cfg);
    FitOutput fit = pipeline_fit(cfg, raw);
    IndexSeries idx = pipeline_index(cfg, fit);

    MonthlySeries train_part = restrict_series(idx.snodri, idx.snodri.start, cfg.train_end);
    double m = stats::mean(train_part.values);
    double s = stats::population_std(train_part.values);
    CHECK(std::abs(m) < 1e-9);
    CHECK(std::abs(s - 1.0) < 1e-9);

    // the full-record series extends past the boundary with the same params
    CHECK(idx.snodri.last_stamp() > cfg.train_end);
    CHECK(idx.params == fit.index_params);
}

TEST_CASE("rerunning an identical config is byte-identical") {
    fs::path dir = fresh_dir("snodri_pipe_det");
    std::string input = write_basin(dir);
    PipelineConfig cfg = demo_config(input, (dir / "out").string());

    PipelineResult r1 = pipeline_run(cfg);
    std::vector<std::string> paths = {r1.artifacts.model_path,      r1.artifacts.index_path,
                                      r1.artifacts.weights_path,    r1.artifacts.features_path,
                                      r1.artifacts.evaluation_path, r1.artifacts.plot_path};
    std::vector<std::string> first;
    for (const std::string& p : paths) first.push_back(slurp(p));

    PipelineResult r2 = pipeline_run(cfg);
    for (std::size_t i = 0; i < paths.size(); ++i) {
        CAPTURE(paths[i]);
        CHECK(first[i] == slurp(paths[i]));
    }
}

TEST_CASE("different configs never collide on artifact names") {
    fs::path dir = fresh_dir("snodri_pipe_names");
    std::string input = write_basin(dir);
    PipelineConfig a = demo_config(input, (dir / "out").string());
    PipelineConfig b = demo_config(input, (dir / "out").string(), "[mi]\nbins = 12\n");
    CHECK(a.hash_suffix() != b.hash_suffix());
}

TEST_CASE("evaluation rows cannot influence any fitted parameter") {
    fs::path dir = fresh_dir("snodri_pipe_poison");
    PipelineConfig cfg = demo_config(write_basin(dir), (dir / "out").string());
    BasinTable raw = pipeline_ingest(cfg);
    FitOutput clean = pipeline_fit(cfg, raw);

    // overwrite every month after the split with plausible sentinels
    BasinTable poisoned(raw.basin_id());
    for (const MonthlySeries& s : raw.series()) {
        MonthlySeries copy = s;
        for (std::size_t i = 0; i < copy.values.size(); ++i)
            if (copy.stamp(i) > cfg.train_end)
                copy.values[i] = (s.variable_id == "TMP")    ? 300.0
                                 : (s.variable_id == "SPFH") ? 0.003
                                 : (s.variable_id == "PRES") ? 91000.0
                                                             : 123.0;
        poisoned.add(std::move(copy));
    }
    FitOutput dirty = pipeline_fit(cfg, poisoned);

    CHECK(encoder_to_json(dirty.encoder) == encoder_to_json(clean.encoder));
    CHECK(dirty.weights.weights == clean.weights.weights);
    CHECK(dirty.index_params == clean.index_params);
    CHECK(dirty.selected == clean.selected);
    CHECK(dirty.importance_swe.importances == clean.importance_swe.importances);
    CHECK(dirty.importance_q.importances == clean.importance_q.importances);

    // training rows of the derived table are also untouched
    for (const std::string id : {"SPI3", "SPI12", "SNOWFRAC"}) {
        MonthlySeries c = restrict_series(clean.derived.at(id), clean.derived.at(id).start,
                                          cfg.train_end);
        MonthlySeries d = restrict_series(dirty.derived.at(id), dirty.derived.at(id).start,
                                          cfg.train_end);
        CHECK(c.values == d.values);
    }
}

TEST_CASE("a missing input file names the path") {
    fs::path dir = fresh_dir("snodri_pipe_missing");
    PipelineConfig cfg = demo_config((dir / "nope.csv").string(), (dir / "out").string());
    CHECK_THROWS_WITH_AS(pipeline_run(cfg), doctest::Contains("nope.csv"), DataError);
}

TEST_CASE("stage failures name the stage and basin") {
    fs::path dir = fresh_dir("snodri_pipe_stage");
    SynthResult r = generate_synthetic_basin(demo_synth());

    SUBCASE("derive: missing variable") {
        BasinTable table("demo");
        for (const MonthlySeries& s : r.table.series())
            if (s.variable_id != "SWE") table.add(s);
        PipelineConfig cfg = demo_config("unused.csv", (dir / "out").string());
        CHECK_THROWS_WITH_AS(pipeline_fit(cfg, table),
                             doctest::Contains("stage derive (basin demo)"), DataError);
        try {
            pipeline_fit(cfg, table);
        } catch (const DataError& e) {
            CHECK(std::string(e.what()).find("SWE") != std::string::npos);
        }
    }

    SUBCASE("derive: split outside the record keeps the config family") {
        PipelineConfig cfg = demo_config("unused.csv", (dir / "out").string());
        cfg.train_end = {2050, 1};
        CHECK_THROWS_WITH_AS(pipeline_fit(cfg, r.table),
                             doctest::Contains("stage derive (basin demo)"), ConfigError);
    }
}

TEST_CASE("daily inputs aggregate per the configured methods") {
    fs::path dir = fresh_dir("snodri_pipe_daily");
    std::ostringstream csv_text;
    csv_text << "date,APCP,TMP\n";
    for (int day = 1; day <= 31; ++day)
        csv_text << "2000-01-" << (day < 10 ? "0" : "") << day << ",1.5,270\n";
    for (int day = 1; day <= 29; ++day)
        csv_text << "2000-02-" << (day < 10 ? "0" : "") << day << ",0.5,280\n";
    fs::path path = dir / "daily.csv";
    {
        std::ofstream out(path);
        out << csv_text.str();
    }

    ConfigMap map = parse_config(
        "[run]\ntrain_end = \"2000-01\"\n"
        "[aggregation]\nAPCP = \"sum\"\nTMP = \"mean\"\n");
    apply_override(map, "io.input=" + path.string());
    PipelineConfig cfg = make_pipeline_config(map);
    BasinTable table = pipeline_ingest(cfg);
    CHECK(table.at("APCP").values == std::vector<double>{46.5, 14.5});
    CHECK(table.at("TMP").values == std::vector<double>{270.0, 280.0});

    // a daily variable without a configured method is a config error
    ConfigMap bare = parse_config("[run]\ntrain_end = \"2000-01\"\n");
    apply_override(bare, "io.input=" + path.string());
    CHECK_THROWS_WITH_AS(pipeline_ingest(make_pipeline_config(bare)),
                         doctest::Contains("aggregation.APCP"), ConfigError);
}

}  // TEST_SUITE
