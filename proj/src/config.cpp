#include "snodri/config.hpp"

#include "snodri/errors.hpp"
#include "snodri/stats.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace snodri {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

[[noreturn]] void fail(int line_no, const std::string& what) {
    throw ConfigError("config line " + std::to_string(line_no) + ": " + what);
}

/// Strip an unquoted `#` comment, respecting quoted strings.
std::string_view strip_comment(std::string_view line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
        } else if (c == '"') {
            in_string = true;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

bool valid_key(std::string_view key) {
    if (key.empty()) return false;
    for (char c : key)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.')
            return false;
    return true;
}

/// Parse one scalar token. `rest` receives the unconsumed tail.
ConfigValue parse_scalar(std::string_view text, int line_no) {
    text = trim(text);
    if (text.empty()) fail(line_no, "empty value");
    if (text.front() == '"') {
        std::string out;
        std::size_t i = 1;
        for (; i < text.size(); ++i) {
            char c = text[i];
            if (c == '"') {
                if (!trim(text.substr(i + 1)).empty())
                    fail(line_no, "trailing characters after closing quote");
                return {out};
            }
            if (c == '\\') {
                if (++i == text.size()) break;
                switch (text[i]) {
                    case '"': out += '"'; break;
                    case '\\': out += '\\'; break;
                    case 'n': out += '\n'; break;
                    case 't': out += '\t'; break;
                    default: fail(line_no, "unsupported escape in string");
                }
            } else {
                out += c;
            }
        }
        fail(line_no, "unterminated string");
    }
    if (text == "true") return {true};
    if (text == "false") return {false};

    std::int64_t iv = 0;
    auto ir = std::from_chars(text.data(), text.data() + text.size(), iv);
    if (ir.ec == std::errc() && ir.ptr == text.data() + text.size()) return {iv};

    double dv = 0.0;
    auto dr = std::from_chars(text.data(), text.data() + text.size(), dv);
    if (dr.ec == std::errc() && dr.ptr == text.data() + text.size()) return {dv};

    fail(line_no, "cannot parse value '" + std::string(text) +
                      "' (strings need double quotes)");
}

/// Split a flat `[a, b, c]` body at top-level commas, respecting strings.
std::vector<std::string_view> split_array_items(std::string_view body, int line_no) {
    std::vector<std::string_view> items;
    bool in_string = false;
    std::size_t start = 0;
    for (std::size_t i = 0; i < body.size(); ++i) {
        char c = body[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
        } else if (c == '"') {
            in_string = true;
        } else if (c == '[') {
            fail(line_no, "nested arrays are not supported");
        } else if (c == ',') {
            items.push_back(body.substr(start, i - start));
            start = i + 1;
        }
    }
    if (in_string) fail(line_no, "unterminated string in array");
    std::string_view last = trim(body.substr(start));
    if (!last.empty()) items.push_back(last);
    else if (!items.empty()) fail(line_no, "trailing comma in array");
    return items;
}

ConfigValue parse_value(std::string_view text, int line_no) {
    text = trim(text);
    if (!text.empty() && text.front() == '[') {
        if (text.back() != ']') fail(line_no, "array does not end with ]");
        std::vector<ConfigValue> items;
        for (std::string_view item : split_array_items(text.substr(1, text.size() - 2), line_no))
            items.push_back(parse_scalar(item, line_no));
        return {std::move(items)};
    }
    return parse_scalar(text, line_no);
}

const ConfigValue* find(const ConfigMap& m, const std::string& key) {
    auto it = m.find(key);
    return it == m.end() ? nullptr : &it->second;
}

[[noreturn]] void wrong_type(const std::string& key, const std::string& want,
                             const ConfigValue& got) {
    throw ConfigError("config key '" + key + "' must be " + want + ", got " + got.type_name());
}

}  // namespace

std::string ConfigValue::type_name() const {
    switch (v.index()) {
        case 0: return "a boolean";
        case 1: return "an integer";
        case 2: return "a float";
        case 3: return "a string";
        default: return "an array";
    }
}

std::string ConfigValue::to_text() const {
    if (const bool* b = std::get_if<bool>(&v)) return *b ? "true" : "false";
    if (const std::int64_t* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
    if (const double* d = std::get_if<double>(&v)) {
        std::string s = stats::format_double(*d);
        // Keep floats distinguishable from integers after round-trips.
        if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
        return s;
    }
    if (const std::string* s = std::get_if<std::string>(&v)) {
        std::string out = "\"";
        for (char c : *s) {
            switch (c) {
                case '"': out += "\\\""; break;
                case '\\': out += "\\\\"; break;
                case '\n': out += "\\n"; break;
                case '\t': out += "\\t"; break;
                default: out += c;
            }
        }
        return out + "\"";
    }
    const auto& items = std::get<std::vector<ConfigValue>>(v);
    std::string out = "[";
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += ", ";
        out += items[i].to_text();
    }
    return out + "]";
}

ConfigMap parse_config(const std::string& text) {
    ConfigMap map;
    std::string section;
    std::istringstream in(text);
    std::string raw_line;
    int line_no = 0;
    while (std::getline(in, raw_line)) {
        ++line_no;
        std::string_view line = trim(strip_comment(raw_line));
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(line_no, "section header does not end with ]");
            std::string_view name = trim(line.substr(1, line.size() - 2));
            if (!valid_key(name)) fail(line_no, "invalid section name");
            section = std::string(name);
            continue;
        }
        std::size_t eq = std::string_view::npos;
        bool in_string = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"') in_string = !in_string;
            else if (line[i] == '=' && !in_string) { eq = i; break; }
        }
        if (eq == std::string_view::npos) fail(line_no, "expected key = value");
        std::string_view key = trim(line.substr(0, eq));
        if (!valid_key(key) || key.find('.') != std::string_view::npos)
            fail(line_no, "invalid key '" + std::string(key) + "'");
        std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
        if (map.count(full)) fail(line_no, "duplicate key '" + full + "'");
        map[full] = parse_value(line.substr(eq + 1), line_no);
    }
    return map;
}

ConfigMap parse_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

void apply_override(ConfigMap& map, const std::string& key_equals_value) {
    std::size_t eq = key_equals_value.find('=');
    if (eq == std::string::npos)
        throw ConfigError("--set needs key=value, got '" + key_equals_value + "'");
    std::string key(trim(std::string_view(key_equals_value).substr(0, eq)));
    if (!valid_key(key)) throw ConfigError("--set: invalid key '" + key + "'");
    std::string_view text = trim(std::string_view(key_equals_value).substr(eq + 1));
    if (!text.empty() && (text.front() == '[' || text.front() == '"')) {
        map[key] = parse_value(text, 0);
        return;
    }
    try {
        map[key] = parse_value(text, 0);
    } catch (const ConfigError&) {
        // Shells strip quotes; a bare word that is not a number or boolean
        // is taken as a string.
        map[key] = ConfigValue{std::string(text)};
    }
}

std::uint64_t config_hash(const ConfigMap& map) {
    std::string canon;
    for (const auto& [key, value] : map) {
        canon += key;
        canon += " = ";
        canon += value.to_text();
        canon += '\n';
    }
    return stats::fnv1a64(canon);
}

std::string config_hash_suffix(const ConfigMap& map) {
    return stats::to_hex(config_hash(map)).substr(0, 8);
}

bool get_bool_or(const ConfigMap& m, const std::string& key, bool fallback) {
    const ConfigValue* v = find(m, key);
    if (!v) return fallback;
    if (const bool* b = std::get_if<bool>(&v->v)) return *b;
    wrong_type(key, "a boolean", *v);
}

std::int64_t get_int_or(const ConfigMap& m, const std::string& key, std::int64_t fallback) {
    const ConfigValue* v = find(m, key);
    if (!v) return fallback;
    if (const std::int64_t* i = std::get_if<std::int64_t>(&v->v)) return *i;
    wrong_type(key, "an integer", *v);
}

double get_double_or(const ConfigMap& m, const std::string& key, double fallback) {
    const ConfigValue* v = find(m, key);
    if (!v) return fallback;
    if (const double* d = std::get_if<double>(&v->v)) return *d;
    if (const std::int64_t* i = std::get_if<std::int64_t>(&v->v))
        return static_cast<double>(*i);
    wrong_type(key, "a number", *v);
}

std::string get_string_or(const ConfigMap& m, const std::string& key, std::string fallback) {
    const ConfigValue* v = find(m, key);
    if (!v) return fallback;
    if (const std::string* s = std::get_if<std::string>(&v->v)) return *s;
    wrong_type(key, "a string", *v);
}

std::string get_string_required(const ConfigMap& m, const std::string& key) {
    const ConfigValue* v = find(m, key);
    if (!v) throw ConfigError("config key '" + key + "' is required");
    if (const std::string* s = std::get_if<std::string>(&v->v)) return *s;
    wrong_type(key, "a string", *v);
}

std::vector<std::int64_t> get_int_array_or(const ConfigMap& m, const std::string& key,
                                           std::vector<std::int64_t> fallback) {
    const ConfigValue* v = find(m, key);
    if (!v) return fallback;
    const auto* items = std::get_if<std::vector<ConfigValue>>(&v->v);
    if (!items) wrong_type(key, "an integer array", *v);
    std::vector<std::int64_t> out;
    for (const ConfigValue& item : *items) {
        const std::int64_t* i = std::get_if<std::int64_t>(&item.v);
        if (!i) wrong_type(key, "an integer array", *v);
        out.push_back(*i);
    }
    return out;
}

std::vector<std::string> get_string_array_or(const ConfigMap& m, const std::string& key,
                                             std::vector<std::string> fallback) {
    const ConfigValue* v = find(m, key);
    if (!v) return fallback;
    const auto* items = std::get_if<std::vector<ConfigValue>>(&v->v);
    if (!items) wrong_type(key, "a string array", *v);
    std::vector<std::string> out;
    for (const ConfigValue& item : *items) {
        const std::string* s = std::get_if<std::string>(&item.v);
        if (!s) wrong_type(key, "a string array", *v);
        out.push_back(*s);
    }
    return out;
}

namespace {

MonthStamp parse_stamp_key(const ConfigMap& m, const std::string& key) {
    std::string text = get_string_required(m, key);
    auto stamp = MonthStamp::parse(text);
    if (!stamp)
        throw ConfigError("config key '" + key + "' must be YYYY-MM, got '" + text + "'");
    return *stamp;
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "io.input", "io.output_dir",
        "run.seed", "run.train_end",
        "variables.precip", "variables.temperature", "variables.humidity",
        "variables.pressure", "variables.swe", "variables.discharge",
        "variables.candidates",
        "spi.timescales",
        "sigmoid.midpoint_tw", "sigmoid.steepness",
        "forest.n_trees", "forest.max_depth", "forest.min_samples_leaf",
        "forest.features_per_split", "forest.bootstrap", "forest.top_k",
        "train.epochs", "train.learning_rate", "train.huber_delta",
        "mi.bins",
        "evaluate.event_windows",
        "synth.n_years", "synth.seed", "synth.start_year", "synth.noise_std",
        "synth.basin_id", "synth.drought_winters",
    };
    return keys;
}

}  // namespace

PipelineConfig make_pipeline_config(const ConfigMap& map) {
    for (const auto& [key, value] : map) {
        (void)value;
        if (key.rfind("aggregation.", 0) == 0) continue;
        if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
    }

    PipelineConfig cfg;
    cfg.raw = map;
    cfg.input = get_string_or(map, "io.input", "");
    cfg.output_dir = get_string_or(map, "io.output_dir", ".");
    cfg.seed = static_cast<std::uint64_t>(get_int_or(map, "run.seed", 0));
    cfg.train_end = parse_stamp_key(map, "run.train_end");

    cfg.precip_id = get_string_or(map, "variables.precip", cfg.precip_id);
    cfg.temperature_id = get_string_or(map, "variables.temperature", cfg.temperature_id);
    cfg.humidity_id = get_string_or(map, "variables.humidity", cfg.humidity_id);
    cfg.pressure_id = get_string_or(map, "variables.pressure", cfg.pressure_id);
    cfg.swe_id = get_string_or(map, "variables.swe", cfg.swe_id);
    cfg.discharge_id = get_string_or(map, "variables.discharge", cfg.discharge_id);
    cfg.candidates = get_string_array_or(map, "variables.candidates", cfg.candidates);
    if (cfg.candidates.empty()) throw ConfigError("variables.candidates must be non-empty");

    for (const auto& [key, value] : map) {
        if (key.rfind("aggregation.", 0) != 0) continue;
        std::string var = key.substr(std::string("aggregation.").size());
        const std::string* method = std::get_if<std::string>(&value.v);
        if (!method) wrong_type(key, "a string (\"sum\" or \"mean\")", value);
        if (*method == "sum") cfg.aggregation[var] = AggregateMethod::sum;
        else if (*method == "mean") cfg.aggregation[var] = AggregateMethod::mean;
        else throw ConfigError("config key '" + key + "': method must be \"sum\" or \"mean\"");
    }

    cfg.spi_timescales.clear();
    for (std::int64_t k : get_int_array_or(map, "spi.timescales", {3, 4, 6, 12, 60})) {
        if (k < 1) throw ConfigError("spi.timescales entries must be >= 1");
        cfg.spi_timescales.push_back(static_cast<int>(k));
    }
    if (cfg.spi_timescales.empty()) throw ConfigError("spi.timescales must be non-empty");

    cfg.sigmoid.midpoint_tw = get_double_or(map, "sigmoid.midpoint_tw", cfg.sigmoid.midpoint_tw);
    cfg.sigmoid.steepness = get_double_or(map, "sigmoid.steepness", cfg.sigmoid.steepness);

    cfg.forest.n_trees = static_cast<int>(get_int_or(map, "forest.n_trees", cfg.forest.n_trees));
    cfg.forest.max_depth =
        static_cast<int>(get_int_or(map, "forest.max_depth", cfg.forest.max_depth));
    cfg.forest.min_samples_leaf = static_cast<int>(
        get_int_or(map, "forest.min_samples_leaf", cfg.forest.min_samples_leaf));
    cfg.forest.features_per_split = static_cast<std::size_t>(
        get_int_or(map, "forest.features_per_split",
                   static_cast<std::int64_t>(cfg.forest.features_per_split)));
    cfg.forest.bootstrap = get_bool_or(map, "forest.bootstrap", cfg.forest.bootstrap);
    cfg.top_k = static_cast<int>(get_int_or(map, "forest.top_k", cfg.top_k));

    cfg.train.epochs = static_cast<int>(get_int_or(map, "train.epochs", cfg.train.epochs));
    cfg.train.learning_rate =
        get_double_or(map, "train.learning_rate", cfg.train.learning_rate);
    cfg.train.huber_delta = get_double_or(map, "train.huber_delta", cfg.train.huber_delta);
    if (cfg.train.epochs < 1) throw ConfigError("train.epochs must be >= 1");
    if (!(cfg.train.huber_delta > 0.0)) throw ConfigError("train.huber_delta must be > 0");

    cfg.mi_bins = static_cast<int>(get_int_or(map, "mi.bins", 0));
    if (cfg.mi_bins < 0) throw ConfigError("mi.bins must be >= 0 (0 = automatic)");

    for (const std::string& w : get_string_array_or(map, "evaluate.event_windows", {})) {
        std::size_t colon = w.find(':');
        if (colon == std::string::npos)
            throw ConfigError("evaluate.event_windows entry '" + w +
                              "' must look like \"YYYY-MM:YYYY-MM\"");
        auto first = MonthStamp::parse(w.substr(0, colon));
        auto last = MonthStamp::parse(w.substr(colon + 1));
        if (!first || !last)
            throw ConfigError("evaluate.event_windows entry '" + w +
                              "' must look like \"YYYY-MM:YYYY-MM\"");
        cfg.event_windows.push_back({*first, *last});
    }
    return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path,
                                    const std::vector<std::string>& overrides) {
    ConfigMap map = parse_config_file(path);
    for (const std::string& o : overrides) apply_override(map, o);
    return make_pipeline_config(map);
}

SynthConfig make_synth_config(const ConfigMap& map) {
    for (const auto& [key, value] : map) {
        (void)value;
        if (key.rfind("aggregation.", 0) == 0) continue;
        if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
    }

    SynthConfig cfg;
    cfg.n_years = static_cast<int>(get_int_or(map, "synth.n_years", cfg.n_years));
    cfg.seed = static_cast<std::uint64_t>(
        get_int_or(map, "synth.seed", static_cast<std::int64_t>(cfg.seed)));
    cfg.start_year = static_cast<int>(get_int_or(map, "synth.start_year", cfg.start_year));
    cfg.noise_std = get_double_or(map, "synth.noise_std", cfg.noise_std);
    cfg.basin_id = get_string_or(map, "synth.basin_id", cfg.basin_id);
    for (const std::string& w : get_string_array_or(map, "synth.drought_winters", {})) {
        std::size_t colon = w.find(':');
        std::string year_text = colon == std::string::npos ? w : w.substr(0, colon);
        DroughtWinter dw;
        std::int64_t year = 0;
        auto r = std::from_chars(year_text.data(), year_text.data() + year_text.size(), year);
        if (r.ec != std::errc() || r.ptr != year_text.data() + year_text.size())
            throw ConfigError("synth.drought_winters entry '" + w +
                              "' must look like \"YYYY:severity\"");
        dw.year = static_cast<int>(year);
        if (colon != std::string::npos) {
            std::string sev_text = w.substr(colon + 1);
            auto sr =
                std::from_chars(sev_text.data(), sev_text.data() + sev_text.size(), dw.severity);
            if (sr.ec != std::errc() || sr.ptr != sev_text.data() + sev_text.size())
                throw ConfigError("synth.drought_winters entry '" + w + "': bad severity");
        }
        cfg.drought_winters.push_back(dw);
    }
    return cfg;
}

}  // namespace snodri
