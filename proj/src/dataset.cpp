#include "npts/dataset.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "npts/format.hpp"

namespace npts {

namespace {

using nlohmann::json;

bool blank(const std::string& line) {
    for (char c : line) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            return false;
        }
    }
    return true;
}

std::vector<double> number_array(const json& node, const std::string& what) {
    if (!node.is_array() || node.empty()) {
        throw std::runtime_error(what + " must be a nonempty array of numbers");
    }
    std::vector<double> values;
    values.reserve(node.size());
    for (const json& item : node) {
        if (!item.is_number()) {
            throw std::runtime_error(what + " must contain only numbers");
        }
        const double v = item.get<double>();
        if (!std::isfinite(v)) {
            throw std::runtime_error(what + " contains a non-finite value");
        }
        values.push_back(v);
    }
    return values;
}

TimeSeries parse_series(const json& record, const DatasetManifest& manifest) {
    TimeSeries series;
    if (record.contains("item_id") && record["item_id"].is_string()) {
        series.id = record["item_id"].get<std::string>();
    } else if (record.contains("id") && record["id"].is_string()) {
        series.id = record["id"].get<std::string>();
    } else {
        throw std::runtime_error("missing string field \"item_id\"");
    }
    if (!record.contains("start") || !record["start"].is_string()) {
        throw std::runtime_error("missing string field \"start\"");
    }
    series.start = parse_timestamp(record["start"].get<std::string>());
    series.freq = manifest.freq;
    if (!record.contains("target")) {
        throw std::runtime_error("missing field \"target\"");
    }
    series.values = number_array(record["target"], "\"target\"");
    if (record.contains("feat_dynamic_real")) {
        const json& feats = record["feat_dynamic_real"];
        if (!feats.is_array()) {
            throw std::runtime_error("\"feat_dynamic_real\" must be an array of arrays");
        }
        const std::size_t expected = series.values.size() + manifest.prediction_length;
        for (const json& row : feats) {
            std::vector<double> values = number_array(row, "\"feat_dynamic_real\" row");
            if (values.size() != expected) {
                throw std::runtime_error("\"feat_dynamic_real\" row has length " +
                                         std::to_string(values.size()) + ", expected target+" +
                                         std::to_string(manifest.prediction_length) + " = " +
                                         std::to_string(expected));
            }
            series.covariates.push_back(std::move(values));
        }
    }
    return series;
}

} // namespace

LoadResult load_dataset(const DatasetManifest& manifest) {
    std::ifstream in(manifest.path);
    if (!in) {
        throw std::runtime_error("cannot open dataset file: " + manifest.path);
    }
    LoadResult result;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) {
            continue;
        }
        const json record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.is_object()) {
            result.errors.push_back("line " + std::to_string(line_no) + ": invalid JSON object");
            continue;
        }
        try {
            result.series.push_back(parse_series(record, manifest));
        } catch (const std::exception& e) {
            result.errors.push_back("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    if (result.series.empty() && result.errors.empty()) {
        result.errors.push_back("no series in dataset file: " + manifest.path);
    }
    return result;
}

namespace {

void write_number_array(std::ofstream& out, const std::vector<double>& values) {
    out << '[';
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) {
            out << ',';
        }
        out << format_number(values[i]);
    }
    out << ']';
}

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

} // namespace

void write_dataset_jsonl(const std::string& path, const std::vector<TimeSeries>& panel) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open output file: " + path);
    }
    for (const TimeSeries& series : panel) {
        out << "{\"item_id\":\"" << json_escape(series.id) << "\",\"start\":\""
            << format_timestamp(series.start) << "\",\"target\":";
        write_number_array(out, series.values);
        if (!series.covariates.empty()) {
            out << ",\"feat_dynamic_real\":[";
            for (std::size_t d = 0; d < series.covariates.size(); ++d) {
                if (d > 0) {
                    out << ',';
                }
                write_number_array(out, series.covariates[d]);
            }
            out << ']';
        }
        out << "}\n";
    }
    if (!out) {
        throw std::runtime_error("failed writing " + path);
    }
}

ForecastRecord to_record(const ForecastResult& result, bool include_samples) {
    ForecastRecord record;
    record.series_id = result.series_id;
    record.forecast_start = result.forecast_start;
    record.quantiles = result.quantile_curves;
    if (include_samples) {
        record.samples = result.samples;
    }
    return record;
}

void write_forecasts_jsonl(const std::string& path, const std::vector<ForecastRecord>& records) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open output file: " + path);
    }
    for (const ForecastRecord& record : records) {
        out << "{\"item_id\":\"" << json_escape(record.series_id) << "\",\"forecast_start\":\""
            << format_timestamp(record.forecast_start) << "\",\"quantiles\":{";
        bool first = true;
        for (const auto& [level, curve] : record.quantiles) {
            if (!first) {
                out << ',';
            }
            first = false;
            out << '"' << format_number(level) << "\":";
            write_number_array(out, curve);
        }
        out << '}';
        if (!record.samples.empty()) {
            out << ",\"samples\":[";
            for (std::size_t k = 0; k < record.samples.size(); ++k) {
                if (k > 0) {
                    out << ',';
                }
                write_number_array(out, record.samples[k]);
            }
            out << ']';
        }
        out << "}\n";
    }
    if (!out) {
        throw std::runtime_error("failed writing " + path);
    }
}

std::vector<ForecastRecord> read_forecasts_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open forecast file: " + path);
    }
    std::vector<ForecastRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) {
            continue;
        }
        const json node = json::parse(line, nullptr, false);
        if (node.is_discarded() || !node.is_object()) {
            throw std::runtime_error("forecast file line " + std::to_string(line_no) +
                                     ": invalid JSON object");
        }
        try {
            ForecastRecord record;
            record.series_id = node.at("item_id").get<std::string>();
            record.forecast_start = parse_timestamp(node.at("forecast_start").get<std::string>());
            for (const auto& [key, value] : node.at("quantiles").items()) {
                record.quantiles[std::stod(key)] = number_array(value, "quantile curve");
            }
            if (node.contains("samples")) {
                for (const json& row : node["samples"]) {
                    record.samples.push_back(number_array(row, "sample path"));
                }
            }
            records.push_back(std::move(record));
        } catch (const std::exception& e) {
            throw std::runtime_error("forecast file line " + std::to_string(line_no) + ": " +
                                     e.what());
        }
    }
    return records;
}

} // namespace npts
