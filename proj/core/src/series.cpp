#include "ocp/series.hpp"

#include "ocp/error.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace ocp {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

// RFC 4180-ish: quoted fields may contain commas and doubled quotes.
std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.emplace_back(trim(field));
            field.clear();
        } else {
            field.push_back(c);
        }
    }
    fields.emplace_back(trim(field));
    return fields;
}

std::optional<double> parse_double(std::string_view text) {
    text = trim(text);
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    if (text.empty()) return std::nullopt;
    double value = 0.0;
    const auto* end = text.data() + text.size();
    const auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value)) return std::nullopt;
    return value;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    throw Error(ErrorCode::MissingColumn, "column '" + name + "' not found in header");
}

}  // namespace

UnivariateSeries::UnivariateSeries(std::string name, std::vector<double> values,
                                   std::vector<std::string> timestamps)
    : name_(std::move(name)), values_(std::move(values)), timestamps_(std::move(timestamps)) {
    if (values_.size() < 2) {
        throw Error(ErrorCode::EmptySeries, "series '" + name_ + "' needs at least 2 values");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw Error(ErrorCode::UnparseableValue, "non-finite value at index " + std::to_string(i), i + 1);
        }
    }
    if (!timestamps_.empty()) {
        if (timestamps_.size() != values_.size()) {
            throw Error(ErrorCode::InvalidTimestamps, "timestamp count differs from value count");
        }
        // ISO-8601 dates of equal width order lexicographically.
        for (std::size_t i = 1; i < timestamps_.size(); ++i) {
            if (!(timestamps_[i - 1] < timestamps_[i])) {
                throw Error(ErrorCode::InvalidTimestamps,
                            "timestamps not strictly increasing at row " + std::to_string(i + 1), i + 1);
            }
        }
    }
}

UnivariateSeries load_csv(const std::filesystem::path& path, const CsvOptions& options, std::string name) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::EmptySeries, path.string() + " is empty");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    const auto header = split_csv_line(line);

    const std::size_t value_idx = column_index(header, options.value_column);
    std::optional<std::size_t> date_idx;
    if (options.date_column) date_idx = column_index(header, *options.date_column);
    std::optional<std::size_t> filter_idx;
    if (options.filter) filter_idx = column_index(header, options.filter->column);

    std::vector<double> values;
    std::vector<std::string> dates;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) {
            throw Error(ErrorCode::UnparseableValue, "blank row " + std::to_string(row), row);
        }
        const auto fields = split_csv_line(line);
        auto cell = [&](std::size_t idx) -> const std::string& {
            if (idx >= fields.size()) {
                throw Error(ErrorCode::UnparseableValue, "row " + std::to_string(row) + " has too few fields", row);
            }
            return fields[idx];
        };
        if (filter_idx && cell(*filter_idx) != options.filter->value) continue;

        const auto parsed = parse_double(cell(value_idx));
        if (!parsed) {
            throw Error(ErrorCode::UnparseableValue,
                        "row " + std::to_string(row) + ": cannot parse '" + cell(value_idx) + "'", row);
        }
        values.push_back(*parsed);
        if (date_idx) dates.push_back(cell(*date_idx));
    }
    if (values.empty()) throw Error(ErrorCode::EmptySeries, path.string() + " has no matching rows");
    if (name.empty()) name = path.stem().string();
    return UnivariateSeries(std::move(name), std::move(values), std::move(dates));
}

SlidingWindowView::SlidingWindowView(const UnivariateSeries& source, std::size_t window_len, std::size_t cursor)
    : source_(&source), window_len_(window_len), cursor_(cursor) {
    if (window_len == 0 || cursor < window_len || cursor >= source.size()) {
        throw Error(ErrorCode::SeriesTooShort, "invalid window: cursor " + std::to_string(cursor) +
                                                   ", window " + std::to_string(window_len));
    }
}

std::span<const double> SlidingWindowView::training() const noexcept {
    return source_->values().subspan(cursor_ - window_len_, window_len_);
}

std::vector<SlidingWindowView> windows(const UnivariateSeries& series, std::size_t window_len) {
    if (window_len == 0) throw Error(ErrorCode::InvalidParameter, "window length must be positive");
    if (series.size() <= window_len) {
        throw Error(ErrorCode::SeriesTooShort, "series of length " + std::to_string(series.size()) +
                                                   " cannot fill a window of " + std::to_string(window_len));
    }
    std::vector<SlidingWindowView> views;
    views.reserve(series.size() - window_len);
    for (std::size_t cursor = window_len; cursor < series.size(); ++cursor) {
        views.emplace_back(series, window_len, cursor);
    }
    return views;
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::FileNotFound, "cannot open manifest " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str(), path.parent_path());
}

DatasetManifest DatasetManifest::parse(const std::string& json_text, const std::filesystem::path& base_dir) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorCode::InvalidConfig, "manifest must be a JSON object");

    std::map<std::string, DatasetSource> entries;
    for (const auto& [name, entry] : doc.items()) {
        if (!entry.is_object() || !entry.contains("path") || !entry.contains("value_column")) {
            throw Error(ErrorCode::InvalidConfig, "manifest entry '" + name + "' needs path and value_column");
        }
        DatasetSource source;
        std::filesystem::path p = entry.at("path").get<std::string>();
        source.path = p.is_absolute() ? p : base_dir / p;
        source.csv.value_column = entry.at("value_column").get<std::string>();
        if (entry.contains("date_column") && !entry.at("date_column").is_null()) {
            source.csv.date_column = entry.at("date_column").get<std::string>();
        }
        if (entry.contains("filter") && !entry.at("filter").is_null()) {
            const auto& f = entry.at("filter");
            source.csv.filter = RowFilter{f.at("column").get<std::string>(), f.at("value").get<std::string>()};
        }
        entries.emplace(name, std::move(source));
    }
    return DatasetManifest(std::move(entries));
}

const DatasetSource& DatasetManifest::at(const std::string& name) const {
    const auto it = entries_.find(name);
    if (it == entries_.end()) throw Error(ErrorCode::UnknownDataset, "dataset '" + name + "' not in manifest");
    return it->second;
}

bool DatasetManifest::available(const std::string& name) const {
    return contains(name) && std::filesystem::exists(at(name).path);
}

UnivariateSeries DatasetManifest::load_series(const std::string& name) const {
    const auto& source = at(name);
    return load_csv(source.path, source.csv, name);
}

}  // namespace ocp
