#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ocp {

/// Timestamped real-valued observations, immutable once constructed.
///
/// Values are finite, there are at least two of them, and timestamps (when
/// present) are strictly increasing ISO-8601 strings of the same length.
class UnivariateSeries {
public:
    UnivariateSeries(std::string name, std::vector<double> values,
                     std::vector<std::string> timestamps = {});

    [[nodiscard]] const std::string& name() const noexcept { return name_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] const std::vector<std::string>& timestamps() const noexcept { return timestamps_; }
    [[nodiscard]] bool has_timestamps() const noexcept { return !timestamps_.empty(); }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }

private:
    std::string name_;
    std::vector<double> values_;
    std::vector<std::string> timestamps_;
};

/// Keeps only rows whose `column` cell equals `value` (e.g. one ticker
/// out of a multi-stock file).
struct RowFilter {
    std::string column;
    std::string value;
};

struct CsvOptions {
    std::string value_column;
    std::optional<std::string> date_column;
    std::optional<RowFilter> filter;
};

/// Reads one numeric column from a comma-separated file with a header row.
/// Rows are kept in file order; blank or non-numeric cells are rejected.
UnivariateSeries load_csv(const std::filesystem::path& path, const CsvOptions& options,
                          std::string name = {});

inline UnivariateSeries load_csv(const std::filesystem::path& path, const std::string& value_column,
                                 std::optional<std::string> date_column = std::nullopt) {
    return load_csv(path, CsvOptions{value_column, std::move(date_column), std::nullopt});
}

/// Training window [cursor - window_len, cursor) and forecast target `cursor`.
class SlidingWindowView {
public:
    SlidingWindowView(const UnivariateSeries& source, std::size_t window_len, std::size_t cursor);

    [[nodiscard]] std::span<const double> training() const noexcept;
    [[nodiscard]] std::size_t cursor() const noexcept { return cursor_; }
    [[nodiscard]] std::size_t window_len() const noexcept { return window_len_; }
    [[nodiscard]] std::size_t first_index() const noexcept { return cursor_ - window_len_; }
    [[nodiscard]] double target() const { return (*source_)[cursor_]; }

private:
    const UnivariateSeries* source_;
    std::size_t window_len_;
    std::size_t cursor_;
};

inline constexpr std::size_t kDefaultWindowLen = 365;

/// One view per cursor in [window_len, size). Throws SeriesTooShort when
/// size <= window_len.
std::vector<SlidingWindowView> windows(const UnivariateSeries& series,
                                       std::size_t window_len = kDefaultWindowLen);

struct DatasetSource {
    std::filesystem::path path;
    CsvOptions csv;
};

/// Dataset name -> location and columns. Relative paths resolve against the
/// manifest's own directory.
class DatasetManifest {
public:
    DatasetManifest() = default;
    explicit DatasetManifest(std::map<std::string, DatasetSource> entries) : entries_(std::move(entries)) {}

    static DatasetManifest load(const std::filesystem::path& path);
    static DatasetManifest parse(const std::string& json_text, const std::filesystem::path& base_dir);

    [[nodiscard]] const DatasetSource& at(const std::string& name) const;
    [[nodiscard]] bool contains(const std::string& name) const { return entries_.count(name) != 0; }
    [[nodiscard]] bool available(const std::string& name) const;
    [[nodiscard]] UnivariateSeries load_series(const std::string& name) const;
    [[nodiscard]] const std::map<std::string, DatasetSource>& entries() const noexcept { return entries_; }

private:
    std::map<std::string, DatasetSource> entries_;
};

}  // namespace ocp
