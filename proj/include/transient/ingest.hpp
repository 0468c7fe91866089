#pragma once

// Tabular series ingestion and the return-series preprocessing:
// transform, then trimming, then standardization.

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace transient::io {

enum class Transform { none, log_return };

Transform transform_from_string(const std::string& name);
std::string to_string(Transform t);

struct SeriesSpec {
    std::string path;
    /// Column name (matched against the header) or 0-based index.
    std::variant<std::string, std::size_t> column = std::size_t{0};
    Transform transform = Transform::none;
    std::optional<double> trim_sigma = 3.0;     // unset: no trimming
    std::optional<std::size_t> first_n;         // unset: no standardization

    /// Throws std::invalid_argument.
    void validate() const;
};

struct Provenance {
    std::size_t raw_count = 0;
    std::size_t transformed_count = 0;
    /// 0-based indices into the transformed series.
    std::vector<std::size_t> dropped;
    double trim_mean = 0.0;
    double trim_sd = 0.0;
    double scale = 1.0;        // divisor applied by standardization
    bool header = false;
    char delimiter = ',';
};

struct Series {
    std::vector<double> values;
    Provenance provenance;
};

/// Reads one numeric column. Comma or tab delimiters are detected from the
/// first non-empty line; a leading non-numeric row is the header. Throws
/// IngestError on unreadable files, missing columns and non-numeric cells.
std::vector<double> read_column(const std::string& path, const std::variant<std::string, std::size_t>& column,
                                bool* header = nullptr, char* delimiter = nullptr);

/// Preprocesses values already in memory; spec.path is ignored.
Series ingest_values(const std::vector<double>& raw, const SeriesSpec& spec);

Series ingest(const SeriesSpec& spec);

/// Sample standard deviation (divisor n - 1).
double sample_sd(const double* first, std::size_t n);

} // namespace transient::io
