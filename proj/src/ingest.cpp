#include "transient/ingest.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "transient/errors.hpp"

namespace transient::io {

namespace {

std::string_view strip(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\r' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r' || s.back() == '"')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(delim, start);
        out.push_back(strip(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::optional<double> parse_number(std::string_view s) {
    if (s.empty()) return std::nullopt;
    if (s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

} // namespace

Transform transform_from_string(const std::string& name) {
    if (name == "none") return Transform::none;
    if (name == "log_return") return Transform::log_return;
    throw std::invalid_argument("unknown transform '" + name + "'");
}

std::string to_string(Transform t) { return t == Transform::log_return ? "log_return" : "none"; }

void SeriesSpec::validate() const {
    if (trim_sigma && !(*trim_sigma > 0.0)) throw std::invalid_argument("trim_sigma must be positive");
    if (first_n && *first_n < 2) throw std::invalid_argument("first_n must be at least 2");
}

double sample_sd(const double* first, std::size_t n) {
    if (n < 2) throw std::invalid_argument("sample_sd needs two values");
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += first[i];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) ss += (first[i] - mean) * (first[i] - mean);
    return std::sqrt(ss / static_cast<double>(n - 1));
}

std::vector<double> read_column(const std::string& path, const std::variant<std::string, std::size_t>& column,
                                bool* header, char* delimiter) {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot read '" + path + "'");
    std::vector<double> out;
    std::string line;
    std::size_t lineno = 0;
    char delim = 0;
    bool seen_first = false;
    bool has_header = false;
    std::optional<std::size_t> index;
    if (const auto* i = std::get_if<std::size_t>(&column)) index = *i;

    while (std::getline(in, line)) {
        ++lineno;
        if (strip(line).empty()) continue;
        if (!delim) delim = line.find('\t') != std::string::npos ? '\t' : ',';
        const auto cells = split(line, delim);
        if (!seen_first) {
            seen_first = true;
            // a named column implies a header; otherwise the target cell decides
            const bool numeric = index && *index < cells.size() && parse_number(cells[*index]).has_value();
            if (!numeric) {
                has_header = true;
                if (!index) {
                    const auto& name = std::get<std::string>(column);
                    for (std::size_t k = 0; k < cells.size(); ++k) {
                        if (cells[k] == name) index = k;
                    }
                    if (!index) throw IngestError(path + ": no column named '" + name + "'");
                }
                continue;
            }
        }
        if (*index >= cells.size()) {
            throw IngestError(path + ":" + std::to_string(lineno) + ": missing column " + std::to_string(*index));
        }
        const auto v = parse_number(cells[*index]);
        if (!v) {
            throw IngestError(path + ":" + std::to_string(lineno) + ": non-numeric cell '" +
                              std::string(cells[*index]) + "'");
        }
        out.push_back(*v);
    }
    if (header) *header = has_header;
    if (delimiter) *delimiter = delim ? delim : ',';
    return out;
}

Series ingest_values(const std::vector<double>& raw, const SeriesSpec& spec) {
    spec.validate();
    Series s;
    s.provenance.raw_count = raw.size();

    std::vector<double> x;
    if (spec.transform == Transform::log_return) {
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (!(raw[i] > 0.0)) throw IngestError("log_return needs positive values (row " + std::to_string(i) + ")");
        }
        for (std::size_t i = 1; i < raw.size(); ++i) x.push_back(std::log(raw[i] / raw[i - 1]));
    } else {
        x = raw;
    }
    s.provenance.transformed_count = x.size();

    std::vector<double> kept;
    if (spec.trim_sigma && x.size() >= 2) {
        double mean = 0.0;
        for (double v : x) mean += v;
        mean /= static_cast<double>(x.size());
        const double sd = sample_sd(x.data(), x.size());
        s.provenance.trim_mean = mean;
        s.provenance.trim_sd = sd;
        const double limit = *spec.trim_sigma * sd;
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (std::abs(x[i] - mean) > limit) {
                s.provenance.dropped.push_back(i);
            } else {
                kept.push_back(x[i]);
            }
        }
    } else {
        kept = std::move(x);
    }

    if (spec.first_n) {
        const std::size_t n = *spec.first_n;
        if (kept.size() < n) {
            throw IngestError("standardization needs " + std::to_string(n) + " values, " +
                              std::to_string(kept.size()) + " remain after trimming");
        }
        const double sd = sample_sd(kept.data(), n);
        if (!(sd > 0.0)) throw IngestError("standardization scale is zero (first " + std::to_string(n) + " values are constant)");
        for (double& v : kept) v /= sd;
        s.provenance.scale = sd;
    }
    s.values = std::move(kept);
    return s;
}

Series ingest(const SeriesSpec& spec) {
    bool header = false;
    char delim = ',';
    const auto raw = read_column(spec.path, spec.column, &header, &delim);
    Series s = ingest_values(raw, spec);
    s.provenance.header = header;
    s.provenance.delimiter = delim;
    return s;
}

} // namespace transient::io
