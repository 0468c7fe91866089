#pragma once

// Monte Carlo engine: steady-state FDP / POD estimation, threshold
// calibration and the reproduction of the published comparison tables.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "transient/charts.hpp"
#include "transient/efam.hpp"

namespace transient::mcsim {

/// Distribution of the L monitored observations.
struct Signal {
    enum class Kind { none, canonical, normal };
    Kind kind = Kind::none;
    double theta = 0.0;                      // canonical parameter (one-parameter charts)
    efam::NormalParams normal{0.0, 1.0};     // raw observations (two-parameter charts)

    static Signal null() { return {}; }
    static Signal canonical(double theta) { return {Kind::canonical, theta, {0.0, 1.0}}; }
    static Signal normal_params(double mean, double variance) { return {Kind::normal, 0.0, {mean, variance}}; }

    bool operator==(const Signal&) const = default;
};

struct Scenario {
    charts::ChartConfig chart;
    Signal signal;
    std::size_t L = 20;
    std::size_t replications = 100000;
    std::uint64_t seed = 1;

    /// Throws std::invalid_argument / DomainError.
    void validate() const;

    bool operator==(const Scenario&) const = default;
};

struct ProbabilityEstimate {
    double p_hat = 0.0;
    double std_error = 0.0;   // sqrt(p(1-p)/n)
    std::size_t replications = 0;

    static ProbabilityEstimate from_counts(std::size_t hits, std::size_t n);
};

/// Each replication prefills the window with null data, then monitors L
/// observations drawn from the signal; the estimate is the fraction of
/// replications with at least one alarm. Replication r draws from
/// substream(seed, r), so results do not depend on the worker count.
ProbabilityEstimate run_scenario(const Scenario& s);

/// Largest statistic over the L monitored steps of every replication
/// (largest |statistic| for two-sided charts), in replication order.
std::vector<double> replicate_maxima(const Scenario& s);

struct CalibrationResult {
    double threshold = 0.0;
    ProbabilityEstimate achieved_fdp;
    std::size_t iterations = 0;
};

/// Bisection on the threshold with common random numbers: the null maxima
/// are simulated once and every candidate threshold is scored on them, so
/// the estimated FDP is exactly nonincreasing in the threshold. Bisects until
/// the bracket is 1e-4 wide (at most 60 steps), then requires
/// |p - target| <= max(tol, 2 se); CalibrationError otherwise or when no
/// bracket is found.
CalibrationResult calibrate_threshold(Scenario s, double target_fdp, double tol = 1e-3);

/// Starting bracket for calibrate_threshold.
std::pair<double, double> initial_bracket(const Scenario& s, double target_fdp);

// Table reproduction.

struct TableColumn {
    std::string label;
    std::string threshold_label;   // e.g. "b=3.10"
};

struct TableRow {
    std::size_t L = 20;
    std::string label;             // signal level as printed
};

struct TableSpec {
    int id = 0;
    std::string title;
    std::string row_header;
    std::vector<TableColumn> columns;
    std::vector<TableRow> rows;
    std::vector<std::vector<Scenario>> cells;              // [row][column], replications unset
    std::vector<std::vector<std::optional<double>>> printed;
    std::size_t reference_replications = 10000;
};

/// Layout, chart settings and printed values of table `id` (1..5).
TableSpec table_spec(int id);

struct TableResult {
    TableSpec spec;
    std::vector<std::vector<std::optional<ProbabilityEstimate>>> estimates;   // empty cells were skipped
};

using CellFilter = std::function<bool(std::size_t row, std::size_t col)>;

/// Simulates every cell accepted by `filter` (all cells by default). Cell
/// (r, c) uses a seed derived from (seed, id, r, c).
TableResult reproduce_table(int id, std::size_t replications, std::uint64_t seed,
                            const CellFilter& filter = {});

/// Combined standard error of a simulated cell and the printed value.
double combined_std_error(const ProbabilityEstimate& ours, double printed, std::size_t reference_replications);

/// One line per simulated cell: table,L,row,column,threshold,p_hat,std_error,
/// replications,printed,abs_deviation.
std::string to_csv(const TableResult& t, bool exact = false);
/// Grid laid out like the printed table, estimates with printed values.
std::string to_text(const TableResult& t);

} // namespace transient::mcsim
