#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "transient/cli.hpp"
#include "transient/config.hpp"
#include "transient/errors.hpp"
#include "transient/ingest.hpp"
#include "transient/monitor.hpp"

using namespace transient;
using namespace transient::io;
namespace fs = std::filesystem;

namespace {

fs::path temp_path(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "transient_cli_io_test";
    fs::create_directories(dir);
    return dir / name;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream f(p);
    f << text;
}

std::string read_file(const fs::path& p) {
    std::ifstream f(p);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// 300 points clipped to |x| <= 2, plus two planted outliers at 5 sd.
std::vector<double> outlier_fixture() {
    auto x = synthetic_series(300, 11);
    for (auto& v : x) v = std::clamp(v, -2.0, 2.0);
    const double sd = sample_sd(x.data(), x.size());
    x[50] = 5.0 * sd;
    x[200] = -5.0 * sd;
    return x;
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr) {
    args.insert(args.begin(), "transient");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
    if (out_text) *out_text = out.str();
    return code;
}

charts::ChartConfig rstar_mean_chart(double b = 2.67) {
    charts::ChartConfig c;
    c.chart = charts::ChartId::rstar_mean_unknown_var;
    c.model = efam::ModelId::normal_two_param;
    c.w = 20;
    c.threshold = b;
    c.two_sided = true;
    return c;
}

bool intersects(const MonitorReport& r, std::size_t lo, std::size_t hi) {
    return std::any_of(r.episodes.begin(), r.episodes.end(),
                       [&](const Episode& e) { return e.start <= hi && e.end >= lo; });
}

} // namespace

TEST_CASE("log returns of a geometric sequence") {
    SeriesSpec spec;
    spec.transform = Transform::log_return;
    const auto s = ingest_values({1.0, std::exp(1.0), std::exp(2.0)}, spec);
    REQUIRE(s.values.size() == 2);
    CHECK(s.values[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.values[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.provenance.dropped.empty());
}

TEST_CASE("constant prices cannot be standardized") {
    SeriesSpec spec;
    spec.transform = Transform::log_return;
    spec.first_n = 5;
    CHECK_THROWS_AS(ingest_values(std::vector<double>(30, 42.0), spec), IngestError);
    spec.first_n = 50;
    CHECK_THROWS_AS(ingest_values(std::vector<double>(30, 42.0), spec), IngestError);
    CHECK_THROWS_AS(ingest_values({1.0, -1.0, 2.0}, spec), IngestError);
    spec.first_n = 1;
    CHECK_THROWS_AS(ingest_values({1.0, 2.0, 3.0}, spec), std::invalid_argument);
}

TEST_CASE("trimming drops exactly the planted outliers") {
    const auto x = outlier_fixture();
    SeriesSpec spec;
    spec.first_n = 100;
    const auto s = ingest_values(x, spec);
    CHECK(s.provenance.dropped == std::vector<std::size_t>{50, 200});
    CHECK(s.values.size() == 298);
    CHECK(sample_sd(s.values.data(), 100) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ingest is idempotent on processed output") {
    SeriesSpec spec;
    spec.first_n = 100;
    const auto once = ingest_values(outlier_fixture(), spec);
    const auto twice = ingest_values(once.values, spec);
    CHECK(twice.provenance.dropped.empty());
    REQUIRE(twice.values.size() == once.values.size());
    for (std::size_t i = 0; i < once.values.size(); ++i) {
        CHECK(twice.values[i] == doctest::Approx(once.values[i]).epsilon(1e-12));
    }
}

TEST_CASE("preprocessing order is transform, trim, standardize") {
    const auto x = outlier_fixture();
    SeriesSpec spec;
    spec.first_n = 100;
    const auto s = ingest_values(x, spec);

    std::vector<double> kept;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i != 50 && i != 200) kept.push_back(x[i]);
    }
    CHECK(s.provenance.scale == doctest::Approx(sample_sd(kept.data(), 100)).epsilon(1e-14));

    // standardizing first would take the outlier at index 50 into the scale
    const double swapped_scale = sample_sd(x.data(), 100);
    CHECK(std::abs(swapped_scale - s.provenance.scale) > 0.05 * s.provenance.scale);

    // the +-k sd rule is scale invariant, so the swapped order drops the same points
    std::vector<double> scaled = x;
    for (auto& v : scaled) v /= swapped_scale;
    SeriesSpec trim_only;
    CHECK(ingest_values(scaled, trim_only).provenance.dropped == s.provenance.dropped);
}

TEST_CASE("reading delimited files") {
    const auto csv = temp_path("prices.csv");
    write_file(csv, "date,close\n2020-01-02,100\n2020-01-03,101.5\n\n2020-01-06,99\n");
    CHECK(read_column(csv.string(), std::string("close")) == std::vector<double>{100.0, 101.5, 99.0});
    CHECK(read_column(csv.string(), std::size_t{1}) == std::vector<double>{100.0, 101.5, 99.0});
    CHECK_THROWS_AS(read_column(csv.string(), std::string("open")), IngestError);

    const auto tsv = temp_path("prices.tsv");
    write_file(tsv, "1\t5\n2\t6\n3\t7\n");
    bool header = true;
    char delim = 0;
    CHECK(read_column(tsv.string(), std::size_t{1}, &header, &delim) == std::vector<double>{5.0, 6.0, 7.0});
    CHECK_FALSE(header);
    CHECK(delim == '\t');

    const auto bad = temp_path("bad.csv");
    write_file(bad, "close\n1\n2\nx3\n");
    try {
        read_column(bad.string(), std::string("close"));
        FAIL("expected IngestError");
    } catch (const IngestError& e) {
        CHECK(std::string(e.what()).find(":4:") != std::string::npos);
    }
    CHECK_THROWS_AS(read_column(temp_path("missing.csv").string(), std::size_t{0}), IngestError);

    SeriesSpec spec;
    spec.path = csv.string();
    spec.column = std::string("close");
    spec.transform = Transform::log_return;
    const auto s = ingest(spec);
    CHECK(s.provenance.header);
    CHECK(s.provenance.raw_count == 3);
    CHECK(s.values.size() == 2);
}

TEST_CASE("episodes partition the alarm set") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const auto x = synthetic_series(300, seed, {{150, 20, 1.0, 1.0}, {60, 20, -1.0, 1.0}});
        const auto rep = monitor(x, {{"", rstar_mean_chart(2.0)}, {"ma", [] {
                                         charts::ChartConfig c;
                                         c.chart = charts::ChartId::ma;
                                         c.threshold = 2.0;
                                         c.two_sided = true;
                                         return c;
                                     }()}});
        REQUIRE(rep.records.size() == 2 * (300 - 19));
        for (std::size_t c = 0; c < 2; ++c) {
            std::set<std::size_t> alarms, covered;
            std::map<std::size_t, charts::Direction> dir;
            for (const auto& r : rep.records) {
                if (r.chart == c && r.alarm) {
                    alarms.insert(r.t);
                    dir[r.t] = r.direction;
                }
            }
            std::size_t prev_end = 0;
            for (const auto& e : rep.episodes) {
                if (e.chart != c) continue;
                CHECK(e.start <= e.end);
                CHECK(e.start > prev_end);
                for (std::size_t t = e.start; t <= e.end; ++t) {
                    CHECK(covered.insert(t).second);
                    CHECK(dir.at(t) == e.direction);
                }
                // maximal: the neighbours are not same-direction alarms
                CHECK(!(alarms.count(e.start - 1) && dir[e.start - 1] == e.direction));
                CHECK(!(alarms.count(e.end + 1) && dir[e.end + 1] == e.direction));
                prev_end = e.end;
            }
            CHECK(covered == alarms);
        }
    }
}

TEST_CASE("episode extremal statistic") {
    const auto x = synthetic_series(200, 3, {{100, 20, -2.0, 1.0}});
    const auto rep = monitor(x, {{"rstar", rstar_mean_chart()}});
    REQUIRE(!rep.episodes.empty());
    for (const auto& e : rep.episodes) {
        double best = e.direction == charts::Direction::up ? -1e300 : 1e300;
        for (const auto& r : rep.records) {
            if (r.t >= e.start && r.t <= e.end) {
                best = e.direction == charts::Direction::up ? std::max(best, r.statistic) : std::min(best, r.statistic);
            }
        }
        CHECK(e.extremal == best);
        if (e.direction == charts::Direction::down) CHECK(e.extremal < -2.67);
    }
    CHECK(std::any_of(rep.episodes.begin(), rep.episodes.end(),
                      [](const Episode& e) { return e.direction == charts::Direction::down; }));
}

TEST_CASE("null and planted-shift monitoring") {
    std::size_t null_episodes = 0, hits = 0, var_hits = 0;
    charts::ChartConfig var_chart;
    var_chart.chart = charts::ChartId::rstar_var_unknown_mean;
    var_chart.model = efam::ModelId::normal_two_param;
    var_chart.threshold = 2.65;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        if (seed < 100) {
            const auto rep = monitor(synthetic_series(300, 5000 + seed), {{"", rstar_mean_chart()}});
            null_episodes += rep.episodes.size();
        }
        const auto shifted = monitor(synthetic_series(300, seed, {{150, 20, 1.0, 1.0}}), {{"", rstar_mean_chart()}});
        if (intersects(shifted, 150, 190)) ++hits;
        const auto var = monitor(synthetic_series(300, 9000 + seed, {{150, 20, 0.0, 2.0}}), {{"", var_chart}});
        if (intersects(var, 150, 169)) ++var_hits;
    }
    // about 0.024 per 20-step span and direction over 14 spans
    CHECK(null_episodes / 100.0 < 3.0);
    CHECK(hits >= 900);
    CHECK(var_hits >= 400);
}

TEST_CASE("chart errors carry the time index") {
    std::vector<double> x(60, 0.5);
    try {
        monitor(x, {{"flat", rstar_mean_chart()}});
        FAIL("expected DegenerateWindowError");
    } catch (const DegenerateWindowError& e) {
        CHECK(std::string(e.what()).find("flat at t=20") != std::string::npos);
    }
    CHECK_THROWS_AS(monitor(std::vector<double>(20, 0.0), {{"", rstar_mean_chart()}}), std::invalid_argument);
}

TEST_CASE("plot and episode output") {
    const auto rep = monitor(synthetic_series(60, 2, {{30, 20, 3.0, 1.0}}), {{"r", rstar_mean_chart()}});
    const auto plot = plot_long(rep);
    CHECK(plot.rfind("t,chart_id,statistic,alarm\n20,r,", 0) == 0);
    CHECK(std::count(plot.begin(), plot.end(), '\n') == 1 + 41);
    const auto ep = episodes_csv(rep);
    CHECK(ep.rfind("chart_id,start,end,direction,extremal\n", 0) == 0);
    CHECK(std::count(ep.begin(), ep.end(), '\n') == 1 + static_cast<long>(rep.episodes.size()));
    CHECK(format_number(0.1, false) == "0.1");
    CHECK(std::stod(format_number(0.1, true)) == 0.1);
}

TEST_CASE("sample acf") {
    const std::vector<double> alt{1, -1, 1, -1, 1, -1, 1, -1};
    const auto a = sample_acf(alt, 2);
    CHECK(a[0] == doctest::Approx(-7.0 / 8.0));
    CHECK(a[1] == doctest::Approx(6.0 / 8.0));
    const auto z = sample_acf(synthetic_series(20000, 8), 5);
    for (double v : z) CHECK(std::abs(v) < 4.0 / std::sqrt(20000.0));
    CHECK_THROWS_AS(sample_acf(alt, 8), std::invalid_argument);
}

TEST_CASE("config round trip") {
    const auto check = [](const std::string& text) {
        const auto s = scenario_from_config(parse_config(text));
        const auto again = scenario_from_config(parse_config(serialize_config(config_from_scenario(s))));
        CHECK(again == s);
        return s;
    };
    const auto a = check("chart = ma\nmodel = exp_rate\nb = 3.10\nL = 30\nreps = 5000\nseed = 18446744073709551615\n"
                         "signal-natural = 2.0  # 1/lambda\n");
    CHECK(a.signal.kind == mcsim::Signal::Kind::canonical);
    CHECK(a.signal.theta == doctest::Approx(0.5));
    CHECK(a.seed == 18446744073709551615ULL);
    const auto b = check("chart = cusum_profile\nprofile-kind = mean_unknown_variance\nprofile-estimate = per_k\n"
                         "delta = 0.5\nb = 4.26\nsignal-mean = 0.25\nsignal-var = 1.5\n");
    CHECK(b.chart.model == efam::ModelId::normal_two_param);
    CHECK(b.signal.normal == efam::NormalParams{0.25, 1.5});
    check("chart = rstar_mean_unknown_var\ntwo-sided = true\nb = 2.67\n");
    check("chart = gma\nw0 = 10\nw1 = 30\nsignal-theta = 0.1234567890123456789\n");

    CHECK_THROWS_AS(parse_config("chart ma\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("b = 1\nb = 2\n"), ConfigError);
    CHECK_THROWS_AS(scenario_from_config(parse_config("w = twenty\n")), ConfigError);
    CHECK_THROWS_AS(scenario_from_config(parse_config("chart = nope\n")), ConfigError);
    CHECK_THROWS_AS(scenario_from_config(parse_config("signal-theta = 0.1\nsignal-mean = 1\n")), ConfigError);
}

TEST_CASE("command line") {
    std::string out;
    CHECK(run_cli({"approx", "--formula", "fdp_rstar", "--w", "20", "--L", "20", "--b", "2.67"}, &out) == 0);
    CHECK(out.find("simplified 0.0184") != std::string::npos);

    CHECK(run_cli({"calibrate", "--model", "exp_rate", "--chart", "ma", "--w", "20", "--L", "20", "--target-fdp",
                   "0.02"},
                  &out) == 0);
    const double b = std::stod(out.substr(out.find("b = ") + 4));
    CHECK(std::abs(b - 3.10) < 0.05);

    const auto t1 = temp_path("t1.csv");
    CHECK(run_cli({"table", "--id", "1", "--reps", "2000", "--seed", "7", "--out", t1.string()}) == 0);
    const auto csv = read_file(t1);
    CHECK(csv.rfind("table,L,", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') > 40);

    const auto cfg = temp_path("sim.cfg");
    write_file(cfg, "chart = ma\nmodel = exp_rate\nb = 100\nreps = 1000\n");
    const auto sim = temp_path("sim.csv");
    CHECK(run_cli({"simulate", "--config", cfg.string(), "--b", "3.1", "--out", sim.string()}, &out) == 0);
    CHECK(out.find("b=3.1,") != std::string::npos);
    CHECK(read_file(sim).rfind("p_hat,std_error,replications\n", 0) == 0);

    const auto series = temp_path("series.csv");
    std::string text = "value\n";
    for (double v : synthetic_series(200, 4, {{120, 20, 2.0, 1.0}})) text += format_number(v, true) + "\n";
    write_file(series, text);
    const auto plot = temp_path("plot.csv");
    CHECK(run_cli({"monitor", "--input", series.string(), "--column", "value", "--chart",
                   "rstar_mean_unknown_var,tstat", "--b", "2.67,3.10", "--two-sided", "--first-n", "100", "--acf-lags",
                   "3", "--out", plot.string()},
                  &out) == 0);
    CHECK(out.find("alarm episodes") != std::string::npos);
    CHECK(read_file(plot).find(",tstat,") != std::string::npos);

    CHECK(run_cli({"--help"}) == 0);
    CHECK(run_cli({}) == 1);
    CHECK(run_cli({"frobnicate"}) == 1);
    CHECK(run_cli({"approx", "--formula", "fdp_ma", "--bogus", "1"}) == 1);
    CHECK(run_cli({"approx", "--formula", "nope"}) == 1);
    CHECK(run_cli({"approx", "--formula", "fdp_bartlett", "--model", "normal_two_param", "--b", "1.5"}) == 1);
    write_file(cfg, "chart = ma\nunknown-key = 1\n");
    CHECK(run_cli({"simulate", "--config", cfg.string()}) == 1);
    CHECK(run_cli({"simulate", "--config", temp_path("absent.cfg").string()}) == 1);
    CHECK(run_cli({"monitor", "--input", temp_path("absent.csv").string()}) == 2);
    const auto flat = temp_path("flat.csv");
    std::string ones;
    for (int i = 0; i < 40; ++i) ones += "1\n";
    write_file(flat, ones);
    CHECK(run_cli({"monitor", "--input", flat.string(), "--trim-sigma", "none"}) == 2);
}
