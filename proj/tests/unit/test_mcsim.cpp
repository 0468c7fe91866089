#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <tuple>

#include "transient/approx.hpp"
#include "transient/errors.hpp"
#include "transient/mcsim.hpp"

using namespace transient;
using namespace transient::mcsim;
using charts::ChartId;
using efam::ModelId;

namespace {

Scenario exp_scenario(ChartId chart, double b, std::size_t reps = 100000) {
    Scenario s;
    s.chart.chart = chart;
    s.chart.model = ModelId::exp_rate;
    s.chart.w = 20;
    s.chart.threshold = b;
    s.chart.delta = 0.5;
    s.L = 20;
    s.replications = reps;
    s.seed = 99;
    return s;
}

bool within(const ProbabilityEstimate& e, double printed, std::size_t reference_n, double k = 3.0) {
    return std::abs(e.p_hat - printed) <= k * combined_std_error(e, printed, reference_n);
}

} // namespace

TEST_CASE("probability estimates") {
    const auto p = ProbabilityEstimate::from_counts(25, 100);
    CHECK(p.p_hat == 0.25);
    CHECK(p.std_error == doctest::Approx(std::sqrt(0.25 * 0.75 / 100.0)));
    CHECK(ProbabilityEstimate::from_counts(0, 10).std_error == 0.0);
    CHECK_THROWS_AS(ProbabilityEstimate::from_counts(11, 10), std::invalid_argument);
}

TEST_CASE("scenario validation and trivial runs") {
    auto s = exp_scenario(ChartId::ma, 1e6, 1);
    CHECK(run_scenario(s).p_hat == 0.0);
    s.replications = 0;
    CHECK_THROWS_AS(run_scenario(s), std::invalid_argument);
    s.replications = 10;
    s.L = 0;
    CHECK_THROWS_AS(run_scenario(s), std::invalid_argument);
    s.L = 20;
    s.signal = Signal::normal_params(0.0, 2.0);
    CHECK_THROWS_AS(run_scenario(s), std::invalid_argument);
    s.signal = Signal::canonical(1.5);
    CHECK_THROWS_AS(run_scenario(s), DomainError);
}

TEST_CASE("determinism across seeds and worker counts") {
    auto s = exp_scenario(ChartId::rstar_1p, 2.2, 20000);
    setenv("TRANSIENT_WORKERS", "1", 1);
    const auto a = run_scenario(s);
    const auto ma = replicate_maxima(s);
    setenv("TRANSIENT_WORKERS", "4", 1);
    const auto b = run_scenario(s);
    const auto mb = replicate_maxima(s);
    unsetenv("TRANSIENT_WORKERS");
    CHECK(a.p_hat == b.p_hat);
    CHECK(ma == mb);
    s.seed = 100;
    CHECK(run_scenario(s).p_hat != a.p_hat);
}

TEST_CASE("replicate maxima agree with alarm counting") {
    for (ChartId id : {ChartId::ma, ChartId::cusum_w, ChartId::sr_w}) {
        auto s = exp_scenario(id, id == ChartId::ma ? 2.5 : 4.0, 20000);
        s.signal = Signal::canonical(0.2);
        const auto maxima = replicate_maxima(s);
        const auto hits = std::count_if(maxima.begin(), maxima.end(), [&](double m) { return m > s.chart.threshold; });
        CHECK(run_scenario(s).p_hat == doctest::Approx(static_cast<double>(hits) / 20000.0).epsilon(1e-15));
    }
    auto s = exp_scenario(ChartId::rstar_1p, 2.0, 5000);
    s.chart.two_sided = true;
    const auto maxima = replicate_maxima(s);
    const auto hits = std::count_if(maxima.begin(), maxima.end(), [](double m) { return m > 2.0; });
    CHECK(run_scenario(s).p_hat == doctest::Approx(static_cast<double>(hits) / 5000.0).epsilon(1e-15));
}

TEST_CASE("exponential moving average chart against the printed table") {
    auto s = exp_scenario(ChartId::ma, 3.10);
    const auto null = run_scenario(s);
    CHECK(within(null, 0.0199, 10000));
    s.signal = Signal::canonical(efam::theta_from_natural(ModelId::exp_rate, 1.5));
    const auto pod = run_scenario(s);
    CHECK(std::abs(pod.p_hat - 0.3359) <= 0.005 + 3.0 * pod.std_error);
}

TEST_CASE("threshold calibration") {
    auto s = exp_scenario(ChartId::ma, 1.0);
    const auto ma = calibrate_threshold(s, 0.02);
    CHECK(std::abs(ma.threshold - 3.10) < 0.05);
    CHECK(std::abs(ma.achieved_fdp.p_hat - 0.02) <= std::max(1e-3, 2.0 * ma.achieved_fdp.std_error) + 1e-12);
    CHECK(ma.iterations >= 1);
    CHECK(ma.iterations <= 60);

    s.chart.chart = ChartId::rstar_1p;
    const auto rs = calibrate_threshold(s, 0.02);
    CHECK(std::abs(rs.threshold - 2.67) < 0.05);

    // common random numbers: estimated FDP nonincreasing in the threshold
    s.signal = Signal::null();
    s.replications = 20000;
    auto maxima = replicate_maxima(s);
    double prev = 1.0;
    for (int i = 0; i <= 60; ++i) {
        const double b = 1.5 + 0.04 * i;
        const double p = static_cast<double>(std::count_if(maxima.begin(), maxima.end(), [&](double m) { return m > b; })) /
                         static_cast<double>(maxima.size());
        CHECK(p <= prev);
        prev = p;
    }

    CHECK_THROWS_AS(calibrate_threshold(s, 0.6), std::invalid_argument);
    CHECK_THROWS_AS(calibrate_threshold(s, 0.02, 0.0), std::invalid_argument);
    // one monitored step: FDP at the lower default bracket end is about 0.3
    s.L = 1;
    s.replications = 20000;
    CHECK_THROWS_AS(calibrate_threshold(s, 0.45), CalibrationError);
}

TEST_CASE("initial bracket") {
    auto s = exp_scenario(ChartId::ma, 1.0);
    const auto [lo, hi] = initial_bracket(s, 0.02);
    CHECK(lo < 3.1);
    CHECK(hi > 3.1);
    s.chart.chart = ChartId::cusum_w;
    const auto [clo, chi] = initial_bracket(s, 0.02);
    CHECK(clo == doctest::Approx(0.5 * std::sqrt(std::log(20.0))));
    CHECK(chi == doctest::Approx(10.0 * std::sqrt(std::log(20.0))));
}

TEST_CASE("table layouts") {
    const auto t1 = table_spec(1);
    CHECK(t1.rows.size() == 27);
    CHECK(t1.columns.size() == 5);
    CHECK(t1.rows[4].L == 20);
    CHECK(t1.rows[4].label == "2.00");
    CHECK(*t1.printed[4][0] == 0.7780);
    CHECK(*t1.printed[22][3] == 0.4283);
    CHECK(t1.cells[4][3].chart.delta == 0.5);
    const auto t3 = table_spec(3);
    CHECK(t3.rows.size() == 9);
    CHECK(*t3.printed[4][2] == 0.4808);
    const auto t5 = table_spec(5);
    CHECK(t5.rows.size() == 9);
    CHECK(t5.columns.size() == 9);
    CHECK(*t5.printed[4][0] == 0.4617);
    CHECK(t5.reference_replications == 50000);
    CHECK(t5.cells[4][0].signal.normal.mean == 1.0);
    CHECK(t5.cells[0][4].signal.normal.variance == 2.0);
    CHECK_THROWS_AS(table_spec(6), std::invalid_argument);
    for (int id = 1; id <= 5; ++id) {
        const auto t = table_spec(id);
        CHECK(t.printed.size() == t.rows.size());
        for (const auto& row : t.cells)
            for (const auto& cell : row) CHECK_NOTHROW(cell.chart.validate());
    }
}

TEST_CASE("table spot checks") {
    const auto t1 = reproduce_table(1, 100000, 7, [](std::size_t r, std::size_t c) { return r == 4 && c == 0; });
    CHECK(within(*t1.estimates[4][0], 0.7780, 10000));
    CHECK(!t1.estimates[0][0]);
    const auto t3 = reproduce_table(3, 100000, 7, [](std::size_t r, std::size_t c) { return r == 4 && c == 2; });
    CHECK(within(*t3.estimates[4][2], 0.4808, 10000));
}

TEST_CASE("power exceeds the false detection probability") {
    for (int id = 1; id <= 5; ++id) {
        const auto spec = table_spec(id);
        const auto t = reproduce_table(id, 4000, 3, [&](std::size_t r, std::size_t c) {
            return id != 5 ? (r % 9 == 0 || r % 9 == 2) : (c == 0 && r <= 2) || (r == 0 && c <= 2);
        });
        for (std::size_t r = 0; r < spec.rows.size(); ++r) {
            for (std::size_t c = 0; c < spec.columns.size(); ++c) {
                if (!t.estimates[r][c]) continue;
                const std::size_t null_row = id == 5 ? 0 : r - r % 9;
                const std::size_t null_col = id == 5 ? 0 : c;
                if (null_row == r && null_col == c) continue;
                CHECK(t.estimates[r][c]->p_hat >= t.estimates[null_row][null_col]->p_hat);
            }
        }
    }
}

TEST_CASE("analytic fdp agrees with simulation within a factor 2.5") {
    struct Case {
        Scenario s;
        double analytic;
    };
    approx::ApproxInputs in;
    in.w = 20;
    in.L = 20;
    std::vector<Case> cases;
    for (const auto& [model, b_ma, b_r, b_rs, d, c, delta] :
         {std::tuple{ModelId::exp_rate, 3.10, 2.55, 2.67, 4.48, 6.14, 0.5},
          std::tuple{ModelId::normal_variance, 3.30, 2.55, 2.65, 3.96, 5.84,
                     efam::theta_from_natural(ModelId::normal_variance, 2.0)}}) {
        in.model = model;
        in.delta = delta;
        auto s = exp_scenario(ChartId::ma, b_ma, 40000);
        s.chart.model = model;
        s.chart.delta = delta;
        in.threshold = b_ma;
        cases.push_back({s, approx::fdp_ma(in).full});
        s.chart.chart = ChartId::r_1p;
        s.chart.threshold = in.threshold = b_r;
        cases.push_back({s, approx::fdp_rstar(in).simplified});
        s.chart.chart = ChartId::rstar_1p;
        s.chart.threshold = in.threshold = b_rs;
        cases.push_back({s, approx::fdp_rstar(in).simplified});
        s.chart.chart = ChartId::cusum_w;
        s.chart.threshold = in.threshold = d;
        cases.push_back({s, approx::fdp_cusum(in)});
        s.chart.chart = ChartId::sr_w;
        s.chart.threshold = in.threshold = c;
        cases.push_back({s, approx::fdp_sr(in)});
    }
    {
        in.model = ModelId::normal_two_param;
        auto s = exp_scenario(ChartId::rstar_var_unknown_mean, 2.65, 40000);
        s.chart.model = ModelId::normal_two_param;
        in.threshold = 2.65;
        cases.push_back({s, approx::fdp_scale_multiparam(in).simplified});
        s.chart.chart = ChartId::rstar_mean_unknown_var;
        s.chart.threshold = in.threshold = 2.67;
        in.model = ModelId::normal_mean;
        cases.push_back({s, approx::fdp_rstar(in).simplified});
        in.model = ModelId::normal_two_param;
        s.chart.chart = ChartId::bartlett_w2;
        s.chart.threshold = in.threshold = 9.3;
        cases.push_back({s, approx::fdp_bartlett(in).simplified});
    }
    {
        in.model = ModelId::normal_mean;
        in.w0 = 15;
        in.w1 = 25;
        in.threshold = 3.3;
        auto s = exp_scenario(ChartId::gma, 3.3, 40000);
        s.chart.model = ModelId::normal_mean;
        s.chart.w0 = 15;
        s.chart.w1 = 25;
        cases.push_back({s, approx::fdp_gma(in).full});
    }
    for (const auto& c : cases) {
        const double sim = run_scenario(c.s).p_hat;
        INFO(charts::to_string(c.s.chart.chart), " analytic ", c.analytic, " simulated ", sim);
        CHECK(c.analytic / sim < 2.5);
        CHECK(sim / c.analytic < 2.5);
    }
}

TEST_CASE("table rendering") {
    const auto t = reproduce_table(2, 2000, 1, [](std::size_t r, std::size_t c) { return r == 0 && c < 2; });
    const std::string csv = to_csv(t);
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    CHECK(line == "table,L,sigma^2,column,threshold,p_hat,std_error,replications,printed,abs_deviation");
    int n = 0;
    while (std::getline(is, line)) {
        ++n;
        CHECK(line.rfind("2,20,1.00,", 0) == 0);
    }
    CHECK(n == 2);
    const std::string text = to_text(t);
    CHECK(text.find("Table 2.") == 0);
    CHECK(text.find("b=3.30") != std::string::npos);
    CHECK(text.find("(0.0191)") != std::string::npos);
}
