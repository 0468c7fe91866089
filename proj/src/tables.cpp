#include <cmath>
#include <cstdio>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "transient/mcsim.hpp"
#include "transient/rng.hpp"

namespace transient::mcsim {

namespace {

using charts::ChartConfig;
using charts::ChartId;
using efam::ModelId;

struct ColumnDef {
    std::string label;
    ChartId chart;
    double threshold;
    std::string threshold_label;
};

ChartConfig one_param(ModelId model, const ColumnDef& c, double delta) {
    ChartConfig cfg;
    cfg.chart = c.chart;
    cfg.model = model;
    cfg.w = 20;
    cfg.threshold = c.threshold;
    cfg.delta = delta;
    return cfg;
}

std::string fmt(double v, int digits = 2) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << v;
    return os.str();
}

using Grid = std::vector<std::vector<std::optional<double>>>;

// Printed values, rows in the order L = 20, 30, 10 and signal levels ascending.
const Grid kTable1 = {
    {0.0199, 0.0191, 0.0200, 0.0196, 0.0200}, {0.1127, 0.1224, 0.1112, 0.1174, 0.1296},
    {0.3359, 0.3465, 0.3274, 0.3380, 0.3481}, {0.5864, 0.6038, 0.5849, 0.5899, 0.5962},
    {0.7780, 0.7949, 0.7826, 0.7786, 0.7720}, {0.8993, 0.8966, 0.8994, 0.8888, 0.8931},
    {0.9539, 0.9580, 0.9516, 0.9496, 0.9481}, {0.9774, 0.9811, 0.9788, 0.9768, 0.9784},
    {0.9895, 0.9916, 0.9904, 0.9886, 0.9905},
    {0.0302, 0.0298, 0.0282, 0.0282, 0.0289}, {0.1952, 0.2111, 0.1923, 0.1825, 0.1926},
    {0.5136, 0.5338, 0.5161, 0.4901, 0.5015}, {0.7929, 0.8000, 0.7843, 0.7560, 0.7659},
    {0.9249, 0.9324, 0.9227, 0.9070, 0.9122}, {0.9780, 0.9752, 0.9759, 0.9703, 0.9691},
    {0.9937, 0.9954, 0.9921, 0.9903, 0.9926}, {0.9991, 0.9979, 0.9987, 0.9965, 0.9976},
    {0.9995, 0.9992, 0.9996, 0.9989, 0.9994},
    {0.0124, 0.0134, 0.0126, 0.0140, 0.0126}, {0.0403, 0.0412, 0.0341, 0.0509, 0.0540},
    {0.0980, 0.0973, 0.0969, 0.1406, 0.1525}, {0.1895, 0.1870, 0.1816, 0.2783, 0.2792},
    {0.2983, 0.3188, 0.3039, 0.4283, 0.4398}, {0.4370, 0.4469, 0.4245, 0.5632, 0.5914},
    {0.5471, 0.5613, 0.5463, 0.6865, 0.6898}, {0.6517, 0.6592, 0.6498, 0.7818, 0.7821},
    {0.7309, 0.7353, 0.7345, 0.8386, 0.8426},
};

const Grid kTable2 = {
    {0.0191, 0.0189, 0.0188, 0.0192, 0.0190}, {0.0713, 0.0737, 0.0751, 0.0797, 0.0826},
    {0.1812, 0.1875, 0.1846, 0.1946, 0.2070}, {0.3362, 0.3436, 0.3403, 0.3617, 0.3712},
    {0.4932, 0.4995, 0.4983, 0.5120, 0.5165}, {0.6306, 0.6355, 0.6359, 0.6517, 0.6545},
    {0.7395, 0.7445, 0.7436, 0.7449, 0.7629}, {0.8178, 0.8239, 0.8205, 0.8251, 0.8408},
    {0.8739, 0.8761, 0.8767, 0.8758, 0.8802},
    {0.0284, 0.0257, 0.0258, 0.0296, 0.0264}, {0.1205, 0.1290, 0.1176, 0.1253, 0.1270},
    {0.3053, 0.3137, 0.3109, 0.3108, 0.3078}, {0.5171, 0.5190, 0.5162, 0.5134, 0.5205},
    {0.6943, 0.6953, 0.6934, 0.6892, 0.6953}, {0.8168, 0.8199, 0.8195, 0.8154, 0.8202},
    {0.8927, 0.9039, 0.8955, 0.8927, 0.8915}, {0.9402, 0.9418, 0.9423, 0.9370, 0.9398},
    {0.9712, 0.9633, 0.9650, 0.9685, 0.9643},
    {0.0109, 0.0126, 0.0120, 0.0126, 0.0128}, {0.025, 0.0253, 0.0270, 0.0375, 0.0364},
    {0.0595, 0.0560, 0.0593, 0.0824, 0.0896}, {0.0976, 0.1015, 0.1075, 0.1522, 0.1571},
    {0.1676, 0.1680, 0.1707, 0.2343, 0.2440}, {0.2274, 0.2451, 0.2415, 0.3249, 0.3336},
    {0.3093, 0.3145, 0.3137, 0.4055, 0.4210}, {0.3846, 0.3920, 0.3997, 0.4899, 0.5033},
    {0.4501, 0.4763, 0.4591, 0.5566, 0.5665},
};

const Grid kTable3 = {
    {0.0202, 0.0218, 0.0207, 0.0204, 0.0206}, {0.0722, 0.0731, 0.0721, 0.0798, 0.0795},
    {0.1833, 0.1861, 0.1810, 0.1939, 0.1986}, {0.3327, 0.3433, 0.3287, 0.3430, 0.3462},
    {0.4797, 0.4819, 0.4808, 0.4937, 0.5064}, {0.6118, 0.6192, 0.6183, 0.6264, 0.6333},
    {0.7335, 0.7311, 0.7259, 0.7333, 0.7350}, {0.8157, 0.8100, 0.8101, 0.8138, 0.8149},
    {0.8659, 0.8673, 0.8601, 0.8671, 0.8688},
};

const Grid kTable4 = {
    {0.0234, 0.0246, 0.0237, 0.0233, 0.0240}, {0.0969, 0.1099, 0.1088, 0.0965, 0.1033},
    {0.3546, 0.3576, 0.3647, 0.3156, 0.3361}, {0.7103, 0.7159, 0.7210, 0.6400, 0.6686},
    {0.9338, 0.9402, 0.9378, 0.8816, 0.8968}, {0.9933, 0.9931, 0.9939, 0.9766, 0.9798},
    {0.9999, 0.9996, 0.9997, 0.9973, 0.9978}, {1.0, 1.0, 1.0, 0.9998, 0.9998},
    {1.0, 1.0, 1.0, 1.00, 1.0000},
};

const Grid kTable5 = {
    {0.0807, 0.1926, 0.3270, 0.4638, 0.5862, 0.6873, 0.7699, 0.8261, 0.8746},
    {0.0986, 0.2165, 0.3514, 0.4893, 0.6087, 0.7066, 0.7796, 0.8414, 0.8816},
    {0.1661, 0.3041, 0.4456, 0.5735, 0.6784, 0.7619, 0.8239, 0.8700, 0.9076},
    {0.2833, 0.4405, 0.5802, 0.6870, 0.7720, 0.8319, 0.8786, 0.9132, 0.9355},
    {0.4617, 0.6141, 0.7221, 0.8104, 0.8645, 0.9030, 0.9291, 0.9487, 0.9638},
    {0.6519, 0.7782, 0.8530, 0.9029, 0.9323, 0.9537, 0.9661, 0.9762, 0.9823},
    {0.8216, 0.8982, 0.9364, 0.9591, 0.9736, 0.9823, 0.9867, 0.9908, 0.9932},
    {0.9363, 0.9660, 0.9805, 0.9876, 0.9913, 0.9947, 0.9961, 0.9970, 0.9979},
    {0.9847, 0.9926, 0.9958, 0.9973, 0.9982, 0.9988, 0.9987, 0.9992, 0.9993},
};

const std::vector<double> kLevels = {1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0};

TableSpec one_param_table(int id, ModelId model, const std::vector<ColumnDef>& cols, double delta) {
    TableSpec t;
    t.id = id;
    const bool rate = model == ModelId::exp_rate;
    t.title = rate ? "POD for w=20, rate decrease in exponential data"
                   : "POD for w=20, variance increase in normal data";
    t.row_header = rate ? "1/lambda" : "sigma^2";
    t.printed = rate ? kTable1 : kTable2;
    for (const auto& c : cols) t.columns.push_back({c.label, c.threshold_label});
    for (std::size_t L : {20, 30, 10}) {
        for (double level : kLevels) {
            t.rows.push_back({L, fmt(level)});
            std::vector<Scenario> row;
            for (const auto& c : cols) {
                Scenario s;
                s.chart = one_param(model, c, delta);
                s.L = L;
                s.signal = level == 1.0 ? Signal::null()
                                        : Signal::canonical(efam::theta_from_natural(model, level));
                row.push_back(s);
            }
            t.cells.push_back(std::move(row));
        }
    }
    return t;
}

TableSpec two_param_table(int id, const std::vector<ColumnDef>& cols, bool variance) {
    TableSpec t;
    t.id = id;
    t.title = variance ? "POD for L=20, w=20, variance increase in normal data with unknown mean"
                       : "POD for L=20, w=20, mean increase in normal data with unknown variance";
    t.row_header = variance ? "sigma^2" : "mu";
    t.printed = variance ? kTable3 : kTable4;
    for (const auto& c : cols) t.columns.push_back({c.label, c.threshold_label});
    for (std::size_t i = 0; i < kLevels.size(); ++i) {
        const double level = variance ? kLevels[i] : 0.25 * static_cast<double>(i);
        t.rows.push_back({20, fmt(level)});
        std::vector<Scenario> row;
        for (const auto& c : cols) {
            Scenario s;
            s.chart.chart = c.chart;
            s.chart.model = ModelId::normal_two_param;
            s.chart.w = 20;
            s.chart.threshold = c.threshold;
            if (variance) {
                s.chart.profile_kind = charts::ProfileKind::variance_unknown_mean;
                s.chart.sigma0_sq = 1.0;
                s.chart.sigma1_sq = 2.0;
                s.chart.profile_estimate = charts::ProfileEstimate::per_k;
            } else {
                s.chart.profile_kind = charts::ProfileKind::mean_unknown_variance;
                s.chart.delta = 0.5;
            }
            s.L = 20;
            const bool null = variance ? level == 1.0 : level == 0.0;
            s.signal = null ? Signal::null()
                            : Signal::normal_params(variance ? 0.0 : level, variance ? level : 1.0);
            row.push_back(s);
        }
        t.cells.push_back(std::move(row));
    }
    return t;
}

TableSpec bartlett_table() {
    TableSpec t;
    t.id = 5;
    t.title = "POD for L=20, w=20, joint mean and variance change in normal data (b^2=9.3)";
    t.row_header = "mu";
    t.printed = kTable5;
    t.reference_replications = 50000;
    for (double v : kLevels) t.columns.push_back({"s2=" + fmt(v), "b^2=9.3"});
    for (std::size_t i = 0; i < 9; ++i) {
        const double mu = 0.25 * static_cast<double>(i);
        t.rows.push_back({20, fmt(mu)});
        std::vector<Scenario> row;
        for (double v : kLevels) {
            Scenario s;
            s.chart.chart = ChartId::bartlett_w2;
            s.chart.model = ModelId::normal_two_param;
            s.chart.w = 20;
            s.chart.threshold = 9.3;
            s.L = 20;
            s.signal = (mu == 0.0 && v == 1.0) ? Signal::null() : Signal::normal_params(mu, v);
            row.push_back(s);
        }
        t.cells.push_back(std::move(row));
    }
    return t;
}

std::uint64_t cell_seed(std::uint64_t seed, int id, std::size_t r, std::size_t c) {
    std::uint64_t sm = seed;
    std::uint64_t h = splitmix64(sm);
    sm = h ^ (static_cast<std::uint64_t>(id) << 48) ^ (static_cast<std::uint64_t>(r) << 24) ^ c;
    return splitmix64(sm);
}

std::string num(double v, bool exact) {
    char buf[64];
    std::snprintf(buf, sizeof buf, exact ? "%.17g" : "%.6g", v);
    return buf;
}

} // namespace

TableSpec table_spec(int id) {
    switch (id) {
    case 1:
        return one_param_table(1, ModelId::exp_rate,
                               {{"MA", ChartId::ma, 3.10, "b=3.10"},
                                {"R", ChartId::r_1p, 2.55, "b=2.55"},
                                {"R*", ChartId::rstar_1p, 2.67, "b=2.67"},
                                {"CUSUM", ChartId::cusum_w, 4.48, "d=4.48"},
                                {"S-R", ChartId::sr_w, 6.14, "c=6.14"}},
                               0.5);
    case 2:
        return one_param_table(2, ModelId::normal_variance,
                               {{"MA", ChartId::ma, 3.30, "b=3.30"},
                                {"R", ChartId::r_1p, 2.55, "b=2.55"},
                                {"R*", ChartId::rstar_1p, 2.65, "b=2.65"},
                                {"CUSUM", ChartId::cusum_w, 3.96, "d=3.96"},
                                {"S-R", ChartId::sr_w, 5.84, "c=5.84"}},
                               efam::theta_from_natural(ModelId::normal_variance, 2.0));
    case 3:
        return two_param_table(3,
                               {{"W", ChartId::wald_var_unknown_mean, 3.05, "b=3.05"},
                                {"R", ChartId::r_var_unknown_mean, 2.40, "b=2.40"},
                                {"R*", ChartId::rstar_var_unknown_mean, 2.65, "b=2.65"},
                                {"CUSUM", ChartId::cusum_profile, 3.58, "d=3.58"},
                                {"S-R", ChartId::sr_profile, 5.45, "c=5.45"}},
                               true);
    case 4:
        return two_param_table(4,
                               {{"t-test", ChartId::tstat, 3.10, "b=3.10"},
                                {"R", ChartId::r_mean_unknown_var, 2.77, "b=2.77"},
                                {"R*", ChartId::rstar_mean_unknown_var, 2.67, "b=2.67"},
                                {"CUSUM", ChartId::cusum_profile, 4.26, "d=4.26"},
                                {"S-R", ChartId::sr_profile, 6.7, "c=6.7"}},
                               false);
    case 5: return bartlett_table();
    default: throw std::invalid_argument("table id must be 1..5");
    }
}

TableResult reproduce_table(int id, std::size_t replications, std::uint64_t seed, const CellFilter& filter) {
    TableResult out;
    out.spec = table_spec(id);
    const std::size_t rows = out.spec.rows.size();
    const std::size_t cols = out.spec.columns.size();
    out.estimates.assign(rows, std::vector<std::optional<ProbabilityEstimate>>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (filter && !filter(r, c)) continue;
            Scenario s = out.spec.cells[r][c];
            s.replications = replications;
            s.seed = cell_seed(seed, id, r, c);
            out.estimates[r][c] = run_scenario(s);
        }
    }
    return out;
}

double combined_std_error(const ProbabilityEstimate& ours, double printed, std::size_t reference_replications) {
    const double p = printed;
    const double ref = p * (1.0 - p) / static_cast<double>(reference_replications);
    const double mine = p * (1.0 - p) / static_cast<double>(ours.replications);
    return std::sqrt(ref + mine);
}

std::string to_csv(const TableResult& t, bool exact) {
    std::ostringstream os;
    os << "table,L," << (t.spec.row_header) << ",column,threshold,p_hat,std_error,replications,printed,abs_deviation\n";
    for (std::size_t r = 0; r < t.spec.rows.size(); ++r) {
        for (std::size_t c = 0; c < t.spec.columns.size(); ++c) {
            const auto& e = t.estimates[r][c];
            if (!e) continue;
            const auto& printed = t.spec.printed[r][c];
            os << t.spec.id << ',' << t.spec.rows[r].L << ',' << t.spec.rows[r].label << ','
               << t.spec.columns[c].label << ',' << t.spec.columns[c].threshold_label << ','
               << num(e->p_hat, exact) << ',' << num(e->std_error, exact) << ',' << e->replications << ',';
            if (printed) os << num(*printed, exact) << ',' << num(std::abs(e->p_hat - *printed), exact);
            else os << ',';
            os << '\n';
        }
    }
    return os.str();
}

std::string to_text(const TableResult& t) {
    std::ostringstream os;
    os << "Table " << t.spec.id << ". " << t.spec.title << "\n";
    const int cw = 17;
    os << std::left << std::setw(4) << "L" << std::setw(10) << t.spec.row_header;
    for (const auto& c : t.spec.columns) os << std::setw(cw) << c.label;
    os << "\n" << std::setw(4) << "" << std::setw(10) << "boundary";
    for (const auto& c : t.spec.columns) os << std::setw(cw) << c.threshold_label;
    os << "\n";
    for (std::size_t r = 0; r < t.spec.rows.size(); ++r) {
        os << std::setw(4) << t.spec.rows[r].L << std::setw(10) << t.spec.rows[r].label;
        for (std::size_t c = 0; c < t.spec.columns.size(); ++c) {
            std::string cell = "-";
            if (const auto& e = t.estimates[r][c]) {
                cell = fmt(e->p_hat, 4);
                if (const auto& p = t.spec.printed[r][c]) cell += "(" + fmt(*p, 4) + ")";
            }
            os << std::setw(cw) << cell;
        }
        os << "\n";
    }
    os << "cells: simulated(printed)\n";
    return os.str();
}

} // namespace transient::mcsim
