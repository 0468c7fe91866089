#include "transient/cli.hpp"

#include <fstream>
#include <map>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>
#include <vector>

#include "CLI11.hpp"

#include "transient/approx.hpp"
#include "transient/config.hpp"
#include "transient/errors.hpp"
#include "transient/ingest.hpp"
#include "transient/mcsim.hpp"
#include "transient/monitor.hpp"

namespace transient::cli {

namespace {

using io::Config;
using io::format_number;

struct Key {
    const char* name;
    const char* help;
    bool flag = false;
};

const std::vector<Key> kChartKeys = {
    {"chart", "chart id (ma, gma, rstar_1p, r_1p, cusum_w, sr_w, rstar_var_unknown_mean, ...)"},
    {"model", "normal_mean, exp_rate, normal_variance or normal_two_param"},
    {"w", "window length"},
    {"w0", "smallest gma window"},
    {"w1", "largest gma window"},
    {"b", "threshold (b, d, c, or b^2 for bartlett_w2)"},
    {"delta", "CUSUM/S-R reference signal"},
    {"sigma0-sq", "profile chart baseline variance"},
    {"sigma1-sq", "profile chart changed variance"},
    {"profile-kind", "variance_unknown_mean or mean_unknown_variance"},
    {"profile-estimate", "whole_window or per_k"},
    {"two-sided", "alarm on -b as well", true},
};

const std::vector<Key> kRunKeys = {
    {"L", "monitored steps"},
    {"reps", "replications"},
    {"seed", "64-bit seed"},
};

const std::vector<Key> kSignalKeys = {
    {"signal-theta", "canonical signal parameter"},
    {"signal-natural", "signal on the natural scale (changed mean 1/lambda or variance)"},
    {"signal-mean", "raw normal signal mean (two-parameter charts)"},
    {"signal-var", "raw normal signal variance (two-parameter charts)"},
};

const std::vector<Key> kCommonKeys = {
    {"out", "machine-readable output path"},
    {"exact", "print round-trip precision", true},
};

struct Command {
    CLI::App* app = nullptr;
    std::vector<Key> keys;
    std::map<std::string, std::string> values;
    std::map<std::string, bool> flags;
    std::string config_path;

    void add(const std::vector<Key>& ks) {
        for (const auto& k : ks) {
            keys.push_back(k);
            const std::string opt = std::string("--") + k.name;
            if (k.flag) {
                app->add_flag(opt, flags[k.name], k.help);
            } else {
                app->add_option(opt, values[k.name], k.help);
            }
        }
    }

    // Config file first, then flags given on the command line.
    Config merged() const {
        Config c;
        if (!config_path.empty()) {
            std::set<std::string> known;
            for (const auto& k : keys) known.insert(k.name);
            for (const auto& [k, v] : io::load_config(config_path)) {
                if (!known.count(k)) throw ConfigError("unknown config key '" + k + "' for " + app->get_name());
                c[k] = v;
            }
        }
        for (const auto& k : keys) {
            const std::string opt = std::string("--") + k.name;
            if (app->count(opt) == 0) continue;
            if (k.flag) {
                c[k.name] = flags.at(k.name) ? "true" : "false";
            } else {
                c[k.name] = values.at(k.name);
            }
        }
        return c;
    }
};

void write_output(const Config& c, const std::string& text, std::ostream& out) {
    const auto path = io::get_string(c, "out");
    if (!path) return;
    std::ofstream f(*path);
    if (!f) throw std::runtime_error("cannot write '" + *path + "'");
    f << text;
    if (!f) throw std::runtime_error("write to '" + *path + "' failed");
    out << "wrote " << *path << "\n";
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

int run_simulate(const Config& c, std::ostream& out) {
    const auto s = io::scenario_from_config(c);
    const bool exact = io::get_bool(c, "exact");
    const auto p = mcsim::run_scenario(s);
    write_output(c,
                 "p_hat,std_error,replications\n" + format_number(p.p_hat, exact) + "," +
                     format_number(p.std_error, exact) + "," + std::to_string(p.replications) + "\n",
                 out);
    out << (s.signal.kind == mcsim::Signal::Kind::none ? "FDP" : "POD") << " " << format_number(p.p_hat, exact)
        << " +/- " << format_number(p.std_error, exact) << " (" << p.replications << " replications, "
        << charts::to_string(s.chart.chart) << ", b=" << format_number(s.chart.threshold, exact) << ", L=" << s.L
        << ")\n";
    return 0;
}

int run_calibrate(const Config& c, std::ostream& out) {
    const auto s = io::scenario_from_config(c);
    const bool exact = io::get_bool(c, "exact");
    const double target = io::get_double(c, "target-fdp").value_or(0.02);
    const double tol = io::get_double(c, "tol").value_or(1e-3);
    const auto r = mcsim::calibrate_threshold(s, target, tol);
    write_output(c,
                 "threshold,achieved_fdp,std_error,replications,iterations\n" + format_number(r.threshold, exact) + "," +
                     format_number(r.achieved_fdp.p_hat, exact) + "," + format_number(r.achieved_fdp.std_error, exact) +
                     "," + std::to_string(r.achieved_fdp.replications) + "," + std::to_string(r.iterations) + "\n",
                 out);
    out << "b = " << format_number(r.threshold, exact) << " (FDP " << format_number(r.achieved_fdp.p_hat, exact)
        << " +/- " << format_number(r.achieved_fdp.std_error, exact) << ", target " << format_number(target, exact)
        << ", " << r.iterations << " bisection steps)\n";
    return 0;
}

int run_table(const Config& c, std::ostream& out) {
    const auto id = io::get_size(c, "id");
    if (!id) throw ConfigError("table needs --id");
    const std::size_t reps = io::get_size(c, "reps").value_or(100000);
    const std::uint64_t seed = io::get_u64(c, "seed").value_or(1);
    const auto t = mcsim::reproduce_table(static_cast<int>(*id), reps, seed);
    write_output(c, mcsim::to_csv(t, io::get_bool(c, "exact")), out);
    out << mcsim::to_text(t);
    return 0;
}

int run_rho(const Config& c, std::ostream& out) {
    const bool exact = io::get_bool(c, "exact");
    const auto model = efam::model_from_string(io::get_string(c, "model").value_or("normal_mean"));
    approx::RhoOptions opt;
    if (const auto v = io::get_size(c, "reps")) opt.replications = *v;
    if (const auto v = io::get_u64(c, "seed")) opt.seed = *v;
    const auto e = approx::estimate_rho_plus(model, opt);
    write_output(c,
                 "model,rho_plus,std_error,replications,censored\n" + std::string(efam::to_string(model)) + "," +
                     format_number(e.rho_plus, exact) + "," + format_number(e.std_error, exact) + "," +
                     std::to_string(e.replications) + "," + std::to_string(e.censored) + "\n",
                 out);
    out << "rho_plus(" << efam::to_string(model) << ") = " << format_number(e.rho_plus, exact) << " +/- "
        << format_number(e.std_error, exact) << " (" << e.replications << " walks, " << e.censored << " censored)\n";
    return 0;
}

int run_approx(const Config& c, std::ostream& out) {
    const bool exact = io::get_bool(c, "exact");
    const auto formula = io::get_string(c, "formula");
    if (!formula) throw ConfigError("approx needs --formula");
    const auto in = io::approx_inputs_from_config(c);
    const auto values = approx::evaluate_formula(*formula, in);
    std::string csv = "formula,form,value\n";
    for (const auto& [label, v] : values) {
        csv += *formula + "," + label + "," + format_number(v, exact) + "\n";
        out << *formula << " " << label << " " << format_number(v, exact) << "\n";
    }
    write_output(c, csv, out);
    return 0;
}

int run_monitor(const Config& c, std::ostream& out) {
    const bool exact = io::get_bool(c, "exact");
    io::SeriesSpec spec;
    const auto input = io::get_string(c, "input");
    if (!input) throw ConfigError("monitor needs --input");
    spec.path = *input;
    if (const auto col = io::get_string(c, "column")) {
        spec.column = !col->empty() && col->find_first_not_of("0123456789") == std::string::npos
                          ? std::variant<std::string, std::size_t>(*io::get_size(c, "column"))
                          : std::variant<std::string, std::size_t>(*col);
    }
    if (const auto s = io::get_string(c, "transform")) spec.transform = io::transform_from_string(*s);
    if (const auto s = io::get_string(c, "trim-sigma")) {
        spec.trim_sigma = *s == "none" ? std::nullopt : io::get_double(c, "trim-sigma");
    }
    if (const auto v = io::get_size(c, "first-n")) spec.first_n = *v;
    const auto series = io::ingest(spec);

    Config chart_keys = c;
    const auto names = split_list(io::get_string(c, "chart").value_or("rstar_mean_unknown_var"));
    const auto bs = split_list(io::get_string(c, "b").value_or("2.67"));
    if (bs.size() != 1 && bs.size() != names.size()) throw ConfigError("give one b or one per chart");
    std::vector<io::MonitorChart> list;
    for (std::size_t i = 0; i < names.size(); ++i) {
        chart_keys["chart"] = names[i];
        chart_keys["b"] = bs.size() == 1 ? bs[0] : bs[i];
        list.push_back({names[i], io::chart_from_config(chart_keys)});
    }
    const auto rep = io::monitor(series.values, list);
    write_output(c, io::plot_long(rep, exact), out);
    if (const auto path = io::get_string(c, "episodes-out")) {
        std::ofstream f(*path);
        if (!f) throw std::runtime_error("cannot write '" + *path + "'");
        f << io::episodes_csv(rep, exact);
        out << "wrote " << *path << "\n";
    }

    const auto& pv = series.provenance;
    out << "series: " << pv.raw_count << " rows, " << pv.transformed_count << " after transform, "
        << pv.dropped.size() << " trimmed, " << series.values.size() << " monitored, scale "
        << format_number(pv.scale, exact) << "\n";
    if (!pv.dropped.empty()) {
        out << "dropped:";
        for (auto i : pv.dropped) out << " " << i;
        out << "\n";
    }
    out << rep.episodes.size() << " alarm episodes\n";
    for (const auto& e : rep.episodes) {
        out << "  " << rep.labels[e.chart] << " t=" << e.start << ".." << e.end << " "
            << (e.direction == charts::Direction::up ? "up" : "down") << " extremal "
            << format_number(e.extremal, exact) << "\n";
    }
    if (const auto lags = io::get_size(c, "acf-lags"); lags && *lags > 0) {
        std::vector<double> sq(series.values.size());
        for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = series.values[i] * series.values[i];
        const auto a = io::sample_acf(series.values, *lags);
        const auto a2 = io::sample_acf(sq, *lags);
        out << "lag acf acf_squared\n";
        for (std::size_t k = 0; k < a.size(); ++k) {
            out << k + 1 << " " << format_number(a[k], exact) << " " << format_number(a2[k], exact) << "\n";
        }
    }
    return 0;
}

} // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Window-limited detection of transient signals", "transient"};
    app.require_subcommand(1);
    std::map<std::string, std::unique_ptr<Command>> cmds;
    const auto make = [&](const char* name, const char* help) -> Command& {
        auto cmd = std::make_unique<Command>();
        cmd->app = app.add_subcommand(name, help);
        cmd->app->add_option("--config", cmd->config_path, "key = value file; flags override it");
        cmd->add(kCommonKeys);
        auto& ref = *cmd;
        cmds[name] = std::move(cmd);
        return ref;
    };

    auto& simulate = make("simulate", "FDP or POD of one scenario by simulation");
    simulate.add(kChartKeys);
    simulate.add(kRunKeys);
    simulate.add(kSignalKeys);

    auto& calibrate = make("calibrate", "threshold achieving a target FDP");
    calibrate.add(kChartKeys);
    calibrate.add(kRunKeys);
    calibrate.add({{"target-fdp", "target false detection probability"}, {"tol", "accepted FDP deviation"}});

    auto& table = make("table", "reproduce a comparison table (1..5)");
    table.add({{"id", "table number"}, {"reps", "replications per cell"}, {"seed", "64-bit seed"}});

    auto& monitor = make("monitor", "ingest a series and run charts over it");
    monitor.add({{"input", "delimiter-separated input file"},
                 {"column", "value column name or 0-based index"},
                 {"transform", "none or log_return"},
                 {"trim-sigma", "trimming multiple of the sd, or none"},
                 {"first-n", "standardize by the sd of the first n retained values"},
                 {"episodes-out", "alarm episode output path"},
                 {"acf-lags", "print the sample ACF up to this lag"}});
    monitor.add(kChartKeys);

    auto& rho = make("rho", "estimate the overshoot constant by simulation");
    rho.add({{"model", "model id"}, {"reps", "ladder replications"}, {"seed", "64-bit seed"}});

    auto& approx_cmd = make("approx", "evaluate an analytic FDP or POD formula");
    approx_cmd.add({{"formula", "fdp_ma, fdp_ma_closed, fdp_gma, fdp_rstar, fdp_cusum, fdp_sr, fdp_scale, "
                                "fdp_bartlett, pod_ma or pod_rstar"},
                    {"model", "model id"},
                    {"w", "window length"},
                    {"w0", "smallest gma window"},
                    {"w1", "largest gma window"},
                    {"L", "monitored steps"},
                    {"b", "threshold"},
                    {"delta", "reference or signal parameter"},
                    {"p", "Bartlett degrees of freedom"},
                    {"attenuation", "exp_rho or none"},
                    {"rho-convention", "normal_reference or model_specific"},
                    {"rho", "explicit overshoot constant"},
                    {"continuity-correction", "Bartlett continuity correction", true}});

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        for (const auto& [name, cmd] : cmds) {
            if (!cmd->app->parsed()) continue;
            const Config c = cmd->merged();
            if (name == "simulate") return run_simulate(c, out);
            if (name == "calibrate") return run_calibrate(c, out);
            if (name == "table") return run_table(c, out);
            if (name == "monitor") return run_monitor(c, out);
            if (name == "rho") return run_rho(c, out);
            if (name == "approx") return run_approx(c, out);
        }
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

} // namespace transient::cli
