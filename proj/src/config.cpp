#include "transient/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "transient/errors.hpp"

namespace transient::io {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T>
std::optional<T> parse_whole(const Config& c, const std::string& key, const char* what) {
    const auto s = get_string(c, key);
    if (!s) return std::nullopt;
    T v{};
    const auto [p, ec] = std::from_chars(s->data(), s->data() + s->size(), v);
    if (ec != std::errc() || p != s->data() + s->size()) {
        throw ConfigError("'" + key + "' expects " + what + ", got '" + *s + "'");
    }
    return v;
}

template <class F>
auto convert(const std::string& key, const std::string& value, F&& f) {
    try {
        return f(value);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("'" + key + "': " + e.what());
    }
}

} // namespace

Config parse_config(const std::string& text) {
    Config c;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (key.rfind("--", 0) == 0) key.erase(0, 2);
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        if (!c.emplace(key, value).second) {
            throw ConfigError("config line " + std::to_string(lineno) + ": repeated key '" + key + "'");
        }
    }
    return c;
}

Config load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const Config& c) {
    std::string out;
    for (const auto& [k, v] : c) out += k + " = " + v + "\n";
    return out;
}

std::optional<std::string> get_string(const Config& c, const std::string& key) {
    const auto it = c.find(key);
    if (it == c.end()) return std::nullopt;
    return it->second;
}

std::optional<double> get_double(const Config& c, const std::string& key) {
    const auto s = get_string(c, key);
    if (!s) return std::nullopt;
    double v = 0.0;
    const char* first = s->data();
    if (!s->empty() && s->front() == '+') ++first;
    const auto [p, ec] = std::from_chars(first, s->data() + s->size(), v);
    if (ec != std::errc() || p != s->data() + s->size()) {
        throw ConfigError("'" + key + "' expects a number, got '" + *s + "'");
    }
    return v;
}

std::optional<std::size_t> get_size(const Config& c, const std::string& key) {
    return parse_whole<std::size_t>(c, key, "a non-negative integer");
}

std::optional<std::uint64_t> get_u64(const Config& c, const std::string& key) {
    return parse_whole<std::uint64_t>(c, key, "a non-negative integer");
}

bool get_bool(const Config& c, const std::string& key) {
    const auto s = get_string(c, key);
    if (!s) return false;
    if (*s == "true" || *s == "1" || *s == "yes" || s->empty()) return true;
    if (*s == "false" || *s == "0" || *s == "no") return false;
    throw ConfigError("'" + key + "' expects true or false, got '" + *s + "'");
}

charts::ChartConfig chart_from_config(const Config& c) {
    charts::ChartConfig cfg;
    if (const auto s = get_string(c, "chart")) {
        cfg.chart = convert("chart", *s, [](const std::string& v) { return charts::chart_from_string(v); });
    }
    if (const auto s = get_string(c, "model")) {
        cfg.model = convert("model", *s, [](const std::string& v) { return efam::model_from_string(v); });
    } else if (charts::is_two_param_chart(cfg.chart)) {
        cfg.model = efam::ModelId::normal_two_param;
    }
    if (const auto v = get_size(c, "w")) cfg.w = *v;
    if (const auto v = get_size(c, "w0")) cfg.w0 = *v;
    if (const auto v = get_size(c, "w1")) cfg.w1 = *v;
    if (const auto v = get_double(c, "b")) cfg.threshold = *v;
    if (const auto v = get_double(c, "delta")) cfg.delta = *v;
    if (const auto v = get_double(c, "sigma0-sq")) cfg.sigma0_sq = *v;
    if (const auto v = get_double(c, "sigma1-sq")) cfg.sigma1_sq = *v;
    if (const auto s = get_string(c, "profile-kind")) {
        cfg.profile_kind = convert("profile-kind", *s, [](const std::string& v) { return charts::profile_kind_from_string(v); });
    }
    if (const auto s = get_string(c, "profile-estimate")) {
        cfg.profile_estimate =
            convert("profile-estimate", *s, [](const std::string& v) { return charts::profile_estimate_from_string(v); });
    }
    cfg.two_sided = get_bool(c, "two-sided");
    return cfg;
}

mcsim::Scenario scenario_from_config(const Config& c) {
    mcsim::Scenario s;
    s.chart = chart_from_config(c);
    if (const auto v = get_size(c, "L")) s.L = *v;
    if (const auto v = get_size(c, "reps")) s.replications = *v;
    if (const auto v = get_u64(c, "seed")) s.seed = *v;

    const auto theta = get_double(c, "signal-theta");
    const auto natural = get_double(c, "signal-natural");
    const auto mean = get_double(c, "signal-mean");
    const auto var = get_double(c, "signal-var");
    const int forms = (theta ? 1 : 0) + (natural ? 1 : 0) + ((mean || var) ? 1 : 0);
    if (forms > 1) throw ConfigError("give one of signal-theta, signal-natural, signal-mean/signal-var");
    if (theta) {
        s.signal = mcsim::Signal::canonical(*theta);
    } else if (natural) {
        s.signal = mcsim::Signal::canonical(
            convert("signal-natural", "", [&](const std::string&) { return efam::theta_from_natural(s.chart.model, *natural); }));
    } else if (mean || var) {
        s.signal = mcsim::Signal::normal_params(mean.value_or(0.0), var.value_or(1.0));
    }
    return s;
}

Config config_from_scenario(const mcsim::Scenario& s) {
    Config c;
    const auto& k = s.chart;
    c["chart"] = std::string(charts::to_string(k.chart));
    c["model"] = std::string(efam::to_string(k.model));
    c["w"] = std::to_string(k.w);
    c["w0"] = std::to_string(k.w0);
    c["w1"] = std::to_string(k.w1);
    c["b"] = exact(k.threshold);
    c["delta"] = exact(k.delta);
    c["sigma0-sq"] = exact(k.sigma0_sq);
    c["sigma1-sq"] = exact(k.sigma1_sq);
    c["profile-kind"] = std::string(charts::to_string(k.profile_kind));
    c["profile-estimate"] = std::string(charts::to_string(k.profile_estimate));
    c["two-sided"] = k.two_sided ? "true" : "false";
    c["L"] = std::to_string(s.L);
    c["reps"] = std::to_string(s.replications);
    c["seed"] = std::to_string(s.seed);
    switch (s.signal.kind) {
    case mcsim::Signal::Kind::none: break;
    case mcsim::Signal::Kind::canonical: c["signal-theta"] = exact(s.signal.theta); break;
    case mcsim::Signal::Kind::normal:
        c["signal-mean"] = exact(s.signal.normal.mean);
        c["signal-var"] = exact(s.signal.normal.variance);
        break;
    }
    return c;
}

approx::ApproxInputs approx_inputs_from_config(const Config& c) {
    approx::ApproxInputs in;
    if (const auto s = get_string(c, "model")) {
        in.model = convert("model", *s, [](const std::string& v) { return efam::model_from_string(v); });
    }
    if (const auto v = get_size(c, "w")) in.w = *v;
    if (const auto v = get_size(c, "w0")) in.w0 = *v;
    if (const auto v = get_size(c, "w1")) in.w1 = *v;
    if (const auto v = get_size(c, "L")) in.L = *v;
    if (const auto v = get_double(c, "b")) in.threshold = *v;
    if (const auto v = get_double(c, "delta")) in.delta = *v;
    if (const auto v = get_size(c, "p")) in.p = static_cast<int>(*v);
    if (const auto v = get_double(c, "rho")) in.rho_plus = *v;
    if (const auto s = get_string(c, "attenuation")) {
        if (*s == "exp_rho") in.attenuation = approx::Attenuation::exp_rho;
        else if (*s == "none") in.attenuation = approx::Attenuation::none;
        else throw ConfigError("'attenuation' expects exp_rho or none, got '" + *s + "'");
    }
    if (const auto s = get_string(c, "rho-convention")) {
        if (*s == "normal_reference") in.rho_convention = approx::RhoConvention::normal_reference;
        else if (*s == "model_specific") in.rho_convention = approx::RhoConvention::model_specific;
        else throw ConfigError("'rho-convention' expects normal_reference or model_specific, got '" + *s + "'");
    }
    in.continuity_correction = get_bool(c, "continuity-correction");
    return in;
}

} // namespace transient::io
