#pragma once

// Flat "key = value" configuration. Keys are the command-line flag names
// without the leading dashes; '#' starts a comment.

#include <map>
#include <optional>
#include <string>

#include "transient/approx.hpp"
#include "transient/charts.hpp"
#include "transient/mcsim.hpp"

namespace transient::io {

using Config = std::map<std::string, std::string>;

/// Throws ConfigError on malformed lines and repeated keys.
Config parse_config(const std::string& text);
Config load_config(const std::string& path);
std::string serialize_config(const Config& c);

// Typed lookups; ConfigError when the value does not parse.
std::optional<std::string> get_string(const Config& c, const std::string& key);
std::optional<double> get_double(const Config& c, const std::string& key);
std::optional<std::size_t> get_size(const Config& c, const std::string& key);
std::optional<std::uint64_t> get_u64(const Config& c, const std::string& key);
bool get_bool(const Config& c, const std::string& key);

/// Keys: chart, model, w, w0, w1, b, delta, sigma0-sq, sigma1-sq,
/// profile-kind, profile-estimate, two-sided. Two-parameter charts default
/// to normal_two_param.
charts::ChartConfig chart_from_config(const Config& c);

/// Chart keys plus L, reps, seed and one signal form: signal-theta,
/// signal-natural, or signal-mean / signal-var for two-parameter charts.
mcsim::Scenario scenario_from_config(const Config& c);
/// Inverse of scenario_from_config; numbers are written with %.17g.
Config config_from_scenario(const mcsim::Scenario& s);

/// Keys: model, w, w0, w1, L, b, delta, p, attenuation, rho-convention, rho,
/// continuity-correction.
approx::ApproxInputs approx_inputs_from_config(const Config& c);

} // namespace transient::io
