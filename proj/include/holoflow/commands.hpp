#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "holoflow/report.hpp"

namespace holoflow::cli {

using report::Json;

// Bad flags, malformed input files, unparsable fields: exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumeric = 3;

struct Config {
    Window window = Window::square(2);
    double tol = 1e-12;          // traced separatrices, trace and holonomy integrations
    int seed_grid = 50;          // skeleton sweep seeds per side
    double theta = 0.0;
    double sweep_tau = 30.0;
    double curve_tau = 200.0;
    double epsilon = 1e-3;       // skeleton fattening for the decomposition
    int grid = 400;              // decomposition raster
    int holonomy_levels = 6;
    bool admissibility = true;   // analyze: run the admissibility stage

    Json echo() const;
};

// Keys: window, tol, seed_grid, theta, sweep_tau, curve_tau, epsilon, grid,
// holonomy_levels, admissibility. Unknown keys and wrong types throw
// UsageError naming the JSON pointer.
void apply_config(const Json& doc, Config& cfg);
Config load_config(const std::string& path, Config base = {});

Window parse_window(const std::string& text);        // "x0,y0,x1,y1"
Complex parse_point(const std::string& text);        // "x,y"
PathSpec parse_path(const std::string& text);        // "1,0 -> 2,0 -> 2,1"
std::map<std::string, double> parse_params(const std::vector<std::string>& items);  // "k=v"

struct Outcome {
    Json json;
    std::optional<std::string> svg;
    int exit_code = kExitOk;
};

Outcome cmd_analyze(const std::string& field, const Config& cfg, bool want_svg = false);
Outcome cmd_trace(const std::string& field, Complex from, double tau, const Config& cfg, bool want_svg = false);
Outcome cmd_decompose(const std::string& field, const Config& cfg, bool want_svg = false);

// `spec_text` is the JSON document; `pattern` ("pole:K", "saddle-node[:h]")
// replaces it with a built-in gluing.
Outcome cmd_glue(const std::optional<std::string>& spec_text, const std::optional<std::string>& pattern,
                 const Config& cfg, bool want_svg = false);

// A built-in planar field by name, or a complex field when `field` is set.
Outcome cmd_holonomy(const std::optional<std::string>& builtin, const std::map<std::string, double>& params,
                     const std::optional<std::string>& field, const Config& cfg);

struct DictionaryArgs {
    std::string op;  // c1 c1inv c2 c3 c4 c5 flowbox pushforward harmonic
    std::optional<std::string> f, X, Y, h, V, mu, path, alternate, at;
    std::map<std::string, double> params;
};
Outcome cmd_dictionary(const DictionaryArgs& args, const Config& cfg);

Outcome cmd_word(const std::string& word);

}  // namespace holoflow::cli
