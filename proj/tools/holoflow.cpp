#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "holoflow/commands.hpp"

using namespace holoflow;
using namespace holoflow::cli;

namespace {

struct Globals {
    std::optional<std::string> window, json_path, svg_path, config_path;
    std::optional<double> tol;
    std::optional<int> seed_grid;
};

// defaults < config file < flags
Config resolve(const Globals& g) {
    Config cfg;
    if (g.config_path) cfg = load_config(*g.config_path, cfg);
    if (g.window) cfg.window = parse_window(*g.window);
    if (g.tol) {
        if (!(*g.tol > 0)) throw UsageError("--tol must be positive");
        cfg.tol = *g.tol;
    }
    if (g.seed_grid) {
        if (*g.seed_grid < 0) throw UsageError("--seed-grid must be >= 0");
        cfg.seed_grid = *g.seed_grid;
    }
    return cfg;
}

void write_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + path + "'");
    out << body;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int emit(const Outcome& o, const Globals& g) {
    const std::string text = report::dump(o.json);
    if (g.json_path)
        write_file(*g.json_path, text);
    else
        std::cout << text;
    if (g.svg_path) {
        if (o.svg)
            write_file(*g.svg_path, *o.svg);
        else
            std::cerr << "holoflow: no SVG produced for this command\n";
    }
    return o.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Singular complex analytic vector fields: classification, skeletons, regions, gluing, holonomy"};
    app.set_version_flag("--version", std::string(report::kToolVersion));
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--window", g.window, "x0,y0,x1,y1");
    app.add_option("--tol", g.tol, "integration tolerance");
    app.add_option("--seed-grid", g.seed_grid, "skeleton sweep seeds per side");
    app.add_option("--json", g.json_path, "write the JSON report here instead of stdout");
    app.add_option("--svg", g.svg_path, "write an SVG picture here");
    app.add_option("--config", g.config_path, "JSON config file");

    std::string field;
    auto* analyze = app.add_subcommand("analyze", "full pipeline report for h(z) d/dz");
    analyze->add_option("field", field, "h(z)")->required();

    auto* decompose = app.add_subcommand("decompose", "region census");
    decompose->add_option("field", field, "h(z)")->required();

    std::string from;
    double tau = 10.0;
    auto* trace = app.add_subcommand("trace", "one trajectory of Re(h d/dz)");
    trace->add_option("field", field, "h(z)")->required();
    trace->add_option("--from", from, "x,y")->required();
    trace->add_option("--tau", tau, "signed flow time")->capture_default_str();

    std::optional<std::string> spec_path, pattern;
    auto* glue = app.add_subcommand("glue", "build a flat surface from a gluing spec");
    glue->add_option("spec", spec_path, "gluing spec JSON file");
    glue->add_option("--pattern", pattern, "pole:K or saddle-node[:h]");

    std::optional<std::string> builtin, hfield;
    std::vector<std::string> params;
    auto* holo = app.add_subcommand("holonomy", "flow-box admissibility via numerical holonomy");
    holo->add_option("builtin", builtin, "built-in field name (omit to list)");
    holo->add_option("--field", hfield, "complex field h(z) instead of a built-in");
    holo->add_option("--param,-p", params, "name=value")->take_all();

    DictionaryArgs dict;
    std::vector<std::string> dparams;
    auto* dic = app.add_subcommand("dictionary", "vector field / form / flow-box dictionary operators");
    dic->set_help_flag("--help", "Print this help message and exit");  // frees --h for the field
    dic->add_option("op", dict.op, "c1 c1inv c2 c3 c4 c5 flowbox pushforward harmonic")->required();
    dic->add_option("--f", dict.f, "first integral f(x,y)");
    dic->add_option("--X", dict.X, "planar field: built-in name or 'P;Q'");
    dic->add_option("--Y", dict.Y, "second planar field");
    dic->add_option("--h", dict.h, "complex field h(z)");
    dic->add_option("--V", dict.V, "potential V(x,y)");
    dic->add_option("--mu", dict.mu, "scalar mu(x,y)");
    dic->add_option("--path", dict.path, "x,y -> x,y [-> ...]");
    dic->add_option("--alternate", dict.alternate, "second path with the same endpoints");
    dic->add_option("--at", dict.at, "x,y");
    dic->add_option("--param,-p", dparams, "name=value")->take_all();

    std::string word;
    auto* wcmd = app.add_subcommand("word", "validate a cyclic sector word and realize its germ");
    wcmd->add_option("word", word, "e.g. HHHH, HPH, EHH")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        const Config cfg = resolve(g);
        const bool svg = g.svg_path.has_value();
        if (*analyze) return emit(cmd_analyze(field, cfg, svg), g);
        if (*decompose) return emit(cmd_decompose(field, cfg, svg), g);
        if (*trace) return emit(cmd_trace(field, parse_point(from), tau, cfg, svg), g);
        if (*glue) {
            std::optional<std::string> text;
            if (spec_path) text = read_file(*spec_path);
            return emit(cmd_glue(text, pattern, cfg, svg), g);
        }
        if (*holo) return emit(cmd_holonomy(builtin, parse_params(params), hfield, cfg), g);
        if (*dic) {
            dict.params = parse_params(dparams);
            return emit(cmd_dictionary(dict, cfg), g);
        }
        if (*wcmd) return emit(cmd_word(word), g);
    } catch (const UsageError& e) {
        std::cerr << "holoflow: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParseError& e) {
        std::cerr << "holoflow: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "holoflow: " << e.what() << '\n';
        return kExitNumeric;
    }
    return kExitUsage;
}
