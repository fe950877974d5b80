#include "collapse/cli/config.hpp"

#include "collapse/bell.hpp"
#include "collapse/error.hpp"
#include "collapse/states.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <string_view>

namespace collapse::cli {

namespace {

using nlohmann::json;

[[noreturn]] void usage(const std::string& message)
{
    throw Error(ErrorCode::UsageError, message);
}

struct FlagSpec {
    const char* key;
    const char* help;
    bool is_switch = false;
};

const std::vector<FlagSpec>& common_flags()
{
    static const std::vector<FlagSpec> flags = {
        {"seed", "64-bit RNG seed (0 is a valid seed)"},
        {"entropy", "draw the seed from the OS and record it in the manifest", true},
        {"output", "result file (default: stdout)"},
        {"format", "csv or json"},
        {"threads", "worker threads (0: COLLAPSE_WALK_THREADS or OpenMP default)"},
    };
    return flags;
}

const std::map<Subcommand, std::vector<FlagSpec>>& subcommand_flags()
{
    static const std::map<Subcommand, std::vector<FlagSpec>> flags = {
        {Subcommand::born,
         {{"amplitudes", "semicolon-separated re,im pairs, e.g. \"0.6,0;0,0.8\""},
          {"trials", "independent walks"},
          {"grid-resolution", "grid units M per unit weight"},
          {"max-steps", "step cap per walk (0: 100 M^2)"}}},
        {Subcommand::walk,
         {{"amplitudes", "semicolon-separated re,im pairs"},
          {"grid-resolution", "grid units M per unit weight"},
          {"max-steps", "step cap (0: 100 M^2)"},
          {"stride", "write every k-th step of the trajectory"}}},
        {Subcommand::greens,
         {{"x0", "start point in (0, 1)"},
          {"laplace", "Laplace variable s > 0"},
          {"diffusion", "diffusion constant D > 0"},
          {"x-grid", "start:stop:step over [0, 1]"}}},
        {Subcommand::bell,
         {{"model", "quantum | bell-sign | image-analytic | image-event"},
          {"theta-grid", "start:stop:step in degrees"},
          {"samples", "samples per angle (sampling models)"},
          {"convention", "paper (+cos) or quantum (-cos) sign for the image model"}}},
        {Subcommand::chsh,
         {{"model", "quantum | bell-sign | image-analytic | image-event"},
          {"settings", "a,a',b,b' in degrees (coplanar)"},
          {"samples", "samples per correlation term"},
          {"convention", "paper or quantum sign for the image model"}}},
        {Subcommand::c2, {{"theta-grid", "start:stop:step in degrees"}}},
    };
    return flags;
}

const std::vector<std::pair<Subcommand, const char*>>& subcommand_names()
{
    static const std::vector<std::pair<Subcommand, const char*>> names = {
        {Subcommand::born, "born"},     {Subcommand::walk, "walk"}, {Subcommand::greens, "greens"},
        {Subcommand::bell, "bell"},     {Subcommand::chsh, "chsh"}, {Subcommand::c2, "c2"},
    };
    return names;
}

Subcommand parse_subcommand(const std::string& name)
{
    for (const auto& [sub, text] : subcommand_names()) {
        if (name == text) {
            return sub;
        }
    }
    usage("unknown subcommand '" + name + "'");
}

bool applies(Subcommand sub, const std::string& key)
{
    if (key == "subcommand") {
        return true;
    }
    const auto& common = common_flags();
    const auto& own = subcommand_flags().at(sub);
    const auto match = [&](const FlagSpec& f) { return key == f.key; };
    return std::any_of(common.begin(), common.end(), match) || std::any_of(own.begin(), own.end(), match);
}

template <class T>
T parse_number(const json& v, const std::string& key)
{
    const std::string flag = "--" + key;
    if constexpr (std::is_floating_point_v<T>) {
        if (v.is_number()) {
            return v.get<T>();
        }
    } else {
        if (v.is_number_integer()) {
            if constexpr (std::is_unsigned_v<T>) {
                if (v.is_number_unsigned() || v.get<std::int64_t>() >= 0) {
                    return v.get<T>();
                }
                usage("invalid value for " + flag + ": must be nonnegative");
            } else {
                return v.get<T>();
            }
        }
    }
    if (!v.is_string()) {
        usage("invalid value for " + flag + ": expected a number");
    }
    std::string text = v.get<std::string>();
    const auto first = text.find_first_not_of(" \t");
    text = first == std::string::npos ? "" : text.substr(first, text.find_last_not_of(" \t") - first + 1);
    T value{};
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (text.empty() || ec != std::errc{} || ptr != end) {
        usage("invalid value for " + flag + ": '" + text + "'");
    }
    return value;
}

std::string parse_string(const json& v, const std::string& key)
{
    if (!v.is_string()) {
        usage("invalid value for --" + key + ": expected a string");
    }
    return v.get<std::string>();
}

bool parse_bool(const json& v, const std::string& key)
{
    if (v.is_boolean()) {
        return v.get<bool>();
    }
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "true" || s == "1") {
            return true;
        }
        if (s == "false" || s == "0") {
            return false;
        }
    }
    usage("invalid value for --" + key + ": expected true or false");
}

void require(bool present, const std::string& key, Subcommand sub)
{
    if (!present) {
        usage("missing --" + key + " for " + to_string(sub));
    }
}

template <class T>
void require_positive(T value, const std::string& key)
{
    if (!(value > 0)) {
        usage("invalid value for --" + key + ": must be positive");
    }
}

void validate(const RunConfig& c)
{
    require_positive(c.trials, "trials");
    require_positive(c.samples, "samples");
    require_positive(c.stride, "stride");
    if (c.grid_resolution < 2) {
        usage("invalid value for --grid-resolution: must be >= 2");
    }
    if (c.max_steps < 0) {
        usage("invalid value for --max-steps: must be >= 0");
    }
    if (c.threads < 0) {
        usage("invalid value for --threads: must be >= 0");
    }

    switch (c.subcommand) {
    case Subcommand::born:
    case Subcommand::walk:
        require(!c.amplitudes.empty(), "amplitudes", c.subcommand);
        try {
            (void)normalize(parse_amplitudes(c.amplitudes));
        } catch (const Error& e) {
            usage("invalid value for --amplitudes: " + std::string(e.what()));
        }
        break;
    case Subcommand::greens:
        require(c.x0.has_value(), "x0", c.subcommand);
        if (!(*c.x0 > 0.0 && *c.x0 < 1.0)) {
            usage("invalid value for --x0: must lie in (0, 1)");
        }
        require_positive(c.laplace, "laplace");
        require_positive(c.diffusion, "diffusion");
        for (double x : parse_grid(c.x_grid, "x-grid")) {
            if (x < -1e-12 || x > 1.0 + 1e-12) {
                usage("invalid value for --x-grid: points must lie in [0, 1]");
            }
        }
        break;
    case Subcommand::bell:
    case Subcommand::chsh:
        require(!c.model.empty(), "model", c.subcommand);
        try {
            (void)parse_model(c.model);
        } catch (const Error&) {
            usage("invalid value for --model: '" + c.model + "'");
        }
        try {
            (void)parse_convention(c.convention);
        } catch (const Error&) {
            usage("invalid value for --convention: '" + c.convention + "'");
        }
        if (c.subcommand == Subcommand::bell) {
            require(!c.theta_grid.empty(), "theta-grid", c.subcommand);
            (void)parse_grid(c.theta_grid, "theta-grid");
        } else {
            require(!c.settings.empty(), "settings", c.subcommand);
            if (parse_list(c.settings, "settings").size() != 4) {
                usage("invalid value for --settings: expected four angles a,a',b,b'");
            }
        }
        break;
    case Subcommand::c2:
        require(!c.theta_grid.empty(), "theta-grid", c.subcommand);
        for (double deg : parse_grid(c.theta_grid, "theta-grid")) {
            if (deg < -1e-9 || deg > 180.0 + 1e-9) {
                usage("invalid value for --theta-grid: angles must lie in [0, 180]");
            }
        }
        break;
    }
}

json load_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        usage("cannot read --config file '" + path + "'");
    }
    json file;
    try {
        in >> file;
    } catch (const json::exception& e) {
        usage("--config file '" + path + "' is not valid JSON: " + e.what());
    }
    if (file.is_object() && file.contains("config") && file.at("config").is_object()) {
        file = file.at("config");  // a run manifest
    }
    if (!file.is_object()) {
        usage("--config file must hold a JSON object");
    }
    return file;
}

// With no subcommand on the command line, takes it from the --config file so
// that `--config run.json --trials 10` still accepts subcommand flags.
std::optional<std::vector<std::string>> with_subcommand_from_file(int argc, const char* const* argv)
{
    std::optional<std::string> path;
    for (int i = 1; i < argc; ++i) {
        const std::string_view arg = argv[i];
        for (const auto& [sub, name] : subcommand_names()) {
            if (arg == name) {
                return std::nullopt;
            }
        }
        if (arg == "--config" && i + 1 < argc) {
            path = argv[i + 1];
        } else if (arg.starts_with("--config=")) {
            path = std::string(arg.substr(9));
        }
    }
    if (!path) {
        return std::nullopt;
    }
    const json file = load_config_file(*path);
    if (!file.contains("subcommand") || !file.at("subcommand").is_string()) {
        return std::nullopt;
    }
    std::vector<std::string> args(argv, argv + argc);
    args.insert(args.begin() + 1, file.at("subcommand").get<std::string>());
    return args;
}

}  // namespace

std::string to_string(Subcommand s)
{
    for (const auto& [sub, text] : subcommand_names()) {
        if (sub == s) {
            return text;
        }
    }
    return "unknown";
}

std::vector<double> parse_list(const std::string& text, const std::string& flag)
{
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t stop = std::min(text.find(',', start), text.size());
        out.push_back(parse_number<double>(json(text.substr(start, stop - start)), flag));
        start = stop + 1;
    }
    for (double v : out) {
        if (!std::isfinite(v)) {
            usage("invalid value for --" + flag + ": non-finite number");
        }
    }
    return out;
}

std::vector<double> parse_grid(const std::string& text, const std::string& flag)
{
    std::vector<double> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t stop = std::min(text.find(':', start), text.size());
        parts.push_back(parse_number<double>(json(text.substr(start, stop - start)), flag));
        start = stop + 1;
    }
    if (parts.size() == 1) {
        return parts;
    }
    if (parts.size() != 3) {
        usage("invalid value for --" + flag + ": expected start:stop:step");
    }
    const double first = parts[0];
    const double last = parts[1];
    const double step = parts[2];
    if (!(step > 0.0) || !(last >= first) || !std::isfinite(first) || !std::isfinite(last)) {
        usage("invalid value for --" + flag + ": need step > 0 and stop >= start");
    }
    const auto count = static_cast<std::int64_t>(std::floor((last - first) / step + 1e-9)) + 1;
    if (count > 10'000'000) {
        usage("invalid value for --" + flag + ": too many grid points");
    }
    std::vector<double> grid;
    for (std::int64_t i = 0; i < count; ++i) {
        grid.push_back(first + static_cast<double>(i) * step);
    }
    return grid;
}

RunConfig config_from_json(const json& values)
{
    if (!values.is_object()) {
        usage("configuration must be a JSON object");
    }
    RunConfig c;
    if (!values.contains("subcommand")) {
        usage("missing subcommand");
    }
    c.subcommand = parse_subcommand(parse_string(values.at("subcommand"), "subcommand"));

    for (const auto& [key, v] : values.items()) {
        if (!applies(c.subcommand, key)) {
            usage("unknown option --" + key + " for " + to_string(c.subcommand));
        }
        if (v.is_null()) {
            continue;
        }
        if (key == "seed") {
            c.seed = parse_number<std::uint64_t>(v, key);
        } else if (key == "entropy") {
            c.entropy = parse_bool(v, key);
        } else if (key == "trials") {
            c.trials = parse_number<std::int64_t>(v, key);
        } else if (key == "samples") {
            c.samples = parse_number<std::int64_t>(v, key);
        } else if (key == "grid-resolution") {
            c.grid_resolution = parse_number<std::int64_t>(v, key);
        } else if (key == "max-steps") {
            c.max_steps = parse_number<std::int64_t>(v, key);
        } else if (key == "stride") {
            c.stride = parse_number<std::int64_t>(v, key);
        } else if (key == "amplitudes") {
            c.amplitudes = parse_string(v, key);
        } else if (key == "settings") {
            c.settings = parse_string(v, key);
        } else if (key == "theta-grid") {
            c.theta_grid = parse_string(v, key);
        } else if (key == "model") {
            c.model = parse_string(v, key);
        } else if (key == "convention") {
            c.convention = parse_string(v, key);
        } else if (key == "x0") {
            c.x0 = parse_number<double>(v, key);
        } else if (key == "laplace") {
            c.laplace = parse_number<double>(v, key);
        } else if (key == "diffusion") {
            c.diffusion = parse_number<double>(v, key);
        } else if (key == "x-grid") {
            c.x_grid = parse_string(v, key);
        } else if (key == "output") {
            c.output = parse_string(v, key);
        } else if (key == "threads") {
            c.threads = parse_number<int>(v, key);
        }
    }

    if (values.contains("format") && !values.at("format").is_null()) {
        const auto f = parse_string(values.at("format"), "format");
        if (f == "csv") {
            c.format = Format::csv;
        } else if (f == "json") {
            c.format = Format::json;
        } else {
            usage("invalid value for --format: '" + f + "'");
        }
    } else {
        c.format = c.subcommand == Subcommand::chsh ? Format::json : Format::csv;
    }
    validate(c);
    return c;
}

nlohmann::ordered_json RunConfig::to_json() const
{
    nlohmann::ordered_json all;
    all["subcommand"] = cli::to_string(subcommand);
    all["seed"] = seed;
    all["entropy"] = entropy;
    all["trials"] = trials;
    all["samples"] = samples;
    all["grid-resolution"] = grid_resolution;
    all["max-steps"] = max_steps;
    all["stride"] = stride;
    all["amplitudes"] = amplitudes;
    all["settings"] = settings;
    all["theta-grid"] = theta_grid;
    all["model"] = model;
    all["convention"] = convention;
    all["x0"] = x0 ? nlohmann::ordered_json(*x0) : nlohmann::ordered_json(nullptr);
    all["laplace"] = laplace;
    all["diffusion"] = diffusion;
    all["x-grid"] = x_grid;
    all["output"] = output;
    all["format"] = format == Format::csv ? "csv" : "json";
    all["threads"] = threads;

    nlohmann::ordered_json out;
    for (const auto& [key, value] : all.items()) {
        if (applies(subcommand, key)) {
            out[key] = value;
        }
    }
    return out;
}

RunConfig parse_config(int argc, const char* const* argv)
{
    if (const auto args = with_subcommand_from_file(argc, argv)) {
        std::vector<const char*> ptrs;
        for (const auto& a : *args) {
            ptrs.push_back(a.c_str());
        }
        return parse_config(static_cast<int>(ptrs.size()), ptrs.data());
    }
    CLI::App app{"First-passage walk and Bell-correlation simulation toolkit", "collapse_walk"};
    app.fallthrough();
    app.require_subcommand(0, 1);
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file or run manifest; flags override it");

    std::map<std::string, std::string> raw;
    std::map<std::string, bool> switches;
    struct Bound {
        CLI::Option* option;
        std::string key;
        Subcommand owner;
    };
    std::vector<Bound> options;
    std::map<Subcommand, CLI::App*> subs;
    for (const auto& [sub, name] : subcommand_names()) {
        CLI::App* s = app.add_subcommand(name, "");
        subs[sub] = s;
        auto add = [&](const FlagSpec& f) {
            std::string names = "--" + std::string(f.key);
            if (names == "--grid-resolution") {
                names = "-M," + names;
            } else if (names == "--output") {
                names = "-o," + names;
            }
            CLI::Option* opt = f.is_switch ? s->add_flag(names, switches[f.key], f.help)
                                           : s->add_option(names, raw[f.key], f.help);
            options.push_back({opt, f.key, sub});
        };
        for (const auto& f : subcommand_flags().at(sub)) {
            add(f);
        }
        for (const auto& f : common_flags()) {
            add(f);
        }
    }
    subs[Subcommand::born]->description("Born-rule statistics from repeated first-passage walks");
    subs[Subcommand::walk]->description("One walk trajectory as CSV rows (step, w0..wN-1)");
    subs[Subcommand::greens]->description("Laplace-domain Green's function over an x grid");
    subs[Subcommand::bell]->description("Correlation curve C(theta) for one model");
    subs[Subcommand::chsh]->description("CHSH combination for four coplanar settings");
    subs[Subcommand::c2]->description("Normalization constant c2 over a theta grid");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        throw HelpRequested{app.help()};
    } catch (const CLI::ParseError& e) {
        usage(e.what());
    }

    json merged = config_path.empty() ? json::object() : load_config_file(config_path);

    std::optional<Subcommand> chosen;
    for (const auto& [sub, s] : subs) {
        if (s->parsed()) {
            chosen = sub;
        }
    }
    if (chosen) {
        if (merged.contains("subcommand") && merged["subcommand"] != to_string(*chosen)) {
            usage("--config is for '" + merged["subcommand"].get<std::string>() + "', not '" +
                  to_string(*chosen) + "'");
        }
        merged["subcommand"] = to_string(*chosen);
        for (const auto& [opt, key, owner] : options) {
            if (owner != *chosen || opt->count() == 0) {
                continue;
            }
            if (switches.count(key) != 0) {
                merged[key] = switches[key];
            } else {
                merged[key] = raw[key];
            }
        }
    } else if (!merged.contains("subcommand")) {
        usage("missing subcommand (born, walk, greens, bell, chsh, c2)");
    }
    return config_from_json(merged);
}

}  // namespace collapse::cli
