#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace collapse::cli {

enum class Subcommand { born, walk, greens, bell, chsh, c2 };
enum class Format { csv, json };

/// Everything a run needs. Serialises to the same keys the CLI flags use, so
/// a manifest's "config" object can be fed back through --config.
struct RunConfig {
    Subcommand subcommand = Subcommand::born;
    std::uint64_t seed = 0;
    bool entropy = false;
    std::int64_t trials = 100'000;
    std::int64_t samples = 1'000'000;
    std::int64_t grid_resolution = 1000;
    std::int64_t max_steps = 0;
    std::int64_t stride = 1;
    std::string amplitudes;
    std::string settings;
    std::string theta_grid;
    std::string model;
    std::string convention = "paper";
    std::optional<double> x0;
    double laplace = 1.0;
    double diffusion = 1.0;
    std::string x_grid = "0:1:0.05";
    std::string output;
    Format format = Format::csv;
    int threads = 0;

    nlohmann::ordered_json to_json() const;
};

/// Thrown by parse_config for --help; carries the help text.
struct HelpRequested {
    std::string text;
};

/// Parses argv (argv[0] is the program name). Values come from, in rising
/// precedence: built-in defaults, the --config JSON file, explicit flags.
/// Throws Error(UsageError) naming the offending flag.
RunConfig parse_config(int argc, const char* const* argv);

/// Builds a config from a JSON object of flag-named keys (strings or numbers).
RunConfig config_from_json(const nlohmann::json& values);

/// "start:stop:step", stop inclusive.
std::vector<double> parse_grid(const std::string& text, const std::string& flag);

/// Comma-separated list of numbers.
std::vector<double> parse_list(const std::string& text, const std::string& flag);

std::string to_string(Subcommand s);

}  // namespace collapse::cli
