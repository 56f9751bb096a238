#pragma once

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace qpwalk::cli {

using Json = nlohmann::ordered_json;

enum class OutputFormat { json, csv };

/// Invalid configuration: unknown command or key, wrong type. Exit status 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ParamSpec {
    std::string key;
    Json default_value;
    std::string help;
};

struct CommandSpec {
    std::string name;
    std::string help;
    std::vector<ParamSpec> params;
};

/// Every subcommand with its parameter schema. Flags are the keys with
/// underscores replaced by dashes.
const std::vector<CommandSpec>& command_table();
const CommandSpec& find_command(const std::string& name);

inline constexpr std::uint64_t kDefaultSeed = 12345;
inline constexpr const char* kSeedEnvironmentVariable = "QPWALK_SEED";

struct RunConfig {
    std::string command;
    /// Supplied parameters; missing keys take schema defaults.
    Json parameters = Json::object();
    std::uint64_t seed = kDefaultSeed;
    OutputFormat format = OutputFormat::json;
    /// Empty or "-" writes to standard output.
    std::string output_path;
    bool timestamps = false;
};

/// Merges schema defaults into config.parameters. Throws ConfigError on
/// unknown keys or values whose JSON type differs from the default's.
Json resolve_parameters(const RunConfig& config);

/// Tabular view of a result for CSV output.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<Json>> rows;
};

struct RunResult {
    Json report;
    CsvTable table;
    bool ok = true;
};

/// Executes the command. Throws ConfigError or the library's DomainError /
/// NumericalError.
RunResult execute(const RunConfig& config);

/// JSON text (single object, trailing newline) or CSV text.
std::string render(const RunResult& result, OutputFormat format);

/// Writes rendered output to the path, or `out` when the path is empty.
void emit(const RunResult& result, OutputFormat format, const std::string& path, std::ostream& out);

/// CSV cell formatting: integers verbatim, reals with 17 significant digits.
std::string format_csv_cell(const Json& value);

/// execute + emit with the exit-status contract: 0 ok, 1 numerical failure,
/// failed cross-check or unwritable output, 2 invalid configuration.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Command-line entry point.
int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace qpwalk::cli
