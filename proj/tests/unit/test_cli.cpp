#include "qpwalk/cli.hpp"

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace qpwalk::cli;

namespace {

struct Invocation {
    int status;
    std::string out;
    std::string err;
};

Invocation invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "qpwalk");
    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    const int status = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
    return {status, out.str(), err.str()};
}

Json invoke_json(const std::vector<std::string>& args) {
    const auto run = invoke(args);
    REQUIRE(run.status == 0);
    return Json::parse(run.out);
}

std::filesystem::path scratch(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("qpwalk_test_cli_" + name);
}

} // namespace

TEST_CASE("walk --method all reports every pmf and the pairwise deviation") {
    const auto report = invoke_json({"walk", "--n", "4", "--p", "0.5", "--method", "all"});
    CHECK(report["command"] == "walk");
    CHECK(report["config"]["parameters"]["n"] == 4);
    CHECK(report["config"]["seed"] == kDefaultSeed);
    const auto& results = report["results"];
    for (const char* method : {"binomial", "char_fn", "dp", "mc"}) {
        INFO(method);
        REQUIRE(results.contains(method));
        CHECK(results[method]["pmf"].size() == 5);
    }
    REQUIRE(results.contains("max_pairwise_deviation"));
    const auto& mc = results["mc"];
    CHECK(mc["samples"] == 100000);
    CHECK(mc["seed"] == kDefaultSeed);
    for (const auto& row : mc["pmf"]) {
        CHECK(row.contains("std_error"));
    }
    CHECK(report["ok"] == true);
}

TEST_CASE("btz reports the closure at r+ = 1, l = 1, G = 1/8") {
    const auto report = invoke_json({"btz", "--r-plus", "1", "--l-ads", "1", "--g", "0.125"});
    CHECK(report["results"]["S"].get<double>() == doctest::Approx(12.56637).epsilon(1e-6));
    REQUIRE(!report["checks"].empty());
    for (const auto& [name, passed] : report["checks"].items()) {
        INFO(name);
        CHECK(passed == true);
    }
}

TEST_CASE("check runs the internal suite and exits 0") {
    const auto report = invoke_json({"check"});
    CHECK(report["ok"] == true);
    CHECK(report["checks"].size() >= 5);
}

TEST_CASE("binomial pmf as CSV") {
    const auto run = invoke({"walk", "--n", "2", "--p", "0.5", "--method", "binomial", "--format", "csv"});
    CHECK(run.status == 0);
    CHECK(run.out == "site,probability\n-2,0.25\n0,0.5\n2,0.25\n");
}

TEST_CASE("empty table renders as a header-only CSV") {
    RunResult result;
    result.table.header = {"site", "probability"};
    CHECK(render(result, OutputFormat::csv) == "site,probability\n");
}

TEST_CASE("CSV reals carry 17 significant digits") {
    CHECK(format_csv_cell(Json(0.1)) == "0.10000000000000001");
    CHECK(format_csv_cell(Json(-3)) == "-3");
    const double third = 1.0 / 3.0;
    CHECK(std::stod(format_csv_cell(Json(third))) == third);
}

TEST_CASE("invalid configuration exits 2") {
    CHECK(invoke({"walk", "--bogus", "1"}).status == 2);
    CHECK(invoke({"walk", "--n", "four"}).status == 2);
    CHECK(invoke({"chain-thermo"}).status == 2);
    CHECK(invoke({"no-such-command"}).status == 2);
    CHECK(invoke({"walk", "--n", "-3"}).status == 2);

    RunConfig config;
    config.command = "walk";
    config.parameters = Json{{"steps", 3}};
    CHECK_THROWS_AS(resolve_parameters(config), ConfigError);
    config.parameters = Json{{"n", "3"}};
    CHECK_THROWS_AS(resolve_parameters(config), ConfigError);
}

TEST_CASE("unwritable output path exits 1") {
    const auto run = invoke({"fib", "--n-max", "5", "--output", "/nonexistent-qpwalk-dir/out.json"});
    CHECK(run.status == 1);
    CHECK(!run.err.empty());
}

TEST_CASE("repeated runs are byte-identical") {
    const std::vector<std::vector<std::string>> runs{
        {"walk", "--n", "6", "--schedule", "fibonacci"},
        {"pathint", "--segments", "4", "--samples", "2000"},
        {"walk2d", "--n", "3"},
        {"chain-thermo", "--n-max", "8"},
        {"kernel", "--partition", "fibonacci"},
    };
    for (const auto& args : runs) {
        INFO(args.front());
        for (const char* format : {"json", "csv"}) {
            auto with_format = args;
            with_format.insert(with_format.end(), {"--format", format});
            const auto first = invoke(with_format);
            const auto second = invoke(with_format);
            CHECK(first.status == 0);
            CHECK(first.out == second.out);
        }
    }
}

TEST_CASE("timestamps appear only on request") {
    const auto plain = invoke_json({"fib", "--n-max", "5"});
    CHECK(!plain.contains("timestamp"));
    CHECK(!plain.contains("wall_time_seconds"));
    const auto stamped = invoke_json({"fib", "--n-max", "5", "--timestamps"});
    CHECK(stamped.contains("timestamp"));
    CHECK(stamped.contains("wall_time_seconds"));
}

TEST_CASE("seed: environment default and explicit flag") {
    ::setenv(kSeedEnvironmentVariable, "99", 1);
    CHECK(invoke_json({"fib"})["config"]["seed"] == 99);
    CHECK(invoke_json({"fib", "--seed", "7"})["config"]["seed"] == 7);
    ::unsetenv(kSeedEnvironmentVariable);
    CHECK(invoke_json({"fib"})["config"]["seed"] == kDefaultSeed);
}

TEST_CASE("different seeds change stochastic results") {
    const auto a = invoke_json({"walk", "--n", "6", "--method", "mc", "--seed", "1"});
    const auto b = invoke_json({"walk", "--n", "6", "--method", "mc", "--seed", "2"});
    CHECK(a["results"] != b["results"]);
}

TEST_CASE("emitted reports round-trip through check --report") {
    const std::vector<std::vector<std::string>> runs{
        {"walk", "--n", "5", "--method", "all", "--samples", "5000"},
        {"btz", "--r-plus", "2.5"},
        {"thermo"},
        {"chain-thermo", "--n-max", "6", "--dimension", "2"},
    };
    int index = 0;
    for (auto args : runs) {
        INFO(args.front());
        const auto path = scratch("report" + std::to_string(index++) + ".json");
        args.insert(args.end(), {"--output", path.string()});
        REQUIRE(invoke(args).status == 0);
        const auto verdict = invoke({"check", "--report", path.string()});
        CHECK(verdict.status == 0);
        CHECK(Json::parse(verdict.out)["ok"] == true);
        std::filesystem::remove(path);
    }
}

TEST_CASE("check --report rejects a tampered report") {
    const auto path = scratch("tampered.json");
    REQUIRE(invoke({"walk", "--n", "4", "--method", "dp", "--output", path.string()}).status == 0);
    Json report;
    {
        std::ifstream in(path);
        report = Json::parse(in);
    }
    report["results"]["dp"]["pmf"][0]["probability"] = 0.5;
    {
        std::ofstream out(path);
        out << report.dump(2) << '\n';
    }
    CHECK(invoke({"check", "--report", path.string()}).status == 1);
    std::filesystem::remove(path);
}

TEST_CASE("every command has --help") {
    for (const auto& command : command_table()) {
        INFO(command.name);
        const auto run = invoke({command.name, "--help"});
        CHECK(run.status == 0);
        CHECK(run.out.find("Usage") != std::string::npos);
    }
}
