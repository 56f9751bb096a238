#include "qpwalk/cli.hpp"

#include "qpwalk/btz.hpp"
#include "qpwalk/error.hpp"
#include "qpwalk/heat.hpp"
#include "qpwalk/numerics.hpp"
#include "qpwalk/quasiperiodic.hpp"
#include "qpwalk/thermo.hpp"
#include "qpwalk/walk.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <numbers>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

namespace qpwalk::cli {

namespace {

using quasiperiodic::FibonacciLengths;
using quasiperiodic::TimePartition;

const Json kRequired = nullptr;

} // namespace

const std::vector<CommandSpec>& command_table() {
    static const std::vector<CommandSpec> table = {
        {"fib", "Fibonacci step lengths l_0 .. l_nmax", {{"n_max", 20, "largest index (<= 92)"}}},
        {"word", "Fibonacci substitution word A -> AB, B -> A", {{"generation", 7, "word generation (>= 1)"}}},
        {"walk",
         "1D lattice walk: closed-form binomial, characteristic-function, exact DP and Monte Carlo pmfs",
         {{"n", 4, "number of steps"},
          {"p", 0.5, "probability of a step to the right"},
          {"schedule", "constant", "step lengths: constant | fibonacci (step k has length l_k)"},
          {"length", 1, "step length for the constant schedule"},
          {"method", "all", "binomial | char_fn | dp | mc | all"},
          {"samples", 100000, "Monte Carlo sample count"}}},
        {"walk2d",
         "2D four-point walk: exact DP law and audit of the two-dimensional lattice formula",
         {{"n", 2, "number of steps"},
          {"schedule_x", "constant", "x step lengths: constant | fibonacci"},
          {"schedule_y", "constant", "y step lengths: constant | fibonacci"},
          {"length_x", 1, "x step length for the constant schedule"},
          {"length_y", 1, "y step length for the constant schedule"}}},
        {"kernel",
         "Heat kernel closed form vs Chapman-Kolmogorov composition by nested quadrature (d = 1)",
         {{"t", 1.0, "total time"},
          {"x", 0.0, "start point"},
          {"y", 1.0, "end point"},
          {"partition", "uniform", "uniform | fibonacci"},
          {"segments", 2, "number of segments (<= 4)"},
          {"nodes", 64, "Gauss-Legendre nodes per axis"}}},
        {"pathint",
         "Random-walk representation of K_t or H_t^N over a (quasiperiodic) partition",
         {{"t", 1.0, "total time"},
          {"x", 0.0, "start point (first coordinate)"},
          {"y", 1.0, "end point (first coordinate)"},
          {"dimension", 1, "spatial dimension d"},
          {"partition", "uniform", "uniform | fibonacci"},
          {"segments", 4, "number of segments N"},
          {"samples", 100000, "Monte Carlo samples"},
          {"action", "kinetic", "kinetic | length"},
          {"beta_tilde", 1.0, "length-action coefficient (ASCII for beta with tilde)"},
          {"method", "monte_carlo", "monte_carlo | quadrature"}}},
        {"qp-brownian",
         "Brownian transition density evaluated at the quasiperiodic displacement x(tau)",
         {{"alpha", std::numbers::phi, "frequency ratio alpha of x(tau) = cos 2pi tau + cos 2pi alpha tau"},
          {"diffusion", 0.5, "diffusion constant D"},
          {"tau", 0.5, "time tau > 0"}}},
        {"thermo",
         "Length-action partition function, energy and entropy of a piecewise path",
         {{"nodes", "0,1", "comma-separated node positions x_0, ..., x_N"},
          {"t", 1.0, "total time"},
          {"partition", "uniform", "uniform | fibonacci"},
          {"beta_tilde", 1.0, "generalized inverse temperature (ASCII for beta with tilde)"},
          {"entropy_form", "paper", "paper (S = E + ln Z) | standard (S = beta_tilde E + ln Z)"}}},
        {"chain-thermo",
         "Fibonacci-chain partition function and entropy (explicit truncation n_max required)",
         {{"l", 0, "lattice multiplier l"},
          {"m", 0, "second lattice multiplier m (2D only)"},
          {"n_max", kRequired, "series truncation (required)"},
          {"dimension", 1, "1 or 2"},
          {"expectation", "n_max", "n_max | weighted"}}},
        {"btz",
         "BTZ black hole action, partition function, energy and entropy with identity checks",
         {{"r_plus", 1.0, "horizon radius r+"}, {"l_ads", 1.0, "AdS radius"}, {"g", 0.125, "Newton constant G"}}},
        {"check",
         "Run the oracle cross-check suite, or re-validate an emitted JSON report",
         {{"report", "", "path of a JSON report to re-validate (empty: run the suite)"}}},
    };
    return table;
}

const CommandSpec& find_command(const std::string& name) {
    for (const auto& spec : command_table()) {
        if (spec.name == name) {
            return spec;
        }
    }
    throw ConfigError("unknown command '" + name + "'");
}

Json resolve_parameters(const RunConfig& config) {
    const CommandSpec& spec = find_command(config.command);
    if (!config.parameters.is_object()) {
        throw ConfigError("parameters must be a JSON object");
    }
    for (const auto& [key, value] : config.parameters.items()) {
        const bool known = std::any_of(spec.params.begin(), spec.params.end(),
                                       [&](const ParamSpec& p) { return p.key == key; });
        if (!known) {
            throw ConfigError("unknown parameter '" + key + "' for command '" + spec.name + "'");
        }
    }
    Json resolved = Json::object();
    for (const auto& param : spec.params) {
        const auto it = config.parameters.find(param.key);
        if (it == config.parameters.end() || it->is_null()) {
            if (param.default_value.is_null()) {
                throw ConfigError("parameter '" + param.key + "' is required for command '" + spec.name + "'");
            }
            resolved[param.key] = param.default_value;
            continue;
        }
        const Json& value = *it;
        const Json& reference = param.default_value;
        bool ok = false;
        if (reference.is_null() || reference.is_number_integer()) {
            ok = value.is_number_integer();
        } else if (reference.is_number_float()) {
            ok = value.is_number();
        } else if (reference.is_string()) {
            ok = value.is_string();
        } else if (reference.is_boolean()) {
            ok = value.is_boolean();
        }
        if (!ok) {
            throw ConfigError("parameter '" + param.key + "' has the wrong type");
        }
        resolved[param.key] = reference.is_number_float() ? Json(value.get<double>()) : value;
    }
    return resolved;
}

namespace {

double as_double(const Json& params, const char* key) { return params.at(key).get<double>(); }
std::int64_t as_int(const Json& params, const char* key) { return params.at(key).get<std::int64_t>(); }
std::string as_string(const Json& params, const char* key) { return params.at(key).get<std::string>(); }

int as_small_int(const Json& params, const char* key, std::int64_t lo, std::int64_t hi) {
    const std::int64_t v = as_int(params, key);
    if (v < lo || v > hi) {
        throw ConfigError(std::string("parameter '") + key + "' must lie in [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
    }
    return static_cast<int>(v);
}

void require_choice(const std::string& value, std::initializer_list<const char*> choices, const char* key) {
    for (const char* c : choices) {
        if (value == c) {
            return;
        }
    }
    std::string msg = std::string("parameter '") + key + "' must be one of:";
    for (const char* c : choices) {
        msg += std::string(" ") + c;
    }
    throw ConfigError(msg);
}

Json pmf_to_json(const walk::Pmf1D& pmf) {
    Json rows = Json::array();
    for (const auto& [site, mass] : pmf.support) {
        rows.push_back(Json{{"site", site}, {"probability", mass}});
    }
    return rows;
}

walk::LengthSchedule make_schedule(const std::string& kind, std::int64_t length, int n) {
    if (kind == "constant") {
        if (length < 1) {
            throw ConfigError("step length must be >= 1");
        }
        return walk::LengthSchedule::constant(length);
    }
    require_choice(kind, {"constant", "fibonacci"}, "schedule");
    return walk::LengthSchedule::fibonacci(FibonacciLengths(n));
}

TimePartition make_partition(const std::string& kind, double t, int segments) {
    require_choice(kind, {"uniform", "fibonacci"}, "partition");
    if (kind == "uniform") {
        return quasiperiodic::uniform_partition(t, segments);
    }
    int generation = 1;
    while (quasiperiodic::FibonacciLengths(generation + 1)[generation + 1] < segments) {
        ++generation;
    }
    return quasiperiodic::quasiperiodic_partition(t, segments, quasiperiodic::fibonacci_word(generation));
}

Json partition_to_json(const TimePartition& partition) {
    return Json{{"kind", quasiperiodic::to_string(partition.kind())},
                {"times", std::vector<double>(partition.times().begin(), partition.times().end())}};
}

CsvTable scalar_table(const Json& results) {
    CsvTable table{{"quantity", "value"}, {}};
    for (const auto& [key, value] : results.items()) {
        if (value.is_primitive()) {
            table.rows.push_back({key, value});
        }
    }
    return table;
}

struct CommandOutput {
    Json results = Json::object();
    Json checks = Json::object();
    CsvTable table;
};

using CommandFn = std::function<CommandOutput(const Json& params, std::uint64_t seed)>;

CommandOutput cmd_fib(const Json& params, std::uint64_t) {
    const int n_max = as_small_int(params, "n_max", 0, quasiperiodic::kMaxFibonacciIndex);
    const auto lengths = quasiperiodic::fibonacci_lengths(n_max);
    CommandOutput out;
    out.results["lengths"] = std::vector<std::int64_t>(lengths.values().begin(), lengths.values().end());
    bool recurrence = true;
    for (int n = 2; n <= n_max; ++n) {
        recurrence = recurrence && lengths[n] == lengths[n - 1] + lengths[n - 2];
    }
    out.checks["recurrence"] = recurrence;
    out.table.header = {"n", "l_n"};
    for (int n = 0; n <= n_max; ++n) {
        out.table.rows.push_back({n, lengths[n]});
    }
    return out;
}

CommandOutput cmd_word(const Json& params, std::uint64_t) {
    const int generation = as_small_int(params, "generation", 1, 40);
    const auto word = quasiperiodic::fibonacci_word(generation);
    const auto count_a = std::count(word.symbols.begin(), word.symbols.end(), 'A');
    const auto count_b = static_cast<std::int64_t>(word.size()) - count_a;
    const std::int64_t expected = FibonacciLengths(generation + 1)[generation + 1];
    CommandOutput out;
    out.results["generation"] = generation;
    out.results["length"] = word.size();
    out.results["count_a"] = count_a;
    out.results["count_b"] = count_b;
    out.results["ratio_a_to_b"] = count_b > 0 ? Json(static_cast<double>(count_a) / count_b) : Json(nullptr);
    out.results["word"] = word.size() <= 4096 ? Json(word.symbols) : Json(nullptr);
    out.checks["length_is_fibonacci"] = static_cast<std::int64_t>(word.size()) == expected;
    out.table = scalar_table(out.results);
    return out;
}

CommandOutput cmd_walk(const Json& params, std::uint64_t seed) {
    const int n = as_small_int(params, "n", 1, 1000);
    const double p = as_double(params, "p");
    const std::string schedule_kind = as_string(params, "schedule");
    const std::int64_t length = as_int(params, "length");
    const std::string method = as_string(params, "method");
    const std::int64_t samples = as_int(params, "samples");
    require_choice(method, {"binomial", "char_fn", "dp", "mc", "all"}, "method");
    if (schedule_kind == "fibonacci" && n > quasiperiodic::kMaxFibonacciIndex) {
        throw ConfigError("fibonacci schedule supports n <= 92");
    }
    const auto schedule = make_schedule(schedule_kind, length, n);
    const walk::StepDistribution spec{p, schedule};
    spec.validate();

    const bool all = method == "all";
    const bool constant = schedule.is_constant();
    std::map<std::string, walk::Pmf1D> pmfs;
    CommandOutput out;
    Json skipped = Json::object();

    if (all || method == "binomial") {
        if (constant) {
            walk::Pmf1D scaled;
            scaled.n_steps = n;
            for (const auto& [m, mass] : walk::binomial_pmf(n, p).support) {
                scaled.support[m * length] = mass;
            }
            pmfs["binomial"] = scaled;
        } else {
            skipped["binomial"] = "requires a constant step length";
        }
    }
    if (all || method == "char_fn") {
        if (constant && p == 0.5) {
            walk::Pmf1D cf;
            cf.n_steps = n;
            for (int l = -n; l <= n; l += 2) {
                cf.support[l * length] = walk::char_fn_prob(n, l);
            }
            pmfs["char_fn"] = cf;
        } else {
            skipped["char_fn"] = "requires p = 0.5 and a constant step length";
        }
    }
    if (all || method == "dp" || method == "mc") {
        pmfs["dp"] = walk::dp_pmf(spec, n);
    }
    if (all || method == "mc") {
        const auto stream = numerics::make_stream(seed, 0);
        const auto mc = walk::monte_carlo_pmf(spec, n, samples, stream);
        pmfs["mc"] = mc.pmf;
        const auto& exact = pmfs["dp"];
        double max_z = 0.0;
        Json rows = Json::array();
        for (const auto& [site, freq] : mc.pmf.support) {
            const double se = std::sqrt(freq * (1.0 - freq) / static_cast<double>(samples));
            rows.push_back(Json{{"site", site}, {"probability", freq}, {"std_error", se}, {"count", mc.counts.at(site)}});
        }
        for (const auto& [site, truth] : exact.support) {
            const double sigma = std::sqrt(truth * (1.0 - truth) / static_cast<double>(samples));
            const double dev = std::abs(mc.pmf.at(site) - truth);
            if (sigma > 0.0) {
                max_z = std::max(max_z, dev / sigma);
            }
        }
        out.results["mc"] = Json{{"samples", samples},
                                 {"seed", seed},
                                 {"stream_index", stream.stream_index},
                                 {"max_z_score_vs_dp", max_z},
                                 {"pmf", rows}};
        out.checks["mc_within_6_sigma_of_dp"] = max_z <= 6.0;
    }
    for (const auto& [name, pmf] : pmfs) {
        if (name == "mc") {
            continue;
        }
        if (name == "dp" && !(all || method == "dp")) {
            continue;
        }
        out.results[name] = Json{{"total_mass", pmf.total_mass()}, {"pmf", pmf_to_json(pmf)}};
    }
    Json deviations = Json::object();
    for (auto a = pmfs.begin(); a != pmfs.end(); ++a) {
        for (auto b = std::next(a); b != pmfs.end(); ++b) {
            deviations[a->first + "_vs_" + b->first] = walk::max_abs_difference(a->second, b->second);
        }
    }
    out.results["max_pairwise_deviation"] = deviations;
    if (!skipped.empty()) {
        out.results["skipped"] = skipped;
    }
    out.results["stream_master_seed"] = seed;

    for (const auto& [pair, dev] : deviations.items()) {
        if (pair.find("mc") == std::string::npos) {
            out.checks["exact_agreement_" + pair] = dev.get<double>() <= 1e-10;
        }
    }
    if (pmfs.count("dp")) {
        out.checks["dp_normalized"] = std::abs(pmfs["dp"].total_mass() - 1.0) <= 1e-12;
    }

    // CSV: one column per computed method, rows over the union of sites.
    std::set<walk::Site1D> sites;
    std::vector<std::string> columns;
    for (const auto& [name, pmf] : pmfs) {
        if (name == "dp" && !(all || method == "dp")) {
            continue;
        }
        columns.push_back(name);
        for (const auto& [site, mass] : pmf.support) {
            sites.insert(site);
        }
    }
    out.table.header = {"site"};
    if (columns.size() == 1) {
        out.table.header.push_back("probability");
    } else {
        out.table.header.insert(out.table.header.end(), columns.begin(), columns.end());
    }
    for (auto site : sites) {
        std::vector<Json> row{site};
        for (const auto& c : columns) {
            row.push_back(pmfs[c].at(site));
        }
        out.table.rows.push_back(std::move(row));
    }
    return out;
}

CommandOutput cmd_walk2d(const Json& params, std::uint64_t) {
    const int n = as_small_int(params, "n", 1, 200);
    const auto sx = make_schedule(as_string(params, "schedule_x"), as_int(params, "length_x"), n);
    const auto sy = make_schedule(as_string(params, "schedule_y"), as_int(params, "length_y"), n);
    const auto exact = walk::two_d_dp_pmf(n, sx, sy);
    const auto audit = walk::audit_two_d_formula(n, sx, sy);
    CommandOutput out;
    Json rows = Json::array();
    out.table.header = {"x", "y", "probability"};
    for (const auto& [site, mass] : exact.support) {
        rows.push_back(Json{{"x", site.first}, {"y", site.second}, {"probability", mass}});
        out.table.rows.push_back({site.first, site.second, mass});
    }
    out.results["exact"] = Json{{"total_mass", exact.total_mass()}, {"pmf", rows}};
    out.results["formula_audit"] = Json{{"window", "|l|, |m| <= n"},
                                        {"formula_window_mass", audit.paper_window_mass},
                                        {"exact_window_mass", audit.exact_window_mass},
                                        {"exact_total_mass", audit.exact_total_mass},
                                        {"max_abs_deviation", audit.max_abs_deviation},
                                        {"worst_l", audit.worst_l},
                                        {"worst_m", audit.worst_m}};
    out.checks["exact_normalized"] = std::abs(exact.total_mass() - 1.0) <= 1e-12;
    return out;
}

CommandOutput cmd_kernel(const Json& params, std::uint64_t) {
    const double t = as_double(params, "t");
    const double x = as_double(params, "x");
    const double y = as_double(params, "y");
    const int segments = as_small_int(params, "segments", 1, 4);
    const int nodes = as_small_int(params, "nodes", 2, 1024);
    const auto partition = make_partition(as_string(params, "partition"), t, segments);
    const double closed = heat::heat_kernel(t, x, y);
    const double composed = heat::compose_kernels(partition, x, y, heat::NestedQuadrature{nodes, 8.0});
    CommandOutput out;
    out.results["partition"] = partition_to_json(partition);
    out.results["closed_form"] = closed;
    out.results["composed"] = composed;
    out.results["abs_error"] = std::abs(composed - closed);
    out.checks["semigroup_within_1e-6"] = std::abs(composed - closed) <= 1e-6;
    out.table = scalar_table(out.results);
    return out;
}

CommandOutput cmd_pathint(const Json& params, std::uint64_t seed) {
    const double t = as_double(params, "t");
    const int d = as_small_int(params, "dimension", 1, 16);
    const int segments = as_small_int(params, "segments", 1, 4096);
    const std::int64_t samples = as_int(params, "samples");
    const std::string action_kind = as_string(params, "action");
    const std::string method = as_string(params, "method");
    require_choice(action_kind, {"kinetic", "length"}, "action");
    require_choice(method, {"monte_carlo", "quadrature"}, "method");
    std::vector<double> x(static_cast<std::size_t>(d), 0.0);
    std::vector<double> y(static_cast<std::size_t>(d), 0.0);
    x[0] = as_double(params, "x");
    y[0] = as_double(params, "y");
    const auto partition = make_partition(as_string(params, "partition"), t, segments);
    const double closed = heat::heat_kernel(heat::HeatKernelParams{d, t}, x, y);
    const auto stream = numerics::make_stream(seed, 1);

    CommandOutput out;
    out.results["partition"] = partition_to_json(partition);
    out.results["heat_kernel_closed_form"] = closed;
    if (action_kind == "kinetic" && method == "monte_carlo") {
        const auto est = heat::rw_representation_mc(x, y, partition, samples, stream);
        const double z = std::abs(est.mean - closed) / est.std_error;
        out.results["estimate"] = est.mean;
        out.results["std_error"] = est.std_error;
        out.results["samples"] = est.samples;
        out.results["seed"] = seed;
        out.results["stream_index"] = stream.stream_index;
        out.results["effective_sample_size"] = est.effective_sample_size;
        out.results["z_score"] = z;
        out.checks["closed_form_within_4_std_errors"] = z <= 4.0;
    } else {
        const auto action = action_kind == "kinetic" ? heat::ActionFunctional::kinetic()
                                                     : heat::ActionFunctional::length(as_double(params, "beta_tilde"));
        heat::KernelBudget budget;
        budget.samples = samples;
        budget.stream = stream;
        const auto est = heat::generalized_kernel(
            action, x, y, partition,
            method == "quadrature" ? heat::KernelMethod::quadrature : heat::KernelMethod::monte_carlo, budget);
        out.results["estimate"] = est.value;
        out.results["std_error"] = est.std_error;
        out.results["budget_doublings"] = est.doublings;
        if (method == "monte_carlo") {
            out.results["samples"] = samples << est.doublings;
            out.results["seed"] = seed;
        }
        if (action_kind == "kinetic") {
            const double tol = method == "quadrature" ? 1e-5 : 4.0 * est.std_error;
            out.checks["reproduces_heat_kernel"] = std::abs(est.value - closed) <= tol;
        }
    }
    out.table = scalar_table(out.results);
    return out;
}

CommandOutput cmd_qp_brownian(const Json& params, std::uint64_t) {
    const quasiperiodic::QuasiperiodicSignal signal{as_double(params, "alpha")};
    const heat::DiffusionParams diff{as_double(params, "diffusion")};
    const double tau = as_double(params, "tau");
    const double w = heat::qp_brownian_density(signal, diff, tau);
    const double bound = 1.0 / std::sqrt(4.0 * std::numbers::pi * diff.D * tau);
    CommandOutput out;
    out.results["x_tau"] = quasiperiodic::signal_eval(signal, tau);
    out.results["density"] = w;
    out.results["upper_bound"] = bound;
    out.checks["positive_and_bounded"] = w > 0.0 && w <= bound;
    out.table = scalar_table(out.results);
    return out;
}

std::vector<double> parse_nodes(const std::string& text) {
    std::vector<double> nodes;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            nodes.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw ConfigError("cannot parse path node '" + item + "'");
        }
    }
    if (nodes.size() < 2) {
        throw ConfigError("a path needs at least two nodes");
    }
    return nodes;
}

Json thermo_to_json(const thermo::ThermoReport& r) {
    return Json{{"Z", r.Z},
                {"ln_Z", r.log_Z},
                {"E", r.E},
                {"S", r.S},
                {"method", thermo::to_string(r.method)},
                {"entropy_form", thermo::to_string(r.form)}};
}

CommandOutput cmd_thermo(const Json& params, std::uint64_t) {
    auto nodes = parse_nodes(as_string(params, "nodes"));
    const double beta = as_double(params, "beta_tilde");
    const std::string form_name = as_string(params, "entropy_form");
    require_choice(form_name, {"paper", "standard"}, "entropy_form");
    const auto form = form_name == "paper" ? thermo::EntropyForm::paper : thermo::EntropyForm::standard;
    const auto partition =
        make_partition(as_string(params, "partition"), as_double(params, "t"), static_cast<int>(nodes.size()) - 1);
    const auto path = heat::PiecewisePath::scalar(partition, nodes);
    const auto closed = thermo::path_thermo(path, beta, form);
    const auto fd = thermo::path_thermo_finite_difference(path, beta, form);
    CommandOutput out;
    out.results["partition"] = partition_to_json(partition);
    out.results["total_variation"] = path.total_variation();
    out.results["kinetic_action"] = heat::kinetic_action(path);
    out.results["closed_form"] = thermo_to_json(closed);
    out.results["finite_difference"] = thermo_to_json(fd);
    const double expected_s = (form == thermo::EntropyForm::paper ? closed.E : beta * closed.E) + closed.log_Z;
    out.checks["entropy_identity"] = closed.S == expected_s;
    out.checks["energy_finite_difference_1e-6"] =
        std::abs(fd.E - closed.E) <= 1e-6 * std::max(1.0, std::abs(closed.E));
    out.table.header = {"method", "Z", "ln_Z", "E", "S"};
    for (const auto* r : {&closed, &fd}) {
        out.table.rows.push_back({thermo::to_string(r->method), r->Z, r->log_Z, r->E, r->S});
    }
    return out;
}

CommandOutput cmd_chain_thermo(const Json& params, std::uint64_t) {
    thermo::ChainThermoSpec spec;
    spec.l = as_int(params, "l");
    spec.m = as_int(params, "m");
    spec.n_max = as_small_int(params, "n_max", 1, quasiperiodic::kMaxFibonacciIndex);
    const int dimension = as_small_int(params, "dimension", 1, 2);
    const std::string mode = as_string(params, "expectation");
    require_choice(mode, {"n_max", "weighted"}, "expectation");
    spec.expectation = mode == "n_max" ? thermo::ExpectationMode::at_n_max : thermo::ExpectationMode::weighted_average;
    const FibonacciLengths lengths(spec.n_max);
    const auto report = dimension == 1 ? thermo::chain_entropy_report(spec, lengths)
                                       : thermo::chain_entropy_2d_report(spec, lengths, lengths);
    CommandOutput out;
    Json terms = Json::array();
    for (int n = 1; n <= spec.n_max; ++n) {
        terms.push_back(dimension == 1 ? walk::char_fn_prob(n, spec.l) : walk::two_d_paper_pmf(n, spec.l, spec.m));
    }
    out.results["Z"] = report.Z;
    out.results["ln_Z"] = std::log(report.Z);
    out.results["mean_position"] = report.mean_position;
    out.results["weight"] = report.weight;
    out.results["S"] = report.S;
    out.results["terms"] = terms;
    out.results["weights"] = dimension == 1 ? "F(l_n) = 1/l_n" : "G(l_nx, l_ny) = 1/(l_nx l_ny)";
    out.checks["symmetric_entropy_equals_ln_Z"] = report.mean_position == 0.0 && report.S == std::log(report.Z);
    out.table = scalar_table(out.results);
    return out;
}

CommandOutput cmd_btz(const Json& params, std::uint64_t) {
    const btz::BTZParams p(as_double(params, "r_plus"), as_double(params, "l_ads"), as_double(params, "g"));
    const auto r = btz::analyse(p);
    CommandOutput out;
    out.results["temperature"] = r.temperature;
    out.results["beta"] = r.beta;
    out.results["mass"] = r.mass;
    out.results["area"] = r.area;
    out.results["euclidean_action"] = r.euclidean_action;
    out.results["ln_Z"] = r.log_z;
    out.results["energy"] = r.energy;
    out.results["energy_finite_difference"] = r.energy_finite_difference;
    out.results["S"] = r.entropy;
    out.results["area_over_4G"] = r.area_entropy;
    out.results["four_pi_r_plus"] = r.four_pi_r_plus;
    out.results["dS_dM"] = r.first_law_ratio;
    out.results["convention"] = r.eight_g_is_one ? "8G = 1 (S = 4 pi r+ holds)" : "G explicit (S = 4 pi r+ does not hold)";
    out.checks["S_equals_A_over_4G"] = r.entropy_equals_area;
    out.checks["E_equals_M"] = r.energy_equals_mass;
    out.checks["E_matches_finite_difference"] = r.energy_matches_finite_difference;
    out.checks["S_equals_beta_M_minus_I_E"] = r.entropy_equals_mass_term_minus_action;
    out.checks["first_law_dS_dM_equals_beta"] = r.first_law_holds;
    out.checks["four_pi_r_plus_iff_8G_is_1"] = r.entropy_equals_four_pi_r_plus == r.eight_g_is_one;
    out.table = scalar_table(out.results);
    return out;
}

// Internal oracle cross-checks; each entry is cheap and deterministic.
CommandOutput run_check_suite(std::uint64_t seed) {
    CommandOutput out;
    Json rows = Json::array();
    auto record = [&](const std::string& name, bool passed, double value) {
        rows.push_back(Json{{"name", name}, {"passed", passed}, {"value", value}});
        out.checks[name] = passed;
    };
    {
        double worst = 0.0;
        for (int n = 0; n <= 30; ++n) {
            const auto pmf = walk::binomial_pmf(n, 0.5);
            for (int m = -n; m <= n; ++m) {
                worst = std::max(worst, std::abs(walk::char_fn_prob(n, m) - pmf.at(m)));
            }
        }
        record("char_fn_vs_binomial", worst <= 1e-10, worst);
    }
    {
        double worst = 0.0;
        for (int n = 1; n <= 20; ++n) {
            const auto dp = walk::dp_pmf(walk::StepDistribution{0.5, walk::LengthSchedule::constant(1)}, n);
            worst = std::max(worst, walk::max_abs_difference(dp, walk::binomial_pmf(n, 0.5)));
            const auto fib = walk::dp_pmf(
                walk::StepDistribution{0.5, walk::LengthSchedule::fibonacci(FibonacciLengths(n))}, n);
            worst = std::max(worst, std::abs(fib.total_mass() - 1.0));
        }
        record("dp_vs_binomial_and_normalization", worst <= 1e-12, worst);
    }
    {
        const walk::StepDistribution spec{0.5, walk::LengthSchedule::constant(1)};
        const auto mc = walk::monte_carlo_pmf(spec, 8, 100000, numerics::make_stream(seed, 0));
        const auto exact = walk::dp_pmf(spec, 8);
        double max_z = 0.0;
        for (const auto& [site, truth] : exact.support) {
            max_z = std::max(max_z, std::abs(mc.pmf.at(site) - truth) / std::sqrt(truth * (1 - truth) / 1e5));
        }
        record("mc_vs_dp_z_score", max_z <= 6.0, max_z);
    }
    {
        const double target = heat::heat_kernel(1.0, 0.0, 1.0);
        double worst = 0.0;
        for (const auto& kind : {"uniform", "fibonacci"}) {
            for (int segments = 1; segments <= 3; ++segments) {
                worst = std::max(worst,
                                 std::abs(heat::compose_kernels(make_partition(kind, 1.0, segments), 0.0, 1.0) - target));
            }
        }
        record("semigroup_composition", worst <= 1e-6, worst);
    }
    {
        const double x = 0.0;
        const double y = 1.0;
        const double target = heat::heat_kernel(1.0, x, y);
        double worst_z = 0.0;
        for (const auto& kind : {"uniform", "fibonacci"}) {
            const auto est = heat::rw_representation_mc(std::span(&x, 1), std::span(&y, 1), make_partition(kind, 1.0, 4),
                                                        10000, numerics::make_stream(seed, 1));
            worst_z = std::max(worst_z, std::abs(est.mean - target) / est.std_error);
        }
        record("path_integral_representation", worst_z <= 4.0, worst_z);
    }
    {
        const auto spec = thermo::ChainThermoSpec{0, 0, 4};
        const double z = thermo::chain_partition_function(spec);
        record("chain_partition_function_l0_n4", std::abs(z - 0.875) <= 1e-12, z);
    }
    {
        const auto r = btz::analyse(btz::BTZParams(1.0, 1.0, 0.125));
        record("btz_identities", r.all_identities_hold() && r.entropy_equals_four_pi_r_plus, r.entropy);
    }
    {
        const auto path = heat::PiecewisePath::scalar(quasiperiodic::uniform_partition(1.0, 2), {0.0, 1.0, 0.0});
        const auto closed = thermo::path_thermo(path, 0.7);
        const auto fd = thermo::path_thermo_finite_difference(path, 0.7);
        record("path_thermo_identities", closed.S == closed.E + closed.log_Z && std::abs(fd.E - closed.E) <= 1e-6,
               closed.S);
    }
    out.results["checks"] = rows;
    out.results["seed"] = seed;
    out.table.header = {"name", "passed", "value"};
    for (const auto& row : rows) {
        out.table.rows.push_back({row["name"], row["passed"], row["value"]});
    }
    return out;
}

CommandOutput revalidate_report(const std::string& path);

CommandOutput cmd_check(const Json& params, std::uint64_t seed) {
    const std::string report = as_string(params, "report");
    if (report.empty()) {
        return run_check_suite(seed);
    }
    return revalidate_report(report);
}

const std::map<std::string, CommandFn>& dispatch() {
    static const std::map<std::string, CommandFn> table = {
        {"fib", cmd_fib},
        {"word", cmd_word},
        {"walk", cmd_walk},
        {"walk2d", cmd_walk2d},
        {"kernel", cmd_kernel},
        {"pathint", cmd_pathint},
        {"qp-brownian", cmd_qp_brownian},
        {"thermo", cmd_thermo},
        {"chain-thermo", cmd_chain_thermo},
        {"btz", cmd_btz},
        {"check", cmd_check},
    };
    return table;
}

const char* format_name(OutputFormat format) { return format == OutputFormat::json ? "json" : "csv"; }

bool all_checks_pass(const Json& checks) {
    for (const auto& [name, value] : checks.items()) {
        if (!value.get<bool>()) {
            return false;
        }
    }
    return true;
}

// Re-parses an emitted report, re-runs its embedded config and compares the
// payload field by field.
CommandOutput revalidate_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open report '" + path + "'");
    }
    Json report;
    try {
        report = Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ConfigError("report '" + path + "' is not valid JSON: " + e.what());
    }
    for (const char* key : {"command", "config", "results", "checks", "ok"}) {
        if (!report.contains(key)) {
            throw ConfigError(std::string("report is missing field '") + key + "'");
        }
    }
    const Json& config = report["config"];
    RunConfig rerun;
    rerun.command = report["command"].get<std::string>();
    if (rerun.command == "check") {
        const auto nested = config.at("parameters").value("report", std::string());
        if (!nested.empty()) {
            throw ConfigError("refusing to re-validate a report of a re-validation");
        }
    }
    rerun.parameters = config.at("parameters");
    rerun.seed = config.at("seed").get<std::uint64_t>();
    const auto fresh = execute(rerun);

    CommandOutput out;
    const bool same_results = fresh.report["results"] == report["results"];
    const bool same_checks = fresh.report["checks"] == report["checks"];
    out.results["report"] = path;
    out.results["command"] = rerun.command;
    out.results["recorded_ok"] = report["ok"];
    out.checks["config_valid"] = true;
    out.checks["results_reproduced"] = same_results;
    out.checks["checks_reproduced"] = same_checks;
    out.checks["recorded_checks_pass"] = report["ok"].get<bool>() && all_checks_pass(report["checks"]);
    out.table = scalar_table(out.results);
    return out;
}

} // namespace

RunResult execute(const RunConfig& config) {
    const Json params = resolve_parameters(config);
    const auto started = std::chrono::steady_clock::now();
    CommandOutput output = dispatch().at(config.command)(params, config.seed);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    RunResult result;
    result.ok = all_checks_pass(output.checks);
    result.report["command"] = config.command;
    result.report["config"] = Json{{"parameters", params}, {"seed", config.seed}, {"format", format_name(config.format)}};
    result.report["results"] = std::move(output.results);
    result.report["checks"] = std::move(output.checks);
    result.report["ok"] = result.ok;
    if (config.timestamps) {
        const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
        std::ostringstream stamp;
        stamp << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
        result.report["timestamp"] = stamp.str();
        result.report["wall_time_seconds"] = elapsed;
    }
    result.table = std::move(output.table);
    return result;
}

std::string format_csv_cell(const Json& value) {
    if (value.is_number_float()) {
        char buffer[64];
        std::snprintf(buffer, sizeof buffer, "%.17g", value.get<double>());
        return buffer;
    }
    if (value.is_string()) {
        const auto s = value.get<std::string>();
        if (s.find_first_of(",\"\n") == std::string::npos) {
            return s;
        }
        std::string quoted = "\"";
        for (char c : s) {
            quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
        }
        return quoted + "\"";
    }
    if (value.is_null()) {
        return "";
    }
    return value.dump();
}

std::string render(const RunResult& result, OutputFormat format) {
    if (format == OutputFormat::json) {
        return result.report.dump(2) + "\n";
    }
    std::string text;
    auto append_row = [&](const auto& cells, auto&& to_text) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) {
                text += ',';
            }
            text += to_text(cells[i]);
        }
        text += '\n';
    };
    append_row(result.table.header, [](const std::string& s) { return s; });
    for (const auto& row : result.table.rows) {
        append_row(row, [](const Json& v) { return format_csv_cell(v); });
    }
    return text;
}

void emit(const RunResult& result, OutputFormat format, const std::string& path, std::ostream& out) {
    const std::string text = render(result, format);
    if (path.empty() || path == "-") {
        out << text;
        out.flush();
        return;
    }
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    file << text;
    file.flush();
    if (!file) {
        throw std::runtime_error("failed writing '" + path + "'");
    }
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
    RunResult result;
    try {
        result = execute(config);
    } catch (const ConfigError& e) {
        err << "qpwalk: invalid configuration: " << e.what() << '\n';
        return 2;
    } catch (const DomainError& e) {
        err << "qpwalk: invalid input: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        err << "qpwalk: numerical failure: " << e.what() << '\n';
        return 1;
    }
    try {
        emit(result, config.format, config.output_path, out);
    } catch (const std::exception& e) {
        err << "qpwalk: " << e.what() << '\n';
        return 1;
    }
    if (!result.ok) {
        err << "qpwalk: internal cross-check failed:";
        for (const auto& [name, value] : result.report["checks"].items()) {
            if (!value.get<bool>()) {
                err << ' ' << name;
            }
        }
        err << '\n';
        return 1;
    }
    return 0;
}

namespace {

std::string dashed(std::string key) {
    std::replace(key.begin(), key.end(), '_', '-');
    return key;
}

Json parse_flag_value(const std::string& raw, const Json& reference, const std::string& key) {
    try {
        std::size_t used = 0;
        if (reference.is_null() || reference.is_number_integer()) {
            const long long v = std::stoll(raw, &used);
            if (used != raw.size()) {
                throw std::invalid_argument(raw);
            }
            return v;
        }
        if (reference.is_number_float()) {
            const double v = std::stod(raw, &used);
            if (used != raw.size()) {
                throw std::invalid_argument(raw);
            }
            return v;
        }
    } catch (const std::exception&) {
        throw ConfigError("--" + dashed(key) + ": cannot parse '" + raw + "'");
    }
    return raw;
}

std::uint64_t seed_from_environment() {
    const char* env = std::getenv(kSeedEnvironmentVariable);
    if (env == nullptr || *env == '\0') {
        return kDefaultSeed;
    }
    try {
        std::size_t used = 0;
        const auto v = std::stoull(env, &used);
        if (used == std::string(env).size()) {
            return v;
        }
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string(kSeedEnvironmentVariable) + " is not an unsigned integer");
}

} // namespace

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"qpwalk: random walks on Fibonacci lattices, heat-kernel path integrals, path thermodynamics "
                 "and BTZ entropy"};
    app.require_subcommand(1);

    struct SubcommandState {
        CLI::App* app = nullptr;
        std::map<std::string, std::string> raw;
        std::string format = "json";
        std::string output;
        std::optional<std::uint64_t> seed;
        bool timestamps = false;
    };
    std::vector<SubcommandState> states(command_table().size());
    for (std::size_t i = 0; i < command_table().size(); ++i) {
        const auto& spec = command_table()[i];
        auto& state = states[i];
        state.app = app.add_subcommand(spec.name, spec.help);
        for (const auto& param : spec.params) {
            std::string help = param.help;
            if (!param.default_value.is_null()) {
                help += " (default " + (param.default_value.is_string() ? param.default_value.get<std::string>()
                                                                         : param.default_value.dump()) +
                        ")";
            }
            state.app->add_option("--" + dashed(param.key), state.raw[param.key], help);
        }
        state.app->add_option("--seed", state.seed,
                              std::string("master seed (default: $") + kSeedEnvironmentVariable + " or " +
                                  std::to_string(kDefaultSeed) + ")");
        state.app->add_option("--format", state.format, "output format")->check(CLI::IsMember({"json", "csv"}));
        state.app->add_option("--output,-o", state.output, "output file (default: standard output)");
        state.app->add_flag("--timestamps", state.timestamps, "add timestamp and wall-clock time to the report");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "qpwalk: " << e.what() << '\n';
        for (const auto& state : states) {
            if (state.app->parsed()) {
                err << state.app->help();
                return 2;
            }
        }
        err << app.help();
        return 2;
    }

    for (std::size_t i = 0; i < states.size(); ++i) {
        auto& state = states[i];
        if (!state.app->parsed()) {
            continue;
        }
        const auto& spec = command_table()[i];
        RunConfig config;
        config.command = spec.name;
        try {
            for (const auto& param : spec.params) {
                auto* option = state.app->get_option("--" + dashed(param.key));
                if (option->count() > 0) {
                    config.parameters[param.key] =
                        parse_flag_value(state.raw[param.key], param.default_value, param.key);
                }
            }
            config.seed = state.seed ? *state.seed : seed_from_environment();
        } catch (const ConfigError& e) {
            err << "qpwalk: invalid configuration: " << e.what() << '\n' << state.app->help();
            return 2;
        }
        config.format = state.format == "csv" ? OutputFormat::csv : OutputFormat::json;
        config.output_path = state.output;
        config.timestamps = state.timestamps;
        return run(config, out, err);
    }
    return 2;
}

} // namespace qpwalk::cli
