#include "qpwalk/thermo.hpp"

#include "qpwalk/error.hpp"
#include "qpwalk/numerics.hpp"
#include "qpwalk/walk.hpp"

#include <cmath>
#include <string>

namespace qpwalk::thermo {

namespace {

ThermoReport assemble(double log_z, double energy, double beta_tilde, ThermoMethod method, EntropyForm form) {
    ThermoReport r;
    r.log_Z = log_z;
    r.Z = std::exp(log_z);
    r.E = energy;
    r.S = (form == EntropyForm::paper ? energy : beta_tilde * energy) + log_z;
    r.method = method;
    r.form = form;
    return r;
}

void require_lengths(const quasiperiodic::FibonacciLengths& lengths, int n_max, const char* axis) {
    if (lengths.n_max() < n_max) {
        throw DomainError(std::string("Fibonacci lengths") + axis + " cover n <= " + std::to_string(lengths.n_max()) +
                          " but n_max = " + std::to_string(n_max));
    }
}

} // namespace

ThermoReport path_thermo(const heat::PiecewisePath& path, double beta_tilde, EntropyForm form) {
    const double total = path.total_variation();
    return assemble(-beta_tilde * total, total, beta_tilde, ThermoMethod::closed_form, form);
}

ThermoReport path_thermo_finite_difference(const heat::PiecewisePath& path, double beta_tilde, EntropyForm form) {
    auto log_z = [&](double b) { return -heat::length_action(path, b); };
    const double energy = -numerics::central_difference(log_z, beta_tilde);
    return assemble(log_z(beta_tilde), energy, beta_tilde, ThermoMethod::finite_difference, form);
}

double default_weight_f(std::int64_t l_n) { return 1.0 / static_cast<double>(l_n); }

double default_weight_g(std::int64_t l_nx, std::int64_t l_ny) {
    return 1.0 / (static_cast<double>(l_nx) * static_cast<double>(l_ny));
}

void ChainThermoSpec::validate() const {
    if (n_max < 1) {
        throw DomainError("n_max must be >= 1 (the chain series is truncated explicitly)");
    }
    if (!weight_f || !weight_g) {
        throw DomainError("chain weights must be set");
    }
}

double chain_partition_function(const ChainThermoSpec& spec) {
    spec.validate();
    double z = 0.0;
    for (int n = 1; n <= spec.n_max; ++n) {
        z += walk::char_fn_prob(n, spec.l);
    }
    return z;
}

double chain_mean_position(int n, std::int64_t l_n) {
    // Pair +l' with -l' so a symmetric law cancels exactly.
    double mean = 0.0;
    for (std::int64_t lp = 1; lp <= n; ++lp) {
        const double right = static_cast<double>(lp * l_n) * walk::char_fn_prob(n, lp);
        const double left = static_cast<double>(-lp * l_n) * walk::char_fn_prob(n, -lp);
        mean += right + left;
    }
    return mean;
}

namespace {

double weighted_mean(const ChainThermoSpec& spec, const quasiperiodic::FibonacciLengths& lengths, double z,
                     auto&& term_probability) {
    double acc = 0.0;
    for (int n = 1; n <= spec.n_max; ++n) {
        acc += term_probability(n) * chain_mean_position(n, lengths[n]);
    }
    return acc / z;
}

} // namespace

ChainThermoReport chain_entropy_report(const ChainThermoSpec& spec, const quasiperiodic::FibonacciLengths& lengths) {
    spec.validate();
    require_lengths(lengths, spec.n_max, "");
    ChainThermoReport r;
    r.Z = chain_partition_function(spec);
    if (!(r.Z > 0.0)) {
        throw NumericalError("chain partition function is zero for l = " + std::to_string(spec.l) +
                             " (unreachable site); ln Z is undefined");
    }
    const std::int64_t l_top = lengths[spec.n_max];
    r.mean_position = spec.expectation == ExpectationMode::at_n_max
                          ? chain_mean_position(spec.n_max, l_top)
                          : weighted_mean(spec, lengths, r.Z, [&](int n) { return walk::char_fn_prob(n, spec.l); });
    r.weight = spec.weight_f(l_top);
    r.S = r.weight * r.mean_position + std::log(r.Z);
    return r;
}

double chain_entropy(const ChainThermoSpec& spec, const quasiperiodic::FibonacciLengths& lengths) {
    return chain_entropy_report(spec, lengths).S;
}

ChainThermoReport chain_entropy_2d_report(const ChainThermoSpec& spec,
                                          const quasiperiodic::FibonacciLengths& lengths_x,
                                          const quasiperiodic::FibonacciLengths& lengths_y) {
    spec.validate();
    require_lengths(lengths_x, spec.n_max, " (x)");
    require_lengths(lengths_y, spec.n_max, " (y)");
    ChainThermoReport r;
    for (int n = 1; n <= spec.n_max; ++n) {
        r.Z += walk::two_d_paper_pmf(n, spec.l, spec.m);
    }
    if (!(r.Z > 0.0)) {
        throw NumericalError("2D chain partition function is zero; ln Z is undefined");
    }
    const int top = spec.n_max;
    if (spec.expectation == ExpectationMode::at_n_max) {
        r.mean_position = chain_mean_position(top, lengths_x[top]) + chain_mean_position(top, lengths_y[top]);
    } else {
        auto term = [&](int n) { return walk::two_d_paper_pmf(n, spec.l, spec.m); };
        r.mean_position = weighted_mean(spec, lengths_x, r.Z, term) + weighted_mean(spec, lengths_y, r.Z, term);
    }
    r.weight = spec.weight_g(lengths_x[top], lengths_y[top]);
    r.S = r.weight * r.mean_position + std::log(r.Z);
    return r;
}

double chain_entropy_2d(const ChainThermoSpec& spec, const quasiperiodic::FibonacciLengths& lengths_x,
                        const quasiperiodic::FibonacciLengths& lengths_y) {
    return chain_entropy_2d_report(spec, lengths_x, lengths_y).S;
}

const char* to_string(ThermoMethod method) {
    return method == ThermoMethod::closed_form ? "closed_form" : "finite_difference";
}

const char* to_string(EntropyForm form) { return form == EntropyForm::paper ? "paper" : "standard"; }

} // namespace qpwalk::thermo
