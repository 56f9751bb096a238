#pragma once

#include "qpwalk/heat.hpp"
#include "qpwalk/quasiperiodic.hpp"

#include <cstdint>
#include <functional>

namespace qpwalk::thermo {

enum class ThermoMethod { closed_form, finite_difference };

/// Entropy convention for the length-action ensemble.
///   paper:    S = E + ln Z
///   standard: S = beta_tilde E + ln Z
enum class EntropyForm { paper, standard };

struct ThermoReport {
    double Z = 0.0;
    double log_Z = 0.0;
    double E = 0.0;
    double S = 0.0;
    ThermoMethod method = ThermoMethod::closed_form;
    EntropyForm form = EntropyForm::paper;
};

/// Z = exp(-beta_tilde L), E = L, S = E + ln Z (or beta_tilde E + ln Z)
/// where L is the total variation of the path.
ThermoReport path_thermo(const heat::PiecewisePath& path, double beta_tilde, EntropyForm form = EntropyForm::paper);

/// As path_thermo, but E = -d ln Z / d beta_tilde by central difference.
ThermoReport path_thermo_finite_difference(const heat::PiecewisePath& path, double beta_tilde,
                                           EntropyForm form = EntropyForm::paper);

/// Where <X_n> is evaluated in the chain entropy.
enum class ExpectationMode {
    /// At n = n_max.
    at_n_max,
    /// Sum over n of Pr{X_n = l l_n} <X_n>, divided by Z.
    weighted_average,
};

using WeightF = std::function<double(std::int64_t)>;
using WeightG = std::function<double(std::int64_t, std::int64_t)>;

/// F(l_n) = 1 / l_n.
double default_weight_f(std::int64_t l_n);
/// G(l_nx, l_ny) = 1 / (l_nx l_ny).
double default_weight_g(std::int64_t l_nx, std::int64_t l_ny);

struct ChainThermoSpec {
    std::int64_t l = 0;
    /// Second lattice multiplier, used by the two-dimensional chain only.
    std::int64_t m = 0;
    /// Required truncation of the divergent series.
    int n_max = 1;
    WeightF weight_f = default_weight_f;
    WeightG weight_g = default_weight_g;
    ExpectationMode expectation = ExpectationMode::at_n_max;

    void validate() const;
};

/// Z = sum_{n=1}^{n_max} Pr{X_n = l l_n}.
double chain_partition_function(const ChainThermoSpec& spec);

/// <X_n> = sum_{l'} l' l_n Pr{X_n = l' l_n}.
double chain_mean_position(int n, std::int64_t l_n);

struct ChainThermoReport {
    double Z = 0.0;
    double mean_position = 0.0;
    double weight = 0.0;
    double S = 0.0;
};

/// S = F(l_{n_max}) <X_n> + ln Z. Throws NumericalError if Z = 0.
ChainThermoReport chain_entropy_report(const ChainThermoSpec& spec, const quasiperiodic::FibonacciLengths& lengths);
double chain_entropy(const ChainThermoSpec& spec, const quasiperiodic::FibonacciLengths& lengths);

/// Z = sum_n two_d_paper_pmf(n, l, m); S = G(l_nx, l_ny)(<X_n> + <Y_n>) + ln Z.
ChainThermoReport chain_entropy_2d_report(const ChainThermoSpec& spec,
                                          const quasiperiodic::FibonacciLengths& lengths_x,
                                          const quasiperiodic::FibonacciLengths& lengths_y);
double chain_entropy_2d(const ChainThermoSpec& spec, const quasiperiodic::FibonacciLengths& lengths_x,
                        const quasiperiodic::FibonacciLengths& lengths_y);

const char* to_string(ThermoMethod method);
const char* to_string(EntropyForm form);

} // namespace qpwalk::thermo
