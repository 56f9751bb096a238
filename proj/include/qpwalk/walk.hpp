#pragma once

#include "qpwalk/numerics.hpp"
#include "qpwalk/quasiperiodic.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace qpwalk::walk {

using Site1D = std::int64_t;
using Site2D = std::pair<std::int64_t, std::int64_t>;

/// Probability mass function over lattice sites after n_steps steps.
/// Zero-mass sites are not stored.
template <typename Site>
struct LatticePmf {
    int n_steps = 0;
    std::map<Site, double> support;

    double at(const Site& site) const {
        auto it = support.find(site);
        return it == support.end() ? 0.0 : it->second;
    }

    double total_mass() const {
        double sum = 0.0;
        for (const auto& [site, mass] : support) {
            sum += mass;
        }
        return sum;
    }
};

using Pmf1D = LatticePmf<Site1D>;
using Pmf2D = LatticePmf<Site2D>;

/// Step length for step k = 1, 2, ...: either a constant or an explicit list.
class LengthSchedule {
public:
    static LengthSchedule constant(std::int64_t length);
    static LengthSchedule explicit_lengths(std::vector<std::int64_t> lengths);
    /// Step k has length l_k, k = 1 .. lengths.n_max().
    static LengthSchedule fibonacci(const quasiperiodic::FibonacciLengths& lengths);

    /// Length of step k (1-based). Throws DomainError past the schedule end.
    std::int64_t at(int k) const;
    /// Number of steps covered; -1 for an unbounded constant schedule.
    int size() const;
    bool is_constant() const { return constant_; }

private:
    LengthSchedule(std::vector<std::int64_t> lengths, bool constant);

    std::vector<std::int64_t> lengths_;
    bool constant_;
};

/// Two-point step law: +length with probability p_right, -length otherwise.
struct StepDistribution {
    double p_right = 0.5;
    LengthSchedule lengths = LengthSchedule::constant(1);

    void validate() const;
};

/// Closed-form N-step pmf of the unit-step walk. Masses are computed from
/// exact binomial coefficients for N <= 20 and log-factorials above.
Pmf1D binomial_pmf(int n_steps, double p);

/// Pr{X_n = l l_n} = (1/2pi) Re int_{-pi}^{pi} e^{-ilk} cos^n k dk by
/// periodic trapezoid with node doubling. Independent of l_n.
double char_fn_prob(int n, std::int64_t l);

struct FibonacciSitePrediction {
    std::int64_t position = 0;
    double probability = 0.0;
};

/// Physical position l * l_n together with char_fn_prob(n, l).
FibonacciSitePrediction fibonacci_walk_position(int n, std::int64_t l,
                                                const quasiperiodic::FibonacciLengths& lengths);

/// Largest number of lattice sites a dense DP buffer may span.
inline constexpr std::int64_t kMaxDpSites = std::int64_t{1} << 26;

/// Exact N-step pmf by successive convolution with the two-point step law.
Pmf1D dp_pmf(const StepDistribution& spec, int n_steps);

using Rational = boost::multiprecision::cpp_rational;

/// Rational-arithmetic variant of dp_pmf. Total mass is exactly 1.
std::map<Site1D, Rational> dp_pmf_exact(const Rational& p_right, const LengthSchedule& lengths, int n_steps);

struct MonteCarloPmf {
    Pmf1D pmf;
    std::map<Site1D, std::int64_t> counts;
    std::int64_t samples = 0;
    numerics::RandomStream stream;
};

/// Samples per counter-indexed sub-stream chunk.
inline constexpr std::int64_t kMonteCarloChunk = 1 << 16;

/// Empirical pmf from `samples` independent walks. Deterministic for a fixed
/// stream regardless of thread count.
MonteCarloPmf monte_carlo_pmf(const StepDistribution& spec, int n_steps, std::int64_t samples,
                              const numerics::RandomStream& stream);

/// (1/4)(char_fn_prob(n, l) + char_fn_prob(n, m)), the two-dimensional
/// lattice expression evaluated as written. Not a normalized joint law.
double two_d_paper_pmf(int n, std::int64_t l, std::int64_t m);

/// Exact joint pmf of the four-point axis-move walk: each step moves
/// +-lx_k along x or +-ly_k along y, each with probability 1/4.
Pmf2D two_d_dp_pmf(int n, const LengthSchedule& lengths_x, const LengthSchedule& lengths_y);

/// Comparison of two_d_paper_pmf against the exact law on the window
/// |l|, |m| <= n, sites (l * lx_n, m * ly_n).
struct TwoDAudit {
    int n = 0;
    double paper_window_mass = 0.0;
    double exact_total_mass = 0.0;
    double exact_window_mass = 0.0;
    double max_abs_deviation = 0.0;
    std::int64_t worst_l = 0;
    std::int64_t worst_m = 0;
};

TwoDAudit audit_two_d_formula(int n, const LengthSchedule& lengths_x, const LengthSchedule& lengths_y);

/// Maximum |a(s) - b(s)| over the union of supports.
double max_abs_difference(const Pmf1D& a, const Pmf1D& b);

} // namespace qpwalk::walk
