#include "qpwalk/walk.hpp"

#include "qpwalk/error.hpp"

#include <boost/math/distributions/binomial.hpp>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <numbers>
#include <string>
#include <thread>

namespace qpwalk::walk {

LengthSchedule::LengthSchedule(std::vector<std::int64_t> lengths, bool constant)
    : lengths_(std::move(lengths)), constant_(constant) {
    for (auto len : lengths_) {
        if (len < 1) {
            throw DomainError("step lengths must be >= 1");
        }
    }
}

LengthSchedule LengthSchedule::constant(std::int64_t length) { return LengthSchedule({length}, true); }

LengthSchedule LengthSchedule::explicit_lengths(std::vector<std::int64_t> lengths) {
    return LengthSchedule(std::move(lengths), false);
}

LengthSchedule LengthSchedule::fibonacci(const quasiperiodic::FibonacciLengths& lengths) {
    auto values = lengths.values();
    if (values.size() < 2) {
        return LengthSchedule({}, false);
    }
    return LengthSchedule(std::vector<std::int64_t>(values.begin() + 1, values.end()), false);
}

std::int64_t LengthSchedule::at(int k) const {
    if (k < 1) {
        throw DomainError("step index is 1-based");
    }
    if (constant_) {
        return lengths_.front();
    }
    if (static_cast<std::size_t>(k) > lengths_.size()) {
        throw DomainError("step " + std::to_string(k) + " is beyond the length schedule (" +
                          std::to_string(lengths_.size()) + " steps)");
    }
    return lengths_[k - 1];
}

int LengthSchedule::size() const { return constant_ ? -1 : static_cast<int>(lengths_.size()); }

void StepDistribution::validate() const {
    if (!(p_right >= 0.0 && p_right <= 1.0)) {
        throw DomainError("p_right must lie in [0, 1]");
    }
}

namespace {

void check_probability(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw DomainError("probability must lie in [0, 1], got " + std::to_string(p));
    }
}

std::uint64_t binomial_coefficient(int n, int k) {
    k = std::min(k, n - k);
    std::uint64_t c = 1;
    for (int i = 1; i <= k; ++i) {
        c = c * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    }
    return c;
}

// Sum of lengths of the first n steps; throws when the dense span would exceed
// the DP budget.
std::int64_t reach(const LengthSchedule& lengths, int n) {
    std::int64_t total = 0;
    for (int k = 1; k <= n; ++k) {
        total += lengths.at(k);
        if (2 * total + 1 > kMaxDpSites) {
            throw DomainError("DP support overflow: " + std::to_string(n) + " steps reach beyond " +
                              std::to_string(kMaxDpSites) + " sites");
        }
    }
    return total;
}

} // namespace

Pmf1D binomial_pmf(int n_steps, double p) {
    if (n_steps < 0 || n_steps > 1000) {
        throw DomainError("binomial_pmf supports 0 <= N <= 1000");
    }
    check_probability(p);
    Pmf1D out;
    out.n_steps = n_steps;
    const double q = 1.0 - p;
    if (p == 0.0 || p == 1.0) {
        out.support[p == 1.0 ? n_steps : -n_steps] = 1.0;
        return out;
    }
    const boost::math::binomial_distribution<double> law(n_steps, p);
    // n_right steps right, m = 2 n_right - N. A fair walk is mirrored so that it
    // comes out exactly symmetric.
    const bool fair = p == q;
    for (int n_right = 0; n_right <= n_steps; ++n_right) {
        const int n_left = n_steps - n_right;
        const int k = fair ? std::min(n_right, n_left) : n_right;
        double mass;
        if (n_steps <= 20) {
            mass = static_cast<double>(binomial_coefficient(n_steps, k)) *
                   (fair ? std::pow(p, n_steps) : std::pow(p, n_right) * std::pow(q, n_left));
        } else {
            mass = boost::math::pdf(law, k);
        }
        if (mass > 0.0) {
            out.support[2 * n_right - n_steps] = mass;
        }
    }
    return out;
}

double char_fn_prob(int n, std::int64_t l) {
    if (n < 0) {
        throw DomainError("number of steps must be non-negative");
    }
    // Trapezoid on M nodes is exact for trigonometric polynomials of degree
    // < M; the integrand has degree n + |l|.
    const auto degree = static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(std::abs(l));
    std::uint64_t nodes = std::max<std::uint64_t>(64, std::bit_ceil(degree + 2));
    constexpr std::uint64_t max_nodes = std::uint64_t{1} << 22;
    if (nodes > max_nodes) {
        throw DomainError("char_fn_prob: n + |l| too large for the quadrature budget");
    }
    const auto lk = static_cast<double>(l);
    auto real_part = [&](double k) { return std::cos(lk * k) * std::pow(std::cos(k), n); };
    auto imag_part = [&](double k) { return -std::sin(lk * k) * std::pow(std::cos(k), n); };
    constexpr double inv_two_pi = 0.5 / std::numbers::pi;

    auto estimate = [&](std::uint64_t m) {
        numerics::QuadratureSpec spec{numerics::QuadratureRule::trapezoid_periodic, static_cast<int>(m),
                                      -std::numbers::pi, std::numbers::pi};
        return inv_two_pi * numerics::integrate(real_part, spec);
    };

    double previous = estimate(nodes);
    for (;;) {
        nodes *= 2;
        if (nodes > max_nodes) {
            throw NumericalError("char_fn_prob: quadrature did not converge");
        }
        const double current = estimate(nodes);
        if (std::abs(current - previous) < 1e-12) {
            numerics::QuadratureSpec spec{numerics::QuadratureRule::trapezoid_periodic, static_cast<int>(nodes),
                                          -std::numbers::pi, std::numbers::pi};
            const double imag = inv_two_pi * numerics::integrate(imag_part, spec);
            if (std::abs(imag) > 1e-12) {
                throw NumericalError("char_fn_prob: imaginary part " + std::to_string(imag) + " is not negligible");
            }
            return current;
        }
        previous = current;
    }
}

FibonacciSitePrediction fibonacci_walk_position(int n, std::int64_t l,
                                                const quasiperiodic::FibonacciLengths& lengths) {
    if (n < 1 || n > lengths.n_max()) {
        throw DomainError("step index " + std::to_string(n) + " outside the Fibonacci lengths range [1, " +
                          std::to_string(lengths.n_max()) + "]");
    }
    return FibonacciSitePrediction{l * lengths[n], char_fn_prob(n, l)};
}

Pmf1D dp_pmf(const StepDistribution& spec, int n_steps) {
    spec.validate();
    if (n_steps < 0) {
        throw DomainError("number of steps must be non-negative");
    }
    const std::int64_t span = reach(spec.lengths, n_steps);
    const std::int64_t offset = span;
    std::vector<double> current(static_cast<std::size_t>(2 * span + 1), 0.0);
    std::vector<double> next(current.size(), 0.0);
    current[offset] = 1.0;
    const double p = spec.p_right;
    const double q = 1.0 - p;
    std::int64_t reached = 0;
    for (int k = 1; k <= n_steps; ++k) {
        const std::int64_t len = spec.lengths.at(k);
        std::fill(next.begin() + (offset - reached - len), next.begin() + (offset + reached + len + 1), 0.0);
        for (std::int64_t s = -reached; s <= reached; ++s) {
            const double mass = current[offset + s];
            if (mass == 0.0) {
                continue;
            }
            next[offset + s + len] += p * mass;
            next[offset + s - len] += q * mass;
        }
        reached += len;
        std::swap(current, next);
    }
    Pmf1D out;
    out.n_steps = n_steps;
    for (std::int64_t s = -reached; s <= reached; ++s) {
        if (current[offset + s] > 0.0) {
            out.support[s] = current[offset + s];
        }
    }
    return out;
}

std::map<Site1D, Rational> dp_pmf_exact(const Rational& p_right, const LengthSchedule& lengths, int n_steps) {
    if (p_right < 0 || p_right > 1) {
        throw DomainError("p_right must lie in [0, 1]");
    }
    if (n_steps < 0) {
        throw DomainError("number of steps must be non-negative");
    }
    reach(lengths, n_steps);
    const Rational q = 1 - p_right;
    std::map<Site1D, Rational> current{{0, Rational(1)}};
    for (int k = 1; k <= n_steps; ++k) {
        const std::int64_t len = lengths.at(k);
        std::map<Site1D, Rational> next;
        for (const auto& [site, mass] : current) {
            if (p_right != 0) {
                next[site + len] += p_right * mass;
            }
            if (q != 0) {
                next[site - len] += q * mass;
            }
        }
        current = std::move(next);
    }
    return current;
}

MonteCarloPmf monte_carlo_pmf(const StepDistribution& spec, int n_steps, std::int64_t samples,
                              const numerics::RandomStream& stream) {
    spec.validate();
    if (n_steps < 1) {
        throw DomainError("Monte Carlo walk needs at least one step");
    }
    if (samples < 100) {
        throw DomainError("Monte Carlo needs at least 100 samples");
    }
    std::vector<std::int64_t> step_lengths(static_cast<std::size_t>(n_steps));
    for (int k = 1; k <= n_steps; ++k) {
        step_lengths[k - 1] = spec.lengths.at(k);
    }

    const std::int64_t chunks = (samples + kMonteCarloChunk - 1) / kMonteCarloChunk;
    std::vector<std::map<Site1D, std::int64_t>> chunk_counts(static_cast<std::size_t>(chunks));
    auto run_chunk = [&](std::int64_t c) {
        numerics::StreamEngine engine(stream.substream(static_cast<std::uint64_t>(c)));
        const std::int64_t begin = c * kMonteCarloChunk;
        const std::int64_t end = std::min(samples, begin + kMonteCarloChunk);
        auto& counts = chunk_counts[c];
        for (std::int64_t i = begin; i < end; ++i) {
            std::int64_t x = 0;
            for (auto len : step_lengths) {
                x += engine.bernoulli(spec.p_right) ? len : -len;
            }
            ++counts[x];
        }
    };

    const auto workers =
        static_cast<std::int64_t>(std::min<std::int64_t>(chunks, std::max(1u, std::thread::hardware_concurrency())));
    if (workers <= 1) {
        for (std::int64_t c = 0; c < chunks; ++c) {
            run_chunk(c);
        }
    } else {
        std::atomic<std::int64_t> next_chunk{0};
        std::vector<std::jthread> pool;
        for (std::int64_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::int64_t c = next_chunk++; c < chunks; c = next_chunk++) {
                    run_chunk(c);
                }
            });
        }
    }

    MonteCarloPmf out;
    out.samples = samples;
    out.stream = stream;
    for (const auto& counts : chunk_counts) {
        for (const auto& [site, count] : counts) {
            out.counts[site] += count;
        }
    }
    out.pmf.n_steps = n_steps;
    for (const auto& [site, count] : out.counts) {
        out.pmf.support[site] = static_cast<double>(count) / static_cast<double>(samples);
    }
    return out;
}

double two_d_paper_pmf(int n, std::int64_t l, std::int64_t m) {
    return 0.25 * (char_fn_prob(n, l) + char_fn_prob(n, m));
}

Pmf2D two_d_dp_pmf(int n, const LengthSchedule& lengths_x, const LengthSchedule& lengths_y) {
    if (n < 0) {
        throw DomainError("number of steps must be non-negative");
    }
    const std::int64_t span_x = reach(lengths_x, n);
    const std::int64_t span_y = reach(lengths_y, n);
    const std::int64_t width = 2 * span_x + 1;
    const std::int64_t height = 2 * span_y + 1;
    if (width * height > kMaxDpSites) {
        throw DomainError("2D DP support overflow");
    }
    auto index = [&](std::int64_t x, std::int64_t y) {
        return static_cast<std::size_t>((y + span_y) * width + (x + span_x));
    };
    std::vector<double> current(static_cast<std::size_t>(width * height), 0.0);
    std::vector<double> next(current.size(), 0.0);
    current[index(0, 0)] = 1.0;
    std::int64_t reach_x = 0;
    std::int64_t reach_y = 0;
    for (int k = 1; k <= n; ++k) {
        const std::int64_t lx = lengths_x.at(k);
        const std::int64_t ly = lengths_y.at(k);
        std::fill(next.begin(), next.end(), 0.0);
        for (std::int64_t y = -reach_y; y <= reach_y; ++y) {
            for (std::int64_t x = -reach_x; x <= reach_x; ++x) {
                const double mass = current[index(x, y)];
                if (mass == 0.0) {
                    continue;
                }
                const double quarter = 0.25 * mass;
                next[index(x + lx, y)] += quarter;
                next[index(x - lx, y)] += quarter;
                next[index(x, y + ly)] += quarter;
                next[index(x, y - ly)] += quarter;
            }
        }
        reach_x += lx;
        reach_y += ly;
        std::swap(current, next);
    }
    Pmf2D out;
    out.n_steps = n;
    for (std::int64_t y = -reach_y; y <= reach_y; ++y) {
        for (std::int64_t x = -reach_x; x <= reach_x; ++x) {
            const double mass = current[index(x, y)];
            if (mass > 0.0) {
                out.support[{x, y}] = mass;
            }
        }
    }
    return out;
}

TwoDAudit audit_two_d_formula(int n, const LengthSchedule& lengths_x, const LengthSchedule& lengths_y) {
    if (n < 1) {
        throw DomainError("audit needs n >= 1");
    }
    const Pmf2D exact = two_d_dp_pmf(n, lengths_x, lengths_y);
    const std::int64_t lx = lengths_x.at(n);
    const std::int64_t ly = lengths_y.at(n);
    std::vector<double> marginal(static_cast<std::size_t>(2 * n + 1));
    for (int l = -n; l <= n; ++l) {
        marginal[l + n] = char_fn_prob(n, l);
    }
    TwoDAudit audit;
    audit.n = n;
    audit.exact_total_mass = exact.total_mass();
    for (int l = -n; l <= n; ++l) {
        for (int m = -n; m <= n; ++m) {
            const double paper = 0.25 * (marginal[l + n] + marginal[m + n]);
            const double truth = exact.at({l * lx, m * ly});
            audit.paper_window_mass += paper;
            audit.exact_window_mass += truth;
            const double dev = std::abs(paper - truth);
            if (dev > audit.max_abs_deviation) {
                audit.max_abs_deviation = dev;
                audit.worst_l = l;
                audit.worst_m = m;
            }
        }
    }
    return audit;
}

double max_abs_difference(const Pmf1D& a, const Pmf1D& b) {
    double worst = 0.0;
    for (const auto& [site, mass] : a.support) {
        worst = std::max(worst, std::abs(mass - b.at(site)));
    }
    for (const auto& [site, mass] : b.support) {
        worst = std::max(worst, std::abs(mass - a.at(site)));
    }
    return worst;
}

} // namespace qpwalk::walk
