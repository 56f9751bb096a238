#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace qpwalk::numerics {

using RealFunction = std::function<double(double)>;

enum class QuadratureRule { gauss_legendre, trapezoid_periodic };

/// A fixed-order quadrature rule on [a, b].
struct QuadratureSpec {
    QuadratureRule rule = QuadratureRule::gauss_legendre;
    int node_count = 16;
    double a = -1.0;
    double b = 1.0;

    /// Throws DomainError unless node_count >= 2 and a < b (both finite).
    void validate() const;
};

struct NodesAndWeights {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre nodes and weights on [-1, 1], ascending. Cached per order.
const NodesAndWeights& gauss_legendre_rule(int order);

/// Nodes and weights of `spec` mapped onto [spec.a, spec.b].
NodesAndWeights quadrature_points(const QuadratureSpec& spec);

/// Approximates the integral of f over [spec.a, spec.b].
/// For trapezoid_periodic the integrand is assumed (b - a)-periodic and the
/// node at b is omitted. Throws NumericalError naming the node if f returns
/// a non-finite value.
double integrate(const RealFunction& f, const QuadratureSpec& spec);

/// (f(x + h) - f(x - h)) / (2h). Throws DomainError for h == 0.
double central_difference(const RealFunction& f, double x, double h);

/// Default step 1e-5 * max(1, |x|).
double default_step(double x);

/// Overload using default_step(x).
double central_difference(const RealFunction& f, double x);

/// Immutable descriptor of a reproducible random stream. Two descriptors with
/// equal fields yield bit-identical draws.
struct RandomStream {
    std::uint64_t master_seed = 0;
    std::uint64_t stream_index = 0;

    /// Counter-indexed child stream; children of distinct parents or with
    /// distinct indices do not overlap in practice.
    RandomStream substream(std::uint64_t index) const;

    friend bool operator==(const RandomStream&, const RandomStream&) = default;
};

RandomStream make_stream(std::uint64_t master_seed, std::uint64_t stream_index);

/// Stateful generator attached to a RandomStream. All conversions from raw
/// bits are done here so draw sequences do not depend on the standard
/// library's distribution implementations.
class StreamEngine {
public:
    explicit StreamEngine(const RandomStream& stream);

    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    /// Fair coin: true with probability 1/2.
    bool coin();
    /// true with probability p.
    bool bernoulli(double p);
    /// Standard normal via Box-Muller.
    double normal();

private:
    std::uint64_t state_[4];
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

/// SplitMix64 finalizer, used for seed derivation.
std::uint64_t mix64(std::uint64_t x);

} // namespace qpwalk::numerics
