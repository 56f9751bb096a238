#include "qpwalk/numerics.hpp"

#include "qpwalk/error.hpp"

#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>

namespace qpwalk::numerics {

void QuadratureSpec::validate() const {
    if (node_count < 2) {
        throw DomainError("quadrature needs at least 2 nodes, got " + std::to_string(node_count));
    }
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
        std::ostringstream os;
        os << "quadrature interval must satisfy a < b, got [" << a << ", " << b << "]";
        throw DomainError(os.str());
    }
}

namespace {

// Newton iteration on P_n from the Chebyshev-like initial guess; converges
// to machine precision in a handful of steps for every order we use.
NodesAndWeights compute_gauss_legendre(int n) {
    NodesAndWeights rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = z;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) {
                break;
            }
        }
        // Recompute the derivative at the converged root for the weight.
        double p0 = 1.0;
        double p1 = z;
        for (int k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        dp = n * (z * p1 - p0) / (z * z - 1.0);
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) {
        rule.nodes[n / 2] = 0.0;
    }
    return rule;
}

} // namespace

const NodesAndWeights& gauss_legendre_rule(int order) {
    if (order < 1) {
        throw DomainError("Gauss-Legendre order must be positive");
    }
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<NodesAndWeights>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[order];
    if (!slot) {
        slot = std::make_unique<NodesAndWeights>(compute_gauss_legendre(order));
    }
    return *slot;
}

NodesAndWeights quadrature_points(const QuadratureSpec& spec) {
    spec.validate();
    NodesAndWeights out;
    const int n = spec.node_count;
    out.nodes.resize(n);
    out.weights.resize(n);
    if (spec.rule == QuadratureRule::gauss_legendre) {
        const auto& ref = gauss_legendre_rule(n);
        const double mid = 0.5 * (spec.a + spec.b);
        const double half = 0.5 * (spec.b - spec.a);
        for (int i = 0; i < n; ++i) {
            out.nodes[i] = mid + half * ref.nodes[i];
            out.weights[i] = half * ref.weights[i];
        }
    } else {
        const double h = (spec.b - spec.a) / n;
        for (int i = 0; i < n; ++i) {
            out.nodes[i] = spec.a + i * h;
            out.weights[i] = h;
        }
    }
    return out;
}

double integrate(const RealFunction& f, const QuadratureSpec& spec) {
    const auto points = quadrature_points(spec);
    double sum = 0.0;
    for (std::size_t i = 0; i < points.nodes.size(); ++i) {
        const double x = points.nodes[i];
        const double fx = f(x);
        if (!std::isfinite(fx)) {
            std::ostringstream os;
            os.precision(17);
            os << "integrand is not finite at node " << i << " (x = " << x << ")";
            throw NumericalError(os.str());
        }
        sum += points.weights[i] * fx;
    }
    return sum;
}

double central_difference(const RealFunction& f, double x, double h) {
    if (h == 0.0 || !std::isfinite(h)) {
        throw DomainError("finite-difference step must be non-zero and finite");
    }
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

double default_step(double x) { return 1e-5 * std::max(1.0, std::abs(x)); }

double central_difference(const RealFunction& f, double x) {
    return central_difference(f, x, default_step(x));
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RandomStream RandomStream::substream(std::uint64_t index) const {
    return RandomStream{mix64(master_seed ^ mix64(stream_index ^ 0x5851f42d4c957f2dULL)), index};
}

RandomStream make_stream(std::uint64_t master_seed, std::uint64_t stream_index) {
    return RandomStream{master_seed, stream_index};
}

StreamEngine::StreamEngine(const RandomStream& stream) {
    // Seed xoshiro256** from a SplitMix64 sequence keyed by both fields.
    std::uint64_t s = mix64(stream.master_seed) ^ mix64(~stream.stream_index);
    for (auto& word : state_) {
        s += 0x9e3779b97f4a7c15ULL;
        word = mix64(s);
    }
}

std::uint64_t StreamEngine::next_u64() {
    const std::uint64_t result = std::rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = std::rotl(state_[3], 45);
    return result;
}

double StreamEngine::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

bool StreamEngine::coin() { return (next_u64() >> 63) != 0; }

bool StreamEngine::bernoulli(double p) {
    if (p >= 1.0) {
        return true;
    }
    if (p <= 0.0) {
        return false;
    }
    return uniform() < p;
}

double StreamEngine::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_normal_;
    }
    double u1 = uniform();
    while (u1 == 0.0) {
        u1 = uniform();
    }
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_normal_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
}

} // namespace qpwalk::numerics
