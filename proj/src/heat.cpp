#include "qpwalk/heat.hpp"

#include "qpwalk/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

namespace qpwalk::heat {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double squared_distance(Point a, Point b) {
    double sum = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        sum += diff * diff;
    }
    return sum;
}

void require_same_dimension(Point x, Point y) {
    if (x.empty() || x.size() != y.size()) {
        throw DomainError("endpoints must be non-empty and of equal dimension");
    }
}

// Neumaier-compensated running sum.
struct CompensatedSum {
    double sum = 0.0;
    double carry = 0.0;

    void add(double v) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    double value() const { return sum + carry; }
};

struct WeightMoments {
    CompensatedSum sum;
    CompensatedSum sum_sq;

    void add(double w) {
        sum.add(w);
        sum_sq.add(w * w);
    }
};

// Draws interior nodes of a Brownian bridge from x (time 0) to y (time t) on
// the partition, writing them into `path`. Returns the log density of the draw.
double sample_bridge(PiecewisePath& path, Point y, numerics::StreamEngine& engine) {
    const auto times = path.partition().times();
    const double t = path.partition().total();
    const std::size_t d = path.dimension();
    const std::size_t last = times.size() - 1;
    double log_density = 0.0;
    for (std::size_t i = 1; i < last; ++i) {
        const double remaining = t - times[i - 1];
        const double dt = times[i] - times[i - 1];
        const double variance = dt * (t - times[i]) / remaining;
        const double sd = std::sqrt(variance);
        const auto prev = path.node(i - 1);
        auto cur = path.mutable_node(i);
        double sq = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            const double mean = prev[k] + (y[k] - prev[k]) * (dt / remaining);
            const double z = engine.normal();
            cur[k] = mean + sd * z;
            sq += z * z;
        }
        log_density += -0.5 * static_cast<double>(d) * std::log(kTwoPi * variance) - 0.5 * sq;
    }
    return log_density;
}

PiecewisePath endpoint_path(const TimePartition& partition, Point x, Point y) {
    const std::size_t d = x.size();
    std::vector<double> coords(partition.times().size() * d, 0.0);
    std::copy(x.begin(), x.end(), coords.begin());
    std::copy(y.begin(), y.end(), coords.end() - static_cast<std::ptrdiff_t>(d));
    return PiecewisePath(partition, d, std::move(coords));
}

// log of prod_i (2 pi dt_i)^{-d/2}.
double log_measure_density(const TimePartition& partition, std::size_t d) {
    double log_density = 0.0;
    for (std::size_t i = 0; i < partition.segments(); ++i) {
        log_density += -0.5 * static_cast<double>(d) * std::log(kTwoPi * partition.increment(i));
    }
    return log_density;
}

template <typename WeightFn>
McEstimate bridge_sampler(Point x, Point y, const TimePartition& partition, std::int64_t samples,
                          const numerics::RandomStream& stream, WeightFn&& weight) {
    require_same_dimension(x, y);
    if (samples < 100) {
        throw DomainError("Monte Carlo needs at least 100 samples");
    }
    if (partition.segments() < 2) {
        throw DomainError("the random-walk representation needs N >= 2 segments");
    }
    constexpr std::int64_t chunk = 1 << 14;
    const std::int64_t chunks = (samples + chunk - 1) / chunk;
    WeightMoments total;
    double max_weight = 0.0;
    PiecewisePath path = endpoint_path(partition, x, y);
    for (std::int64_t c = 0; c < chunks; ++c) {
        numerics::StreamEngine engine(stream.substream(static_cast<std::uint64_t>(c)));
        const std::int64_t end = std::min(samples, (c + 1) * chunk);
        for (std::int64_t i = c * chunk; i < end; ++i) {
            const double log_q = sample_bridge(path, y, engine);
            const double w = weight(path, log_q);
            if (!std::isfinite(w)) {
                throw NumericalError("non-finite path weight");
            }
            total.add(w);
            max_weight = std::max(max_weight, std::abs(w));
        }
    }
    const auto n = static_cast<double>(samples);
    const double sum = total.sum.value();
    const double sum_sq = total.sum_sq.value();
    McEstimate out;
    out.samples = samples;
    out.stream = stream;
    out.mean = sum / n;
    const double variance = std::max(0.0, (sum_sq - n * out.mean * out.mean) / (n - 1.0));
    // Weights that are constant up to rounding have a sample variance far below
    // the rounding error of the mean itself; floor the error at a few ulps.
    const double rounding_floor = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(out.mean);
    out.std_error = std::max(std::sqrt(variance / n), rounding_floor);
    out.effective_sample_size = sum_sq > 0.0 ? sum * sum / sum_sq : 0.0;
    return out;
}

} // namespace

void HeatKernelParams::validate() const {
    if (dimension < 1) {
        throw DomainError("heat kernel dimension must be >= 1");
    }
    if (!(time > 0.0) || !std::isfinite(time)) {
        throw DomainError("heat kernel time must be positive");
    }
}

double heat_kernel(const HeatKernelParams& params, Point x, Point y) {
    params.validate();
    if (x.size() != static_cast<std::size_t>(params.dimension) || y.size() != x.size()) {
        throw DomainError("point dimension does not match the kernel dimension");
    }
    const double t = params.time;
    return std::pow(kTwoPi * t, -0.5 * params.dimension) * std::exp(-squared_distance(x, y) / (2.0 * t));
}

double heat_kernel(double t, double x, double y) {
    return heat_kernel(HeatKernelParams{1, t}, Point(&x, 1), Point(&y, 1));
}

double heat_solution(const numerics::RealFunction& phi0, const HeatKernelParams& params, double y,
                     const numerics::QuadratureSpec& quad) {
    params.validate();
    if (params.dimension != 1) {
        throw DomainError("heat_solution quadrature is implemented for d = 1 only");
    }
    const double t = params.time;
    return numerics::integrate([&](double x) { return heat_kernel(t, x, y) * phi0(x); }, quad);
}

double compose_kernels(const TimePartition& partition, double x, double y, const NestedQuadrature& quad) {
    const std::size_t segments = partition.segments();
    if (segments == 1) {
        return heat_kernel(partition.total(), x, y);
    }
    if (segments > kMaxNestedSegments) {
        throw DomainError("compose_kernels supports at most " + std::to_string(kMaxNestedSegments) +
                          " segments; use the Monte Carlo estimator (rw_representation_mc) for finer partitions");
    }
    if (quad.nodes_per_axis < 2 || !(quad.box_sigmas > 0.0)) {
        throw DomainError("nested quadrature needs >= 2 nodes and a positive box");
    }
    const auto times = partition.times();
    const double t = partition.total();
    const auto& ref = numerics::gauss_legendre_rule(quad.nodes_per_axis);

    // Per-axis nodes and weights on the bridge marginal box.
    std::vector<std::vector<double>> nodes(segments - 1);
    std::vector<std::vector<double>> weights(segments - 1);
    for (std::size_t i = 1; i < segments; ++i) {
        const double s = times[i];
        const double mean = x + (y - x) * (s / t);
        const double half = quad.box_sigmas * std::sqrt(s * (t - s) / t);
        for (std::size_t j = 0; j < ref.nodes.size(); ++j) {
            nodes[i - 1].push_back(mean + half * ref.nodes[j]);
            weights[i - 1].push_back(half * ref.weights[j]);
        }
    }

    // Depth-first product of transition kernels.
    auto recurse = [&](auto&& self, std::size_t axis, double previous) -> double {
        const double dt = partition.increment(axis);
        if (axis == segments - 1) {
            return heat_kernel(dt, previous, y);
        }
        double sum = 0.0;
        const auto& xs = nodes[axis];
        const auto& ws = weights[axis];
        for (std::size_t j = 0; j < xs.size(); ++j) {
            sum += ws[j] * heat_kernel(dt, previous, xs[j]) * self(self, axis + 1, xs[j]);
        }
        return sum;
    };
    return recurse(recurse, 0, x);
}

PiecewisePath::PiecewisePath(TimePartition partition, std::size_t dimension, std::vector<double> coordinates)
    : partition_(std::move(partition)), dimension_(dimension), coordinates_(std::move(coordinates)) {
    if (dimension_ == 0) {
        throw DomainError("path dimension must be >= 1");
    }
    if (coordinates_.size() != partition_.times().size() * dimension_) {
        throw DomainError("path needs one node per partition time");
    }
}

PiecewisePath PiecewisePath::scalar(TimePartition partition, std::vector<double> positions) {
    return PiecewisePath(std::move(partition), 1, std::move(positions));
}

PiecewisePath PiecewisePath::straight_line(TimePartition partition, Point x, Point y) {
    require_same_dimension(x, y);
    const auto times = partition.times();
    const double t = partition.total();
    std::vector<double> coords;
    coords.reserve(times.size() * x.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double frac = i + 1 == times.size() ? 1.0 : times[i] / t;
        for (std::size_t k = 0; k < x.size(); ++k) {
            coords.push_back(i + 1 == times.size() ? y[k] : x[k] + (y[k] - x[k]) * frac);
        }
    }
    return PiecewisePath(std::move(partition), x.size(), std::move(coords));
}

double PiecewisePath::total_variation() const {
    double sum = 0.0;
    for (std::size_t i = 1; i < node_count(); ++i) {
        sum += std::sqrt(squared_distance(node(i), node(i - 1)));
    }
    return sum;
}

double kinetic_action(const PiecewisePath& path) {
    double sum = 0.0;
    for (std::size_t i = 1; i < path.node_count(); ++i) {
        const double dt = path.partition().increment(i - 1);
        if (!(dt > 0.0)) {
            throw DomainError("kinetic action needs positive time increments");
        }
        sum += squared_distance(path.node(i), path.node(i - 1)) / dt;
    }
    return 0.5 * sum;
}

double length_action(const PiecewisePath& path, double beta_tilde) { return beta_tilde * path.total_variation(); }

ActionFunctional ActionFunctional::kinetic() {
    return ActionFunctional{Kind::kinetic, 0.0, "kinetic", [](const PiecewisePath& p) { return kinetic_action(p); }};
}

ActionFunctional ActionFunctional::length(double beta_tilde) {
    return ActionFunctional{Kind::length, beta_tilde, "length",
                            [beta_tilde](const PiecewisePath& p) { return length_action(p, beta_tilde); }};
}

ActionFunctional ActionFunctional::custom(std::string name, std::function<double(const PiecewisePath&)> evaluate) {
    return ActionFunctional{Kind::custom, 0.0, std::move(name), std::move(evaluate)};
}

McEstimate rw_representation_mc(Point x, Point y, const TimePartition& partition, std::int64_t samples,
                                 const numerics::RandomStream& stream) {
    require_same_dimension(x, y);
    const double log_measure = log_measure_density(partition, x.size());
    return bridge_sampler(x, y, partition, samples, stream, [&](const PiecewisePath& path, double log_q) {
        return std::exp(log_measure - kinetic_action(path) - log_q);
    });
}

McEstimate bridge_reweighted_mc(const ActionFunctional& action, Point x, Point y, const TimePartition& partition,
                                std::int64_t samples, const numerics::RandomStream& stream) {
    require_same_dimension(x, y);
    const double kernel =
        heat_kernel(HeatKernelParams{static_cast<int>(x.size()), partition.total()}, x, y);
    return bridge_sampler(x, y, partition, samples, stream, [&](const PiecewisePath& path, double) {
        return kernel * std::exp(kinetic_action(path) - action(path));
    });
}

namespace {

double quadrature_kernel(const ActionFunctional& action, double x, double y, const TimePartition& partition,
                         int nodes_per_panel, double half_width) {
    const std::size_t segments = partition.segments();
    const auto times = partition.times();
    const double t = partition.total();
    const double measure = std::exp(log_measure_density(partition, 1));
    PiecewisePath path = endpoint_path(partition, Point(&x, 1), Point(&y, 1));
    if (segments == 1) {
        return measure * std::exp(-action(path));
    }
    const auto& ref = numerics::gauss_legendre_rule(nodes_per_panel);
    // Two panels per axis meeting at the straight-line position, so a kink of
    // |x_i - x_{i-1}| type actions on the symmetric path sits on a panel edge.
    std::vector<std::vector<double>> nodes(segments - 1);
    std::vector<std::vector<double>> weights(segments - 1);
    for (std::size_t i = 1; i < segments; ++i) {
        const double centre = x + (y - x) * (times[i] / t);
        for (int side : {-1, 1}) {
            const double mid = centre + side * 0.5 * half_width;
            for (std::size_t j = 0; j < ref.nodes.size(); ++j) {
                nodes[i - 1].push_back(mid + 0.5 * half_width * ref.nodes[j]);
                weights[i - 1].push_back(0.5 * half_width * ref.weights[j]);
            }
        }
    }
    auto recurse = [&](auto&& self, std::size_t axis) -> double {
        if (axis == segments - 1) {
            const double s = action(path);
            const double v = std::exp(-s);
            if (!std::isfinite(s)) {
                throw NumericalError("action is not finite on a quadrature path");
            }
            return v;
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < nodes[axis].size(); ++j) {
            path.mutable_node(axis + 1)[0] = nodes[axis][j];
            sum += weights[axis][j] * self(self, axis + 1);
        }
        return sum;
    };
    return measure * recurse(recurse, 0);
}

bool stable(double a, double b, double tolerance) {
    const double scale = std::max(std::abs(a), std::abs(b));
    return std::abs(a - b) <= tolerance * scale;
}

} // namespace

KernelEstimate generalized_kernel(const ActionFunctional& action, Point x, Point y, const TimePartition& partition,
                                  KernelMethod method, const KernelBudget& budget) {
    require_same_dimension(x, y);
    if (!action.evaluate) {
        throw DomainError("action functional has no evaluator");
    }
    constexpr double tolerance = 1e-3;
    KernelEstimate out;
    out.method = method;

    if (method == KernelMethod::quadrature) {
        if (x.size() != 1) {
            throw DomainError("quadrature evaluation of H_t^N is implemented for d = 1 only");
        }
        if (partition.segments() > kMaxNestedSegments) {
            throw DomainError("quadrature evaluation supports at most " + std::to_string(kMaxNestedSegments) +
                              " segments; use the Monte Carlo method");
        }
        const double scale = std::sqrt(partition.total());
        int nodes = budget.nodes_per_panel;
        double width = budget.half_width * scale;
        std::vector<double> history;
        for (int k = 0; k <= budget.max_doublings; ++k) {
            const double per_axis = 2.0 * nodes;
            const double evaluations = std::pow(per_axis, static_cast<double>(partition.segments() - 1));
            if (evaluations > static_cast<double>(budget.max_evaluations)) {
                break;
            }
            history.push_back(quadrature_kernel(action, x[0], y[0], partition, nodes, width));
            out.doublings = k;
            const std::size_t h = history.size();
            if (h >= 3 && stable(history[h - 3], history[h - 2], tolerance) &&
                stable(history[h - 2], history[h - 1], tolerance)) {
                out.value = history.back();
                return out;
            }
            nodes *= 2;
            width *= 2.0;
        }
        std::ostringstream os;
        os.precision(6);
        os << "H_t^N did not stabilise under budget doubling (action '" << action.name << "'; estimates";
        for (double v : history) {
            os << ' ' << v;
        }
        os << "); the action is likely non-integrable under D_t^N";
        throw NumericalError(os.str());
    }

    std::int64_t samples = budget.samples;
    std::vector<McEstimate> history;
    for (int k = 0; k <= budget.max_doublings; ++k) {
        const auto estimate = bridge_reweighted_mc(action, x, y, partition, samples,
                                                   budget.stream.substream(static_cast<std::uint64_t>(k)));
        if (estimate.effective_sample_size < 0.01 * static_cast<double>(samples)) {
            throw NumericalError("path weights are degenerate (effective sample size " +
                                 std::to_string(estimate.effective_sample_size) + " of " + std::to_string(samples) +
                                 "); the action is likely non-integrable or too far from kinetic");
        }
        history.push_back(estimate);
        out.doublings = k;
        const std::size_t h = history.size();
        auto close = [&](const McEstimate& a, const McEstimate& b) {
            const double noise = 4.0 * std::hypot(a.std_error, b.std_error);
            return stable(a.mean, b.mean, tolerance) || std::abs(a.mean - b.mean) <= noise;
        };
        if (h >= 3 && close(history[h - 3], history[h - 2]) && close(history[h - 2], history[h - 1])) {
            out.value = history.back().mean;
            out.std_error = history.back().std_error;
            return out;
        }
        samples *= 2;
    }
    throw NumericalError("Monte Carlo estimate of H_t^N did not stabilise under budget doubling (action '" +
                         action.name + "')");
}

double qp_brownian_density(const quasiperiodic::QuasiperiodicSignal& signal, const DiffusionParams& diff,
                           double tau) {
    if (!(tau > 0.0)) {
        throw DomainError("qp_brownian_density needs tau > 0 (singular at tau = 0)");
    }
    if (!(diff.D > 0.0)) {
        throw DomainError("diffusion constant must be positive");
    }
    const double x = quasiperiodic::signal_eval(signal, tau);
    const double spread = 4.0 * diff.D * tau;
    return std::exp(-x * x / spread) / std::sqrt(std::numbers::pi * spread);
}

} // namespace qpwalk::heat
