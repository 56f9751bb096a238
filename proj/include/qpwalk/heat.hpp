#pragma once

#include "qpwalk/numerics.hpp"
#include "qpwalk/quasiperiodic.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace qpwalk::heat {

using Point = std::span<const double>;
using quasiperiodic::TimePartition;

struct HeatKernelParams {
    int dimension = 1;
    double time = 1.0;

    void validate() const;
};

/// (2 pi t)^{-d/2} exp(-|x - y|^2 / 2t). x and y must have `dimension` coordinates.
double heat_kernel(const HeatKernelParams& params, Point x, Point y);

/// One-dimensional shorthand.
double heat_kernel(double t, double x, double y);

/// int K_t(x, y) phi0(x) dx over the quadrature interval (d = 1 only).
double heat_solution(const numerics::RealFunction& phi0, const HeatKernelParams& params, double y,
                     const numerics::QuadratureSpec& quad);

/// Per-axis tensor Gauss-Legendre used for Chapman-Kolmogorov composition.
/// Interior node i is integrated over mu_i +- box_sigmas * sigma_i, where
/// (mu_i, sigma_i^2) are the Brownian-bridge marginal mean and variance.
struct NestedQuadrature {
    int nodes_per_axis = 64;
    double box_sigmas = 8.0;
};

inline constexpr std::size_t kMaxNestedSegments = 4;

/// int K_{dt_N}(x_N, x_{N-1}) ... K_{dt_1}(x_1, x_0) dx_1 ... dx_{N-1} over
/// the given partition, d = 1. A single-segment partition returns heat_kernel.
double compose_kernels(const TimePartition& partition, double x, double y, const NestedQuadrature& quad = {});

/// Piecewise-linear path: one node per partition time, each in R^dimension.
class PiecewisePath {
public:
    PiecewisePath(TimePartition partition, std::size_t dimension, std::vector<double> coordinates);

    /// Scalar path (dimension 1).
    static PiecewisePath scalar(TimePartition partition, std::vector<double> positions);
    /// Uniform-velocity path from x to y over the partition.
    static PiecewisePath straight_line(TimePartition partition, Point x, Point y);

    const TimePartition& partition() const { return partition_; }
    std::size_t dimension() const { return dimension_; }
    std::size_t node_count() const { return partition_.times().size(); }
    Point node(std::size_t i) const { return Point(coordinates_).subspan(i * dimension_, dimension_); }
    std::span<double> mutable_node(std::size_t i) {
        return std::span<double>(coordinates_).subspan(i * dimension_, dimension_);
    }

    /// Sum of Euclidean segment lengths.
    double total_variation() const;

private:
    TimePartition partition_;
    std::size_t dimension_;
    std::vector<double> coordinates_;
};

/// (1/2) sum_i |x_i - x_{i-1}|^2 / dt_i.
double kinetic_action(const PiecewisePath& path);

/// beta_tilde * sum_i |x_i - x_{i-1}|.
double length_action(const PiecewisePath& path, double beta_tilde);

/// Evaluable action on piecewise paths.
struct ActionFunctional {
    enum class Kind { kinetic, length, custom };

    Kind kind = Kind::kinetic;
    double beta_tilde = 0.0;
    std::string name = "kinetic";
    std::function<double(const PiecewisePath&)> evaluate;

    static ActionFunctional kinetic();
    static ActionFunctional length(double beta_tilde);
    static ActionFunctional custom(std::string name, std::function<double(const PiecewisePath&)> evaluate);

    double operator()(const PiecewisePath& path) const { return evaluate(path); }
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::int64_t samples = 0;
    /// (sum w)^2 / sum w^2.
    double effective_sample_size = 0.0;
    numerics::RandomStream stream;
};

/// Importance-sampling estimate of the random-walk representation of K_t(x, y):
/// interior nodes are drawn from the Brownian-bridge law, each path weighted by
/// (measure density) * exp(-kinetic action) / (bridge density).
McEstimate rw_representation_mc(Point x, Point y, const TimePartition& partition, std::int64_t samples,
                                 const numerics::RandomStream& stream);

/// Bridge-sampled estimate of H_t^N = K_t(x, y) * E_bridge[exp(S_kin - S)].
McEstimate bridge_reweighted_mc(const ActionFunctional& action, Point x, Point y, const TimePartition& partition,
                                std::int64_t samples, const numerics::RandomStream& stream);

enum class KernelMethod { quadrature, monte_carlo };

struct KernelBudget {
    /// Quadrature: GL nodes per half-axis panel and half-width in units of sqrt(t).
    int nodes_per_panel = 16;
    double half_width = 8.0;
    /// Monte Carlo: initial sample count.
    std::int64_t samples = 100000;
    numerics::RandomStream stream{};
    /// Budget doublings tried before declaring the integral unstable.
    int max_doublings = 5;
    /// Quadrature evaluation cap.
    std::int64_t max_evaluations = 40'000'000;
};

struct KernelEstimate {
    double value = 0.0;
    double std_error = 0.0;
    int doublings = 0;
    KernelMethod method = KernelMethod::quadrature;
};

/// H_t^N(x, y) = int D_t^N omega exp(-S(omega)), with
/// D_t^N = prod_i (2 pi dt_i)^{-d/2} dx_1 ... dx_{N-1}. The budget is doubled
/// until two successive doublings change the estimate by < 1e-3 relative;
/// otherwise NumericalError (non-integrable action).
KernelEstimate generalized_kernel(const ActionFunctional& action, Point x, Point y, const TimePartition& partition,
                                  KernelMethod method, const KernelBudget& budget = {});

struct DiffusionParams {
    double D = 0.5;
};

/// W(x(tau), tau; 0, 0) = (4 pi D tau)^{-1/2} exp(-x(tau)^2 / 4 D tau).
double qp_brownian_density(const quasiperiodic::QuasiperiodicSignal& signal, const DiffusionParams& diff,
                           double tau);

} // namespace qpwalk::heat
