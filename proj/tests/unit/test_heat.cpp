#include "oracles.hpp"

#include "qpwalk/error.hpp"
#include "qpwalk/heat.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace qpwalk;
using namespace qpwalk::heat;
using quasiperiodic::fibonacci_word;
using quasiperiodic::quasiperiodic_partition;
using quasiperiodic::uniform_partition;

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

Point pt(const double& v) { return Point(&v, 1); }

} // namespace

TEST_CASE("heat_kernel: closed-form values") {
    CHECK(heat_kernel(1.0, 0.3, 0.3) == doctest::Approx(0.3989423).epsilon(1e-7));
    CHECK(heat_kernel(1.0, 0.0, 1.0) == doctest::Approx(0.2419707).epsilon(1e-7));
    const std::vector<double> origin{0.0, 0.0};
    CHECK(heat_kernel(HeatKernelParams{2, 0.5}, origin, origin) == doctest::Approx(1.0 / std::numbers::pi));
    CHECK(heat_kernel(1.0, 0.0, 1.0) == doctest::Approx(oracle::gaussian(1.0, 0.0, 1.0)).epsilon(1e-15));
    CHECK_THROWS_AS(heat_kernel(0.0, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(heat_kernel(-1.0, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(heat_kernel(HeatKernelParams{2, 1.0}, origin, Point(origin).first(1)), DomainError);
}

TEST_CASE("heat_kernel: symmetric and normalized") {
    for (double t : {0.1, 1.0, 10.0}) {
        for (double x : {-1.5, 0.0, 2.25}) {
            for (double y : {-0.5, 3.0}) {
                REQUIRE(heat_kernel(t, x, y) == heat_kernel(t, y, x));
                REQUIRE(heat_kernel(t, x, y) > 0.0);
            }
            const double half = 12.0 * std::sqrt(t);
            const numerics::QuadratureSpec spec{numerics::QuadratureRule::gauss_legendre, 200, x - half, x + half};
            CHECK(std::abs(numerics::integrate([&](double y) { return heat_kernel(t, x, y); }, spec) - 1.0) < 1e-8);
        }
    }
}

TEST_CASE("heat_solution") {
    const HeatKernelParams params{1, 1.0};
    // Gaussian initial profile of variance s2 evolves into variance s2 + t.
    const double s2 = 0.01;
    const numerics::QuadratureSpec narrow{numerics::QuadratureRule::gauss_legendre, 200, -2.0, 2.0};
    for (double y : {0.0, 0.7, -1.9}) {
        const double value = heat_solution([&](double x) { return oracle::gaussian(x, 0.0, s2); }, params, y, narrow);
        CHECK(std::abs(value - oracle::gaussian(y, 0.0, s2 + 1.0)) < 1e-6);
    }
    const numerics::QuadratureSpec wide{numerics::QuadratureRule::gauss_legendre, 200, -15.0, 15.0};
    CHECK(std::abs(heat_solution([](double) { return 1.0; }, params, 0.4, wide) - 1.0) < 1e-8);
    CHECK(std::abs(heat_solution([](double x) { return x; }, params, 0.4, wide) - 0.4) < 1e-8);
    CHECK_THROWS_AS(heat_solution([](double) { return 1.0; }, HeatKernelParams{1, 0.0}, 0.0, wide), DomainError);
    CHECK_THROWS_AS(heat_solution([](double) { return 1.0; }, HeatKernelParams{2, 1.0}, 0.0, wide), DomainError);
}

TEST_CASE("compose_kernels: semigroup over uniform and quasiperiodic partitions") {
    const double target = heat_kernel(1.0, 0.0, 1.0);
    CHECK(std::abs(compose_kernels(uniform_partition(1.0, 2), 0.0, 1.0) - 0.2419707) < 1e-6);
    CHECK(std::abs(compose_kernels(quasiperiodic_partition(1.0, 2, fibonacci_word(2)), 0.0, 1.0) - target) < 1e-6);
    CHECK(compose_kernels(uniform_partition(1.0, 1), 0.0, 1.0) == target);
    CHECK_THROWS_AS(compose_kernels(uniform_partition(1.0, 5), 0.0, 1.0), DomainError);
}

TEST_CASE("compose_kernels: any positive partition reproduces K_t") {
    numerics::StreamEngine engine(numerics::make_stream(11, 0));
    for (int trial = 0; trial < 12; ++trial) {
        const int segments = 2 + trial % 3;
        std::vector<double> increments(static_cast<std::size_t>(segments));
        for (auto& d : increments) {
            d = 0.05 + engine.uniform();
        }
        const auto partition = quasiperiodic::partition_from_increments(increments);
        const double x = 2.0 * engine.uniform() - 1.0;
        const double y = 3.0 * engine.uniform() - 1.5;
        const double target = heat_kernel(partition.total(), x, y);
        REQUIRE(std::abs(compose_kernels(partition, x, y, NestedQuadrature{48, 8.0}) - target) < 1e-8);
    }
}

TEST_CASE("kinetic_action") {
    const double y = 1.7;
    const double t = 2.0;
    const double zero = 0.0;
    for (int n : {1, 3, 8}) {
        const auto line = PiecewisePath::straight_line(uniform_partition(t, n), pt(zero), pt(y));
        CHECK(kinetic_action(line) == doctest::Approx(y * y / (2 * t)).epsilon(1e-14));
    }
    CHECK(kinetic_action(PiecewisePath::scalar(uniform_partition(1.0, 3), {0.5, 0.5, 0.5, 0.5})) == 0.0);
    CHECK(kinetic_action(PiecewisePath::scalar(uniform_partition(1.0, 2), {0.0, 1.0, 0.0})) == 2.0);
}

TEST_CASE("kinetic_action: Cauchy-Schwarz lower bound") {
    numerics::StreamEngine engine(numerics::make_stream(21, 0));
    for (int trial = 0; trial < 2000; ++trial) {
        const int n = 1 + static_cast<int>(engine.uniform() * 9);
        std::vector<double> increments(static_cast<std::size_t>(n));
        for (auto& d : increments) {
            d = 0.01 + engine.uniform();
        }
        const auto partition = quasiperiodic::partition_from_increments(increments);
        std::vector<double> nodes(static_cast<std::size_t>(n) + 1);
        for (auto& v : nodes) {
            v = 4.0 * engine.normal();
        }
        const double span = nodes.back() - nodes.front();
        const auto path = PiecewisePath::scalar(partition, nodes);
        REQUIRE(kinetic_action(path) >= span * span / (2.0 * partition.total()) * (1.0 - 1e-12));
    }
}

TEST_CASE("length_action") {
    const auto monotone = PiecewisePath::scalar(uniform_partition(1.0, 2), {0.0, 0.4, 1.0});
    CHECK(length_action(monotone, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(length_action(PiecewisePath::scalar(uniform_partition(1.0, 2), {0.0, 1.0, 0.0}), 2.0) == 4.0);
    CHECK(length_action(PiecewisePath::scalar(uniform_partition(1.0, 2), {3.0, 3.0, 3.0}), 2.0) == 0.0);
    // Euclidean segment lengths in two dimensions.
    const auto planar = PiecewisePath(uniform_partition(1.0, 1), 2, {0.0, 0.0, 3.0, 4.0});
    CHECK(length_action(planar, 0.5) == 2.5);
}

TEST_CASE("rw_representation_mc: closed-form targets") {
    const double zero = 0.0;
    const double one = 1.0;
    const auto stream = numerics::make_stream(1234, 0);

    auto check_bracket = [](const McEstimate& est, double target) {
        CHECK(std::abs(est.mean - target) <= 4.0 * est.std_error);
        CHECK(est.std_error > 0.0);
    };
    check_bracket(rw_representation_mc(pt(zero), pt(one), uniform_partition(1.0, 4), 100000, stream), heat_kernel(1.0, zero, one));
    check_bracket(rw_representation_mc(pt(zero), pt(one), quasiperiodic_partition(1.0, 5, fibonacci_word(4)), 100000,
                                       stream),
                  heat_kernel(1.0, 0.0, 1.0));
    check_bracket(rw_representation_mc(pt(zero), pt(zero), uniform_partition(1.0, 2), 100000, stream),
                  kInvSqrt2Pi);

    const std::vector<double> x{0.0, 1.0, -1.0};
    const std::vector<double> y{0.5, 0.0, 2.0};
    const auto est = rw_representation_mc(x, y, uniform_partition(0.7, 6), 1000, stream);
    check_bracket(est, heat_kernel(HeatKernelParams{3, 0.7}, x, y));

    CHECK_THROWS_AS(rw_representation_mc(pt(zero), pt(one), uniform_partition(1.0, 4), 99, stream), DomainError);
    CHECK_THROWS_AS(rw_representation_mc(pt(zero), pt(one), uniform_partition(1.0, 1), 1000, stream), DomainError);
}

namespace {

// Bridge marginal mean and covariance of the interior nodes, d = 1.
struct BridgeMoments {
    std::vector<double> mean;
    std::vector<std::vector<double>> cov;
};

BridgeMoments bridge_moments(const TimePartition& partition, double x, double y) {
    const auto times = partition.times();
    const double t = partition.total();
    BridgeMoments m;
    const std::size_t k = times.size() - 2;
    m.cov.assign(k, std::vector<double>(k));
    for (std::size_t i = 0; i < k; ++i) {
        const double s = times[i + 1];
        m.mean.push_back(x + (y - x) * s / t);
        for (std::size_t j = 0; j < k; ++j) {
            const double u = times[j + 1];
            m.cov[i][j] = std::min(s, u) * (t - std::max(s, u)) / t;
        }
    }
    return m;
}

} // namespace

TEST_CASE("bridge_reweighted_mc is unbiased: 95% of repetitions bracket the exact value") {
    // S = S_kin + c * sum_i x_i has H = K_t * exp(-c sum mu + c^2/2 1'C1).
    const double c = 0.3;
    const double x = 0.0;
    const double y = 1.0;
    const auto partition = quasiperiodic_partition(1.0, 5, fibonacci_word(4));
    const auto moments = bridge_moments(partition, x, y);
    double sum_mu = 0.0;
    double quad_form = 0.0;
    for (std::size_t i = 0; i < moments.mean.size(); ++i) {
        sum_mu += moments.mean[i];
        for (std::size_t j = 0; j < moments.mean.size(); ++j) {
            quad_form += moments.cov[i][j];
        }
    }
    const double exact = heat_kernel(1.0, x, y) * std::exp(-c * sum_mu + 0.5 * c * c * quad_form);
    const auto action = ActionFunctional::custom("kinetic+linear", [c](const PiecewisePath& p) {
        double s = 0.0;
        for (std::size_t i = 1; i + 1 < p.node_count(); ++i) {
            s += p.node(i)[0];
        }
        return kinetic_action(p) + c * s;
    });
    int bracketed = 0;
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
        const auto est = bridge_reweighted_mc(action, pt(x), pt(y), partition, 2000, numerics::make_stream(555, rep));
        bracketed += std::abs(est.mean - exact) <= 4.0 * est.std_error ? 1 : 0;
    }
    CHECK(bracketed >= 95);
}

TEST_CASE("generalized_kernel: quadrature") {
    const double zero = 0.0;
    const double one = 1.0;
    const auto two = uniform_partition(1.0, 2);

    const auto kinetic = generalized_kernel(ActionFunctional::kinetic(), pt(zero), pt(one), two, KernelMethod::quadrature);
    CHECK(std::abs(kinetic.value - 0.2419707) < 1e-5);

    // (2 pi 0.5)^{-1} int exp(-2|x1|) dx1 = 1 / pi, and the same integral by an
    // independent one-dimensional rule.
    const auto length = generalized_kernel(ActionFunctional::length(1.0), pt(zero), pt(zero), two, KernelMethod::quadrature);
    const numerics::QuadratureSpec half_line{numerics::QuadratureRule::gauss_legendre, 120, 0.0, 40.0};
    const double direct = 2.0 * numerics::integrate([](double u) { return std::exp(-2.0 * u); }, half_line) /
                          (2.0 * std::numbers::pi * 0.5);
    CHECK(direct == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-12));
    CHECK(length.value == doctest::Approx(direct).epsilon(1e-6));

    const auto zero_action = ActionFunctional::custom("zero", [](const PiecewisePath&) { return 0.0; });
    CHECK_THROWS_AS(generalized_kernel(zero_action, pt(zero), pt(one), two, KernelMethod::quadrature), NumericalError);

    // Kinetic action on a 4-segment quasiperiodic partition.
    const auto qp4 = quasiperiodic_partition(1.0, 4, fibonacci_word(4));
    const auto k4 = generalized_kernel(ActionFunctional::kinetic(), pt(zero), pt(one), qp4, KernelMethod::quadrature);
    CHECK(std::abs(k4.value - heat_kernel(1.0, 0.0, 1.0)) < 1e-5);
}

TEST_CASE("generalized_kernel: length action depends on the partition") {
    const double zero = 0.0;
    const auto uniform = generalized_kernel(ActionFunctional::length(1.0), pt(zero), pt(zero), uniform_partition(1.0, 2),
                                            KernelMethod::quadrature);
    const auto qp = generalized_kernel(ActionFunctional::length(1.0), pt(zero), pt(zero),
                                       quasiperiodic_partition(1.0, 2, fibonacci_word(2)), KernelMethod::quadrature);
    // Only the measure prefactor changes: (2 pi)^{-1} (dt1 dt2)^{-1/2}.
    const double phi = std::numbers::phi;
    const double dt1 = phi / (phi + 1.0);
    const double dt2 = 1.0 / (phi + 1.0);
    CHECK(qp.value == doctest::Approx(1.0 / (2.0 * std::numbers::pi * std::sqrt(dt1 * dt2))).epsilon(1e-6));
    CHECK(qp.value != doctest::Approx(uniform.value).epsilon(1e-3));
}

TEST_CASE("generalized_kernel: Monte Carlo") {
    const double zero = 0.0;
    const double one = 1.0;
    KernelBudget budget;
    budget.samples = 20000;
    budget.stream = numerics::make_stream(8, 8);
    const auto est = generalized_kernel(ActionFunctional::kinetic(), pt(zero), pt(one), uniform_partition(1.0, 8),
                                        KernelMethod::monte_carlo, budget);
    CHECK(std::abs(est.value - heat_kernel(1.0, 0.0, 1.0)) <= 4.0 * est.std_error);

    const auto zero_action = ActionFunctional::custom("zero", [](const PiecewisePath&) { return 0.0; });
    CHECK_THROWS_AS(generalized_kernel(zero_action, pt(zero), pt(one), uniform_partition(1.0, 2),
                                       KernelMethod::monte_carlo, budget),
                    NumericalError);
}

TEST_CASE("qp_brownian_density") {
    const DiffusionParams diff{0.5};
    // alpha = 1, tau = 0.5: x = -2, W = pi^{-1/2} e^{-4}.
    CHECK(qp_brownian_density({1.0}, diff, 0.5) ==
          doctest::Approx(std::exp(-4.0) / std::sqrt(std::numbers::pi)).epsilon(1e-14));

    const oracle::Float50 phi50 = (1 + boost::multiprecision::sqrt(oracle::Float50(5))) / 2;
    const oracle::Float50 tau("0.5");
    const oracle::Float50 x = oracle::signal_extended(phi50, tau);
    const oracle::Float50 w = boost::multiprecision::exp(-x * x / (4 * oracle::Float50("0.5") * tau)) /
                              boost::multiprecision::sqrt(4 * oracle::pi50() * oracle::Float50("0.5") * tau);
    CHECK(std::abs(qp_brownian_density({std::numbers::phi}, diff, 0.5) - static_cast<double>(w)) < 1e-12);

    for (double tau_value : {0.01, 0.3, 1.0, 17.0, 1e4}) {
        const double bound = 1.0 / std::sqrt(4.0 * std::numbers::pi * diff.D * tau_value);
        const double value = qp_brownian_density({std::numbers::phi}, diff, tau_value);
        CHECK(value > 0.0);
        CHECK(value <= bound);
    }
    CHECK_THROWS_AS(qp_brownian_density({1.0}, diff, 0.0), DomainError);
    CHECK_THROWS_AS(qp_brownian_density({1.0}, DiffusionParams{0.0}, 1.0), DomainError);
}
