#include "qpwalk/error.hpp"
#include "qpwalk/numerics.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

using namespace qpwalk;
using namespace qpwalk::numerics;

TEST_CASE("integrate: Gauss-Legendre on polynomials") {
    const QuadratureSpec spec{QuadratureRule::gauss_legendre, 8, 0.0, 1.0};
    CHECK(integrate([](double x) { return x * x; }, spec) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

    // Exact up to degree 2n - 1 for n = 3 .. 6 nodes.
    for (int nodes = 3; nodes <= 6; ++nodes) {
        for (int degree = 0; degree <= 5; ++degree) {
            const QuadratureSpec s{QuadratureRule::gauss_legendre, nodes, -0.5, 2.0};
            const double exact = (std::pow(2.0, degree + 1) - std::pow(-0.5, degree + 1)) / (degree + 1);
            CHECK(integrate([&](double x) { return std::pow(x, degree); }, s) ==
                  doctest::Approx(exact).epsilon(1e-13));
        }
    }
}

TEST_CASE("integrate: constants and periodic trapezoid") {
    for (auto rule : {QuadratureRule::gauss_legendre, QuadratureRule::trapezoid_periodic}) {
        const QuadratureSpec spec{rule, 7, -3.0, 4.5};
        CHECK(integrate([](double) { return 1.0; }, spec) == doctest::Approx(7.5).epsilon(1e-14));
    }
    const QuadratureSpec periodic{QuadratureRule::trapezoid_periodic, 64, -std::numbers::pi, std::numbers::pi};
    CHECK(integrate([](double k) { return std::cos(k) * std::cos(k); }, periodic) ==
          doctest::Approx(std::numbers::pi).epsilon(1e-14));
}

TEST_CASE("integrate: trapezoid converges spectrally on smooth periodic integrands") {
    // exp(cos k) over a period equals 2 pi I_0(1).
    const double exact = 2.0 * std::numbers::pi * std::cyl_bessel_i(0.0, 1.0);
    double previous_error = std::numeric_limits<double>::infinity();
    for (int nodes = 2; nodes <= 16; nodes *= 2) {
        const QuadratureSpec spec{QuadratureRule::trapezoid_periodic, nodes, -std::numbers::pi, std::numbers::pi};
        const double error = std::abs(integrate([](double k) { return std::exp(std::cos(k)); }, spec) - exact);
        if (previous_error > 1e-13) {
            CHECK(error <= previous_error / 10.0);
        }
        previous_error = error;
    }
    CHECK(previous_error < 1e-13);
}

TEST_CASE("integrate: errors") {
    CHECK_THROWS_AS(integrate([](double) { return 1.0; }, QuadratureSpec{QuadratureRule::gauss_legendre, 1, 0, 1}),
                    DomainError);
    CHECK_THROWS_AS(integrate([](double) { return 1.0; }, QuadratureSpec{QuadratureRule::gauss_legendre, 4, 1, 0}),
                    DomainError);
    try {
        integrate([](double x) { return 1.0 / x; }, QuadratureSpec{QuadratureRule::trapezoid_periodic, 4, 0, 1});
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("node 0") != std::string::npos);
    }
}

TEST_CASE("gauss_legendre_rule: symmetric nodes, weights sum to 2") {
    for (int n : {2, 5, 16, 64, 257}) {
        const auto& rule = gauss_legendre_rule(n);
        double sum = 0.0;
        for (int i = 0; i < n; ++i) {
            sum += rule.weights[i];
            CHECK(rule.nodes[i] == doctest::Approx(-rule.nodes[n - 1 - i]).epsilon(1e-15));
        }
        CHECK(sum == doctest::Approx(2.0).epsilon(1e-13));
    }
}

TEST_CASE("central_difference") {
    CHECK(std::abs(central_difference([](double x) { return x * x; }, 1.0, 1e-4) - 2.0) < 1e-7);
    CHECK(central_difference([](double) { return 3.0; }, 0.4, 1e-3) == 0.0);
    CHECK(std::abs(central_difference([](double x) { return std::exp(x); }, 0.0, 1e-4) - 1.0) < 1e-8);
    CHECK_THROWS_AS(central_difference([](double x) { return x; }, 0.0, 0.0), DomainError);
    CHECK(default_step(0.3) == 1e-5);
    CHECK(default_step(-200.0) == doctest::Approx(2e-3));
}

TEST_CASE("random streams: determinism") {
    StreamEngine a(make_stream(42, 7));
    StreamEngine b(make_stream(42, 7));
    for (int i = 0; i < 1000; ++i) {
        REQUIRE(a.next_u64() == b.next_u64());
    }
    StreamEngine c(make_stream(42, 7));
    StreamEngine d(make_stream(42, 7));
    for (int i = 0; i < 1000; ++i) {
        REQUIRE(c.normal() == d.normal());
    }
    CHECK(make_stream(1, 2).substream(3) == make_stream(1, 2).substream(3));
    CHECK(!(make_stream(1, 2).substream(3) == make_stream(1, 3).substream(3)));
}

TEST_CASE("random streams: distinct indices are uncorrelated") {
    constexpr int n = 100000;
    StreamEngine a(make_stream(2024, 0));
    StreamEngine b(make_stream(2024, 1));
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    for (int i = 0; i < n; ++i) {
        const double u = a.uniform();
        const double v = b.uniform();
        sa += u;
        sb += v;
        saa += u * u;
        sbb += v * v;
        sab += u * v;
    }
    const double cov = sab / n - (sa / n) * (sb / n);
    const double corr = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
    CHECK(std::abs(corr) < 0.02);
}

TEST_CASE("random streams: fair coin and uniform range") {
    StreamEngine engine(make_stream(99, 0));
    constexpr int n = 1000000;
    int heads = 0;
    for (int i = 0; i < n; ++i) {
        heads += engine.coin() ? 1 : 0;
    }
    // 3 sigma of Binomial(1e6, 1/2) is 0.0015.
    CHECK(std::abs(heads / static_cast<double>(n) - 0.5) < 0.002);
    for (int i = 0; i < 10000; ++i) {
        const double u = engine.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("random streams: normal moments") {
    StreamEngine engine(make_stream(5, 5));
    constexpr int n = 200000;
    double s = 0, ss = 0;
    for (int i = 0; i < n; ++i) {
        const double z = engine.normal();
        s += z;
        ss += z * z;
    }
    CHECK(std::abs(s / n) < 4.0 / std::sqrt(n));
    CHECK(std::abs(ss / n - 1.0) < 4.0 * std::sqrt(2.0 / n));
}
