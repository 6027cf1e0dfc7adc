#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "vstates/fourier.hpp"

using namespace vstates;
using std::numbers::pi;

TEST_CASE("eval_map basic values") {
    FourierConformalMap id{1.0, 3, {}};
    CHECK(std::abs(id.eval({0.0, 1.0}) - complex_t(0.0, 1.0)) < 1e-15);

    FourierConformalMap m4{1.0, 4, {0.2}};
    CHECK(m4.eval({1.0, 0.0}).real() == doctest::Approx(1.2).epsilon(1e-15));
    CHECK(std::abs(m4.eval({1.0, 0.0}).imag()) < 1e-15);

    // m = 3, a_1 = 0.1 at w = e^{i pi/3}: w + 0.1 w^{-2}
    FourierConformalMap m3{1.0, 3, {0.1}};
    const complex_t w = std::polar(1.0, pi / 3.0);
    const complex_t got = m3.eval(w);
    CHECK(got.real() == doctest::Approx(0.45).epsilon(1e-14));
    CHECK(got.imag() == doctest::Approx(0.77942286340599477728).epsilon(1e-14));
    // independent direct arithmetic
    CHECK(std::abs(got - (w + 0.1 * std::pow(w, -2))) < 1e-14);
}

TEST_CASE("eval_map rejects off-circle input") {
    FourierConformalMap m{1.0, 3, {0.1}};
    CHECK_THROWS_AS(m.eval({1.1, 0.0}), std::domain_error);
    CHECK_THROWS_AS(m.deriv({0.5, 0.5}), std::domain_error);
}

TEST_CASE("eval_deriv basic values") {
    FourierConformalMap id{1.0, 3, {}};
    CHECK(std::abs(id.deriv({0.0, -1.0}) - complex_t(1.0, 0.0)) < 1e-15);

    FourierConformalMap m3{1.0, 3, {0.1}};
    CHECK(m3.deriv({1.0, 0.0}).real() == doctest::Approx(0.8).epsilon(1e-15));

    FourierConformalMap inner{0.5, 4, {0.05}};
    const complex_t d = inner.deriv({0.0, 1.0}); // i^{-4} = 1
    CHECK(d.real() == doctest::Approx(0.35).epsilon(1e-14));
    CHECK(std::abs(d.imag()) < 1e-14);
}

TEST_CASE("deriv matches finite difference of eval along the circle") {
    FourierConformalMap m{0.7, 5, {0.02, -0.005, 0.001}};
    const double h = 1e-5;
    for (double th : {0.3, 1.7, 4.0}) {
        const complex_t w = std::polar(1.0, th);
        const complex_t fd =
            (m.eval(std::polar(1.0, th + h)) - m.eval(std::polar(1.0, th - h))) / (2.0 * h);
        // d/dtheta Phi(e^{i theta}) = i w Phi'(w)
        CHECK(std::abs(fd - complex_t(0.0, 1.0) * w * m.deriv(w)) < 1e-7);
    }
}

TEST_CASE("rotation equivariance") {
    FourierConformalMap m{1.0, 4, {0.1, 0.02, -0.01}};
    const complex_t rot = std::polar(1.0, 2.0 * pi / 4.0);
    for (double th : {0.0, 0.9, 2.2, 5.5}) {
        const complex_t w = std::polar(1.0, th);
        CHECK(std::abs(m.eval(rot * w) - rot * m.eval(w)) < 1e-14);
    }
}

TEST_CASE("project_modes basic cases") {
    const int m = 3, N = 4, M = 64;
    SpectralGrid g(N, m, M);

    // samples of e_m = Im(conj(w)^m) = -sin(m theta)
    std::vector<double> em(M), zero(M, 0.0);
    for (int k = 0; k < M; ++k) em[k] = -std::sin(m * g.collocation_angle(k));
    auto beta = project_modes(em, m, N);
    CHECK(beta[0] == doctest::Approx(1.0).epsilon(1e-14));
    for (int n = 1; n < N; ++n) CHECK(std::abs(beta[n]) < 1e-14);

    for (double v : project_modes(zero, m, N)) CHECK(v == 0.0);

    // 2 e_m - 3 e_{2m}
    std::vector<double> mix(M);
    for (int k = 0; k < M; ++k) {
        const double th = g.collocation_angle(k);
        mix[k] = -2.0 * std::sin(m * th) + 3.0 * std::sin(2 * m * th);
    }
    auto bmix = project_modes(mix, m, N);
    CHECK(bmix[0] == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(bmix[1] == doctest::Approx(-3.0).epsilon(1e-13));
    CHECK(std::abs(bmix[2]) < 1e-13);
    CHECK(std::abs(bmix[3]) < 1e-13);
}

TEST_CASE("project_modes refuses undersampled input") {
    std::vector<double> s(47, 0.0); // < 4*N*m = 48
    CHECK_THROWS_AS(project_modes(s, 3, 4), std::domain_error);
}

TEST_CASE("analysis-synthesis round trip") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int m = 3; m <= 6; ++m) {
        for (int N : {1, 8, 32}) {
            std::vector<double> beta(N);
            for (auto& x : beta) x = unif(rng);
            const int M = 4 * N * m;
            auto samples = sample_sine_modes(beta, m, M);
            auto back = project_modes(samples, m, N);
            for (int n = 0; n < N; ++n) CHECK(std::abs(back[n] - beta[n]) < 1e-13);
        }
    }
}

TEST_CASE("univalence guard") {
    FourierConformalMap ok{1.0, 3, {0.1}};
    CHECK(ok.univalent_safe());
    FourierConformalMap bad{1.0, 3, {0.6}}; // (m-1)|a| = 1.2 > 1
    CHECK(!bad.univalent_safe());
    CHECK(ok.coeff_weight_sum() == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("grid node layout") {
    SpectralGrid g(4, 3); // default M = 48
    CHECK(g.nodes == 48);
    // collocation and quadrature nodes are disjoint (half-step shift)
    for (int k = 0; k < g.nodes; ++k)
        CHECK(std::abs(g.collocation_angle(k) - g.quadrature_angle(k)) ==
              doctest::Approx(pi / g.nodes).epsilon(1e-12));
}
