#include <doctest.h>

#include <Eigen/Core>
#include <cmath>

#include "dys/penalty.hpp"
#include "dys/rng.hpp"

using namespace dys;

namespace {

// Random term from the catalog with admissible parameters; gamma is
// drawn so that gamma * rho <= 0.9.
ProxTerm random_term(Rng& rng, double& gamma) {
    const double tau = rng.uniform(0.1, 5.0);
    const double theta = rng.uniform(2.1, 10.0);
    const double scale = rng.uniform(0.2, 3.0);
    ProxTerm term;
    switch (rng.below(4)) {
        case 0: term = ProxTerm::l1(tau, scale); break;
        case 1: term = ProxTerm::mcp(tau, theta, scale); break;
        case 2: term = ProxTerm::scad(tau, theta, scale); break;
        default: term = ProxTerm::ridge(rng.uniform(0.1, 4.0), scale); break;
    }
    const double rho = weak_convexity_modulus(term);
    const double cap = (rho > 0.0) ? 0.9 / rho : 5.0;
    gamma = rng.uniform(0.05, 1.0) * cap;
    return term;
}

}  // namespace

TEST_CASE("prox closed forms match frozen values") {
    // L1: prox fixes the minimizer of |.| at the origin.
    CHECK(prox_scalar(ProxTerm::l1(1.0), 0.5, 0.0) == 0.0);
    // Soft threshold, brute-force value 1.5.
    CHECK(prox_scalar(ProxTerm::l1(1.0), 0.5, 2.0) == doctest::Approx(1.5).epsilon(1e-12));
    // MCP beyond the flat region: large inputs are not penalized.
    CHECK(prox_scalar(ProxTerm::mcp(1.0, 2.0), 0.1, 5.0) == doctest::Approx(5.0).epsilon(1e-12));
    // MCP symmetry at the origin.
    CHECK(prox_scalar(ProxTerm::mcp(1.0, 2.0), 0.1, 0.0) == 0.0);
    // Ridge: z / (1 + gamma c).
    CHECK(prox_scalar(ProxTerm::ridge(1.0), 1.0, 3.0) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("prox oracle reproduces the analytic examples") {
    CHECK(prox_oracle_1d(ProxTerm::l1(1.0), 0.5, 2.0) == doctest::Approx(1.5).epsilon(1e-8));
    CHECK(prox_oracle_1d(ProxTerm::ridge(1.0), 1.0, 3.0) == doctest::Approx(1.5).epsilon(1e-8));
    CHECK(prox_oracle_1d(ProxTerm::mcp(1.0, 2.0), 0.1, 0.0) == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("closed forms agree with the brute-force oracle on random draws") {
    Rng rng(101);
    for (int i = 0; i < 1000; ++i) {
        double gamma = 0.0;
        const ProxTerm term = random_term(rng, gamma);
        const double z = rng.uniform(-10.0, 10.0);
        const double closed = prox_scalar(term, gamma, z);
        const double oracle = prox_oracle_1d(term, gamma, z);
        CAPTURE(static_cast<int>(term.kind));
        CAPTURE(gamma);
        CAPTURE(z);
        CHECK(std::abs(closed - oracle) <= 1e-6);
    }
}

TEST_CASE("prox is Lipschitz with constant 1/(1 - gamma rho)") {
    Rng rng(202);
    for (int i = 0; i < 500; ++i) {
        double gamma = 0.0;
        const ProxTerm term = random_term(rng, gamma);
        const double rho = weak_convexity_modulus(term);
        const double bound = 1.0 / (1.0 - gamma * rho);
        const double z1 = rng.uniform(-10.0, 10.0);
        const double z2 = rng.uniform(-10.0, 10.0);
        const double d = std::abs(prox_scalar(term, gamma, z1) - prox_scalar(term, gamma, z2));
        CHECK(d <= bound * std::abs(z1 - z2) + 1e-10);
    }
}

TEST_CASE("declared weak-convexity modulus makes the penalty convex on a grid") {
    const ProxTerm terms[] = {ProxTerm::zero(),          ProxTerm::l1(1.3, 0.7),
                              ProxTerm::mcp(1.0, 3.0, 2.0), ProxTerm::scad(1.0, 3.7, 0.5),
                              ProxTerm::ridge(2.0),      ProxTerm::box(-1.0, 2.0)};
    for (const auto& term : terms) {
        const double rho = weak_convexity_modulus(term);
        const double delta = 0.05;
        for (int i = -100; i <= 100; ++i) {
            const double t = 0.05 * i;
            const auto aug = [&](double u) { return penalty_value(term, u) + 0.5 * rho * u * u; };
            const double mid = 2.0 * aug(t);
            const double ends = aug(t - delta) + aug(t + delta);
            if (std::isfinite(mid) && std::isfinite(ends)) CHECK(ends >= mid - 1e-10);
        }
    }
    // The modulus is tight for MCP: halving it breaks midpoint convexity
    // inside the concave region.
    const ProxTerm mcp = ProxTerm::mcp(1.0, 2.0);
    const double rho_half = 0.5 * weak_convexity_modulus(mcp);
    const auto aug = [&](double u) { return penalty_value(mcp, u) + 0.5 * rho_half * u * u; };
    CHECK(aug(0.9) + aug(1.1) < 2.0 * aug(1.0));
}

TEST_CASE("vector prox applies the scalar prox coordinatewise") {
    Eigen::VectorXd z(3);
    z << 2.0, -0.3, 0.0;
    const Eigen::VectorXd p = prox_vector(ProxTerm::l1(1.0), 0.5, z);
    CHECK(p[0] == doctest::Approx(1.5));
    CHECK(p[1] == 0.0);
    CHECK(p[2] == 0.0);

    Eigen::VectorXd z2(2);
    z2 << 1.0, -2.0;
    CHECK(prox_vector(ProxTerm::zero(), 0.3, z2) == z2);

    Eigen::VectorXd z3(2);
    z3 << 1.5, -0.2;
    const Eigen::VectorXd p3 = prox_vector(ProxTerm::box(0.0, 1.0), 0.7, z3);
    CHECK(p3[0] == 1.0);
    CHECK(p3[1] == 0.0);

    Rng rng(303);
    double gamma = 0.0;
    const ProxTerm term = random_term(rng, gamma);
    Eigen::VectorXd z4(7);
    for (int i = 0; i < 7; ++i) z4[i] = rng.uniform(-8.0, 8.0);
    const Eigen::VectorXd p4 = prox_vector(term, gamma, z4);
    for (int i = 0; i < 7; ++i) CHECK(p4[i] == prox_scalar(term, gamma, z4[i]));
}

TEST_CASE("Moreau envelope values") {
    Eigen::VectorXd x1(2);
    x1 << 1.0, 1.0;
    CHECK(moreau_envelope(ProxTerm::zero(), 0.5, x1) == 0.0);

    Eigen::VectorXd x2(1);
    x2 << 2.0;
    // p = 1.5, value |1.5| + 0.25^... = 1.5 + 0.5^2 / (2*0.5) = 1.75.
    CHECK(moreau_envelope(ProxTerm::l1(1.0), 0.5, x2) == doctest::Approx(1.75).epsilon(1e-12));
    // Ridge: ||x||^2 / (2 (1 + gamma)).
    CHECK(moreau_envelope(ProxTerm::ridge(1.0), 1.0, x2) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Moreau gradient equals (x - prox)/gamma and differentiates the envelope") {
    Eigen::VectorXd x(1);
    x << 3.0;
    CHECK(moreau_gradient(ProxTerm::zero(), 0.5, x)[0] == 0.0);
    x << 2.0;
    CHECK(moreau_gradient(ProxTerm::l1(1.0), 0.5, x)[0] == doctest::Approx(1.0).epsilon(1e-12));

    // Central finite differences of the envelope at points away from
    // prox kinks.
    Rng rng(404);
    int checked = 0;
    while (checked < 200) {
        double gamma = 0.0;
        const ProxTerm term = random_term(rng, gamma);
        const double t = rng.uniform(-6.0, 6.0);
        const double fd_step = 1e-6;
        Eigen::VectorXd xt(1), xp(1), xm(1);
        xt << t;
        xp << t + fd_step;
        xm << t - fd_step;
        // Skip kink neighborhoods: require the prox to move smoothly.
        const double p0 = prox_scalar(term, gamma, t);
        const double pp = prox_scalar(term, gamma, t + 1e-3);
        const double pm = prox_scalar(term, gamma, t - 1e-3);
        if (std::abs(pp - 2.0 * p0 + pm) > 1e-9) continue;
        const double fd =
            (moreau_envelope(term, gamma, xp) - moreau_envelope(term, gamma, xm)) / (2.0 * fd_step);
        const double grad = moreau_gradient(term, gamma, xt)[0];
        CHECK(std::abs(fd - grad) <= 1e-5 * (1.0 + std::abs(grad)));
        ++checked;
    }
}

TEST_CASE("prox step shrinks at rate O(gamma)") {
    // ||prox(gamma, z) - z|| / gamma stays bounded as gamma halves.
    const ProxTerm terms[] = {ProxTerm::l1(1.0), ProxTerm::mcp(1.0, 3.0), ProxTerm::scad(1.0, 3.7),
                              ProxTerm::ridge(2.0)};
    for (const auto& term : terms) {
        const double z = 1.7;
        double prev = -1.0;
        for (int k = 1; k <= 20; ++k) {
            const double gamma = std::pow(2.0, -k);
            const double ratio = std::abs(prox_scalar(term, gamma, z) - z) / gamma;
            if (prev >= 0.0 && prev > 1e-14) CHECK(ratio <= 2.0 * prev + 1e-12);
            prev = ratio;
        }
    }
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(ProxTerm::scad(1.0, 2.0), ParameterOutOfRange);     // theta must exceed 2
    CHECK_THROWS_AS(ProxTerm::mcp(-1.0, 3.0), ParameterOutOfRange);     // negative level
    CHECK_THROWS_AS(ProxTerm::box(1.0, 0.0), ParameterOutOfRange);      // inverted bounds
    CHECK_THROWS_AS(prox_scalar(ProxTerm::mcp(1.0, 2.0), 2.5, 1.0),
                    ParameterOutOfRange);                                // gamma * rho >= 1
    CHECK_THROWS_AS(prox_scalar(ProxTerm::l1(1.0), -0.1, 1.0), ParameterOutOfRange);
}
