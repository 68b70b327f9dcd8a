#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "dys/problems.hpp"
#include "dys/rng.hpp"
#include "dys/splitting.hpp"
#include "dys/tuning.hpp"

using namespace dys;

namespace {

Eigen::VectorXd random_vector(Rng& rng, int d, double scale = 1.0) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v[i] = scale * rng.normal();
    return v;
}

// f = (1/2) x^2, h = 0, g = tau |x|: the 1-D workhorse with stationary
// point soft(0, tau) = 0 when f is centered, or known_lasso_1d otherwise.
Problem one_dim_quad_l1(double tau) {
    Eigen::MatrixXd A(1, 1);
    A << 1.0;
    return Problem(std::make_shared<QuadraticTerm>(A, Eigen::VectorXd::Zero(1)),
                   std::make_shared<ZeroSmooth>(1), ProxTerm::l1(tau));
}

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

struct NoHessTerm final : SmoothTerm {
    Eigen::Index dim() const override { return 1; }
    double value(const Eigen::VectorXd& x) const override { return 0.5 * x.squaredNorm(); }
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override { return x; }
    double lipschitz() const override { return 1.0; }
    double weak_convexity() const override { return 0.0; }
    bool has_prox() const override { return true; }
    Eigen::VectorXd prox(double gamma, const Eigen::VectorXd& z) const override {
        return z / (1.0 + gamma);
    }
};

}  // namespace

TEST_CASE("dy_map: gradient step under g = 0, soft threshold otherwise") {
    Rng rng(7);
    const auto A = [&] {
        Eigen::MatrixXd M(4, 3);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 3; ++j) M(i, j) = rng.normal();
        return M;
    }();
    Problem smooth_only(std::make_shared<QuadraticTerm>(A, random_vector(rng, 4)),
                        std::make_shared<DiagQuadraticTerm>(3, 0.3), ProxTerm::zero());
    const auto x = random_vector(rng, 3);
    const double gamma = 0.2;
    const Eigen::VectorXd expected =
        x - gamma * (smooth_only.f->gradient(x) + smooth_only.h->gradient(x));
    CHECK((dy_map(smooth_only, gamma, x) - expected).norm() <= 1e-14);

    // 1-D quadratic + L1 at x = 2: forward point 1, prox gives 0.5.
    Problem p = one_dim_quad_l1(1.0);
    CHECK(dy_map(p, 0.5, scalar(2.0))[0] == doctest::Approx(0.5).epsilon(1e-14));
    // The origin is stationary for (1/2)x^2 + |x|.
    CHECK(dy_map(p, 0.5, scalar(0.0))[0] == 0.0);
}

TEST_CASE("shadow operator: closed-form check and optimality identity") {
    Problem p = one_dim_quad_l1(1.0);
    // x=2, gamma=0.5, lambda=1: prox argument 1.5, prox value 1.0.
    CHECK(shadow_t(p, 0.5, 1.0, scalar(2.0))[0] == doctest::Approx(1.0).epsilon(1e-14));
    // Fixed point at the stationary origin.
    CHECK(std::abs(shadow_t(p, 0.5, 1.0, scalar(0.0))[0]) <= 1e-14);

    // f = 0 reduces T to (1-lambda) x + lambda Y.
    Problem no_f(std::make_shared<ZeroSmooth>(1), std::make_shared<DiagQuadraticTerm>(1, 1.0),
                 ProxTerm::l1(0.7));
    const double lambda = 1.3, gamma = 0.4;
    const Eigen::VectorXd x = scalar(1.9);
    const Eigen::VectorXd y = dy_map(no_f, gamma, x);
    CHECK((shadow_t(no_f, gamma, lambda, x) - ((1.0 - lambda) * x + lambda * y)).norm() <= 1e-14);

    // Optimality identity of the backward step, including a
    // Newton-prox f (quartic).
    Rng rng(17);
    Problem quart(std::make_shared<QuarticTerm>(2, 3.0),
                  std::make_shared<DiagQuadraticTerm>(2, 0.5), ProxTerm::l1(0.5));
    for (int rep = 0; rep < 50; ++rep) {
        const auto xr = random_vector(rng, 2, 1.2);
        const double gam = rng.uniform(0.05, 0.4);
        const double lam = rng.uniform(0.5, 1.5);
        const Eigen::VectorXd yr = dy_map(quart, gam, xr);
        const Eigen::VectorXd tr = shadow_t(quart, gam, lam, xr);
        const Eigen::VectorXd lhs =
            ((1.0 - lam) * xr + gam * quart.f->gradient(xr) + lam * yr - tr) / gam;
        CHECK((lhs - quart.f->gradient(tr)).norm() <= 1e-8);
    }
}

TEST_CASE("damped step interpolates between identity and T") {
    Problem p = one_dim_quad_l1(1.0);
    SolverConfig cfg;
    cfg.gamma = 0.5;
    cfg.lambda = 1.0;
    cfg.alpha = 1.0;
    CHECK(damped_step(p, cfg, scalar(2.0))[0] == doctest::Approx(1.0));
    cfg.alpha = 0.5;
    CHECK(damped_step(p, cfg, scalar(2.0))[0] == doctest::Approx(1.5));
    // Any damping keeps a fixed point fixed.
    for (double a : {0.1, 0.5, 0.9}) {
        cfg.alpha = a;
        CHECK(std::abs(damped_step(p, cfg, scalar(0.0))[0]) <= 1e-14);
    }
}

TEST_CASE("classic fixed-point step") {
    // g = 0, f = 0: reduces to the relaxed gradient step on h.
    Problem p(std::make_shared<ZeroSmooth>(2), std::make_shared<DiagQuadraticTerm>(2, 1.0),
              ProxTerm::zero());
    Rng rng(23);
    const auto z = random_vector(rng, 2);
    const double gamma = 0.3, lambda = 1.4;
    const auto s = classic_dy_step(p, gamma, lambda, z);
    CHECK((s.x - z).norm() == 0.0);
    CHECK((s.y - (z - gamma * z)).norm() <= 1e-15);
    CHECK((s.z_next - (z - lambda * gamma * z)).norm() <= 1e-15);

    // A stationary point of the lasso induces a fixed point of the
    // z-iteration at z = x + gamma grad f(x).
    const auto lasso = known_lasso_1d(4.0, 1.0);
    const double g2 = 0.5;
    const Eigen::VectorXd xbar = scalar(lasso.x_star);
    const Eigen::VectorXd zbar = xbar + g2 * lasso.problem.f->gradient(xbar);
    const auto step = classic_dy_step(lasso.problem, g2, 1.0, zbar);
    CHECK((step.z_next - zbar).norm() <= 1e-12);
    CHECK((step.x - xbar).norm() <= 1e-12);
}

TEST_CASE("shadow sequence coincides with the classic x-sequence (alpha = 1)") {
    Rng rng(31);
    for (int inst = 0; inst < 5; ++inst) {
        const auto en = gen_elastic_net(20, 8, 0.5, 2.0 / 3.0, PenaltyKind::Mcp, 3.0, 3, 2, 0.1,
                                        1000 + inst);
        const Problem p = as_problem(en);
        const double gamma = practical_gamma(p.lf(), p.lh(), p.rho_g());

        Eigen::VectorXd x = random_vector(rng, 8, 2.0);
        Eigen::VectorXd z = x + gamma * p.f->gradient(x);
        SolverConfig cfg;
        cfg.gamma = gamma;
        cfg.lambda = 1.0;
        cfg.alpha = 1.0;
        double max_dev = 0.0;
        for (int k = 0; k < 100; ++k) {
            x = damped_step(p, cfg, x);
            const auto s = classic_dy_step(p, gamma, 1.0, z);
            z = s.z_next;
            const Eigen::VectorXd x_classic = p.f->prox(gamma, z);
            max_dev = std::max(max_dev, (x - x_classic).norm());
        }
        CHECK(max_dev <= 1e-10);
    }
}

TEST_CASE("DY envelope: closed form under g = 0, upper bound, tightness at stationary points") {
    Rng rng(41);
    Eigen::MatrixXd A(3, 2);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 2; ++j) A(i, j) = rng.normal();
    Problem p(std::make_shared<QuadraticTerm>(A, random_vector(rng, 3)),
              std::make_shared<DiagQuadraticTerm>(2, 0.4), ProxTerm::zero());
    const double gamma = 0.5 / (p.lf() + p.lh());
    for (int rep = 0; rep < 30; ++rep) {
        const auto x = random_vector(rng, 2, 2.0);
        const Eigen::VectorXd grad = p.f->gradient(x) + p.h->gradient(x);
        const double expected = p.f->value(x) + p.h->value(x) - 0.5 * gamma * grad.squaredNorm();
        CHECK(dy_envelope(p, gamma, x) == doctest::Approx(expected).epsilon(1e-12));
    }

    // Envelope minorizes the objective everywhere sampled (take y = x).
    Problem q = one_dim_quad_l1(1.0);
    for (int rep = 0; rep < 100; ++rep) {
        const auto x = scalar(rng.uniform(-4.0, 4.0));
        CHECK(dy_envelope(q, 0.5, x) <= q.value(x) + 1e-12);
    }
    // Equality at the stationary origin.
    CHECK(dy_envelope(q, 0.5, scalar(0.0)) == doctest::Approx(q.value(scalar(0.0))).epsilon(1e-14));

    const auto lasso = known_lasso_1d(4.0, 1.0);
    const Eigen::VectorXd xbar = scalar(lasso.x_star);
    CHECK(dy_envelope(lasso.problem, 0.5, xbar) ==
          doctest::Approx(lasso.problem.value(xbar)).epsilon(1e-14));
}

TEST_CASE("DY envelope gradient matches finite differences away from kinks") {
    Rng rng(53);
    Eigen::MatrixXd A(5, 3);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 3; ++j) A(i, j) = rng.normal();
    const auto b = random_vector(rng, 5);

    // C^2 setting: ridge penalty has a globally smooth prox.
    Problem smooth_pen(std::make_shared<QuadraticTerm>(A, b),
                       std::make_shared<DiagQuadraticTerm>(3, 0.5), ProxTerm::ridge(1.0));
    // Nonconvex setting: MCP, checked away from its prox kinks.
    Problem mcp_pen(std::make_shared<QuadraticTerm>(A, b),
                    std::make_shared<DiagQuadraticTerm>(3, 0.5), ProxTerm::mcp(1.0, 3.0, 0.8));

    for (const Problem* p : {&smooth_pen, &mcp_pen}) {
        const double gamma = 0.5 * p->max_gamma_envelope_gradient();
        int checked = 0;
        while (checked < 50) {
            const auto x = random_vector(rng, 3, 2.0);
            if (p == &mcp_pen) {
                const Eigen::VectorXd fwd =
                    x - gamma * (p->f->gradient(x) + p->h->gradient(x));
                const double s = p->g.scale;
                bool near_kink = false;
                for (int i = 0; i < 3; ++i) {
                    const double a = std::abs(fwd[i]);
                    if (std::abs(a - gamma * s * p->g.tau) < 1e-3 ||
                        std::abs(a - p->g.theta * p->g.tau) < 1e-3)
                        near_kink = true;
                }
                if (near_kink) continue;
            }
            const Eigen::VectorXd grad = dy_envelope_gradient(*p, gamma, x);
            Eigen::VectorXd fd(3);
            for (int i = 0; i < 3; ++i) {
                Eigen::VectorXd xp = x, xm = x;
                xp[i] += 1e-6;
                xm[i] -= 1e-6;
                fd[i] = (dy_envelope(*p, gamma, xp) - dy_envelope(*p, gamma, xm)) / 2e-6;
            }
            CHECK((grad - fd).norm() <= 1e-5 * (1.0 + grad.norm()));
            ++checked;
        }
    }

    // Vanishes at stationary points.
    const auto lasso = known_lasso_1d(4.0, 1.0);
    CHECK(dy_envelope_gradient(lasso.problem, 0.4, scalar(lasso.x_star)).norm() <= 1e-12);

    // Capability and stepsize guards.
    Problem no_hess(std::make_shared<NoHessTerm>(), std::make_shared<ZeroSmooth>(1),
                    ProxTerm::l1(1.0));
    CHECK_THROWS_AS(dy_envelope_gradient(no_hess, 0.1, scalar(1.0)), CapabilityError);
    CHECK_THROWS_AS(dy_envelope_gradient(smooth_pen, smooth_pen.max_gamma_envelope_gradient() * 1.01,
                                         random_vector(rng, 3)),
                    ParameterOutOfRange);
}

TEST_CASE("merit function V composes the envelope with the backward prox") {
    // f = 0: V(z) = envelope(z).
    Problem no_f(std::make_shared<ZeroSmooth>(1), std::make_shared<DiagQuadraticTerm>(1, 1.0),
                 ProxTerm::l1(0.5));
    Rng rng(61);
    for (int rep = 0; rep < 20; ++rep) {
        const auto z = scalar(rng.uniform(-3.0, 3.0));
        CHECK(merit_v(no_f, 0.3, z) == doctest::Approx(dy_envelope(no_f, 0.3, z)).epsilon(1e-14));
    }

    // V at the fixed z equals the objective at the stationary point.
    const auto lasso = known_lasso_1d(4.0, 1.0);
    const double gamma = 0.5;
    const Eigen::VectorXd xbar = scalar(lasso.x_star);
    const Eigen::VectorXd zbar = xbar + gamma * lasso.problem.f->gradient(xbar);
    CHECK(merit_v(lasso.problem, gamma, zbar) ==
          doctest::Approx(lasso.problem.value(xbar)).epsilon(1e-12));

    // Nonincreasing along classic runs at a certified stepsize.
    Eigen::MatrixXd A(6, 3);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 3; ++j) A(i, j) = rng.normal();
    Problem p(std::make_shared<QuadraticTerm>(A, random_vector(rng, 6)),
              std::make_shared<ZeroSmooth>(3), ProxTerm::l1(0.7));
    const auto cert = descent_bounds(make_constants(p, 1.0, 1.0));
    const double gc = 0.9 * cert.gamma_max;
    Eigen::VectorXd z = random_vector(rng, 3, 2.0);
    double prev = merit_v(p, gc, z);
    for (int k = 0; k < 300; ++k) {
        z = classic_dy_step(p, gc, 1.0, z).z_next;
        const double cur = merit_v(p, gc, z);
        CHECK(cur <= prev + 1e-10);
        prev = cur;
    }
}

TEST_CASE("stationarity residual") {
    Problem p = one_dim_quad_l1(1.0);
    CHECK(stationarity_residual(p, 0.5, scalar(0.0)) <= 1e-12);
    CHECK(stationarity_residual(p, 0.5, scalar(2.0)) == doctest::Approx(1.5).epsilon(1e-14));
}

TEST_CASE("fixed points of T and Y are exactly the analytic stationary points") {
    Rng rng(71);
    for (int rep = 0; rep < 100; ++rep) {
        const double a = rng.uniform(-5.0, 5.0);
        const double tau = rng.uniform(0.0, 2.0);
        const auto lasso = known_lasso_1d(a, tau);
        const double gamma = rng.uniform(0.05, 2.0);
        const double lambda = rng.uniform(0.3, 1.8);
        const Eigen::VectorXd xbar = scalar(lasso.x_star);
        CHECK((dy_map(lasso.problem, gamma, xbar) - xbar).norm() <= 1e-8);
        CHECK((shadow_t(lasso.problem, gamma, lambda, xbar) - xbar).norm() <= 1e-8);
    }
}

TEST_CASE("run: stopping, convex convergence, subgradient residual at the last iterate") {
    // Starting at a stationary point converges in one iteration.
    const auto lasso = known_lasso_1d(4.0, 1.0);
    SolverConfig cfg;
    cfg.gamma = 0.5;
    cfg.lambda = 1.0;
    cfg.alpha = 0.9;
    cfg.rel_tol = 1e-8;
    cfg.debug_recompute = true;
    const auto at_solution = run(lasso.problem, cfg, scalar(lasso.x_star));
    CHECK(at_solution.status == RunStatus::Converged);
    CHECK(at_solution.iters == 1);
    CHECK(at_solution.step_norm[0] <= 1e-12);

    // Convex 1-D lasso converges to the soft-threshold solution.
    const auto trace = run(lasso.problem, cfg, scalar(-2.0));
    CHECK(trace.status == RunStatus::Converged);
    CHECK(std::abs(trace.x_final[0] - 3.0) <= 1e-6);

    // Envelope is recorded and decreasing for this convex instance.
    for (std::size_t k = 0; k + 1 < trace.envelope.size(); ++k)
        CHECK(trace.envelope[k + 1] <= trace.envelope[k] + 1e-12);

    // The final stationarity residual is proportional to the stop
    // threshold.
    const double resid = stationarity_residual(lasso.problem, cfg.gamma, trace.x_final);
    CHECK(resid <= 10.0 * cfg.rel_tol * (1.0 + trace.x_final.norm()));

    // Subdifferential inclusion residual at the solution.
    const double incl = resid / cfg.gamma *
                        (1.0 + cfg.gamma * (lasso.problem.lf() + lasso.problem.lh()));
    CHECK(incl <= 100.0 * cfg.rel_tol);
}

TEST_CASE("run: non-finite iterates are reported, not silently produced") {
    // Unbounded direction: h has negative curvature and nothing stops
    // the iterates from racing to infinity.
    Problem p(std::make_shared<ZeroSmooth>(1), std::make_shared<DiagQuadraticTerm>(1, -1.0),
              ProxTerm::zero());
    SolverConfig cfg;
    cfg.gamma = 0.5;
    cfg.lambda = 1.0;
    cfg.alpha = 0.9;
    CHECK_THROWS_AS(run(p, cfg, scalar(1e300)), NonFiniteIterate);
}

TEST_CASE("run: config validation") {
    Problem p = one_dim_quad_l1(1.0);
    SolverConfig cfg;
    cfg.gamma = 0.5;
    cfg.lambda = 3.0;
    cfg.alpha = 0.7;  // lambda * alpha = 2.1
    CHECK_THROWS_AS(run(p, cfg, scalar(1.0)), ParameterOutOfRange);
    cfg.lambda = 1.0;
    cfg.alpha = 0.0;
    CHECK_THROWS_AS(run(p, cfg, scalar(1.0)), ParameterOutOfRange);

    Problem mcp(std::make_shared<ZeroSmooth>(1), std::make_shared<ZeroSmooth>(1),
                ProxTerm::mcp(1.0, 2.0));
    SolverConfig cfg2;
    cfg2.gamma = 2.5;  // gamma * rho = 1.25
    CHECK_THROWS_AS(run(mcp, cfg2, scalar(1.0)), ParameterOutOfRange);
}

TEST_CASE("DY map is Lipschitz with the certified constant") {
    Rng rng(83);
    const auto en = gen_elastic_net(20, 8, 0.5, 2.0 / 3.0, PenaltyKind::Mcp, 3.0, 3, 2, 0.1, 99);
    const Problem p = as_problem(en);
    const double gamma = practical_gamma(p.lf(), p.lh(), p.rho_g());
    const double bound = (1.0 + gamma * (p.lf() + p.lh())) / (1.0 - gamma * p.rho_g());
    for (int rep = 0; rep < 1000; ++rep) {
        const auto u1 = random_vector(rng, 8, 3.0);
        const auto u2 = random_vector(rng, 8, 3.0);
        const double lhs = (dy_map(p, gamma, u1) - dy_map(p, gamma, u2)).norm();
        CHECK(lhs <= bound * (u1 - u2).norm() + 1e-10);
    }
}

TEST_CASE("DY map approaches the domain projection as gamma vanishes") {
    Rng rng(89);
    Eigen::MatrixXd A(4, 3);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 3; ++j) A(i, j) = rng.normal();
    Problem p(std::make_shared<QuadraticTerm>(A, random_vector(rng, 4)),
              std::make_shared<DiagQuadraticTerm>(3, 0.2), ProxTerm::box(0.0, 1.0));
    const Eigen::VectorXd ubar = (Eigen::VectorXd(3) << -0.4, 0.5, 1.7).finished();
    const Eigen::VectorXd proj = (Eigen::VectorXd(3) << 0.0, 0.5, 1.0).finished();
    const Eigen::VectorXd w = random_vector(rng, 3);
    double err = 0.0;
    for (int k = 1; k <= 20; ++k) {
        const double gk = std::pow(2.0, -k);
        const Eigen::VectorXd uk = ubar + gk * w;
        err = (dy_map(p, gk, uk) - proj).norm();
    }
    CHECK(err <= 1e-4);
}

TEST_CASE("DY map step is O(gamma) at fixed points of the domain") {
    Rng rng(97);
    const auto en = gen_elastic_net(20, 8, 0.5, 2.0 / 3.0, PenaltyKind::L1, 3.0, 3, 2, 0.1, 5);
    const Problem p = as_problem(en);
    const Eigen::VectorXd x = random_vector(rng, 8, 2.0);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int k = 1; k <= 20; ++k) {
        const double gk = std::pow(2.0, -k);
        const double ratio = (dy_map(p, gk, x) - x).norm() / gk;
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
    }
    CHECK(hi / lo <= 10.0);
}

TEST_CASE("envelope-gradient-to-step ratio stays within the a priori bound") {
    Rng rng(103);
    Eigen::MatrixXd A(6, 3);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 3; ++j) A(i, j) = rng.normal();
    Problem p(std::make_shared<QuadraticTerm>(A, random_vector(rng, 6)),
              std::make_shared<DiagQuadraticTerm>(3, 0.3), ProxTerm::ridge(1.5));
    SolverConfig cfg;
    cfg.gamma = 0.5 * p.max_gamma_envelope_gradient();
    cfg.lambda = 1.0;
    cfg.alpha = 0.8;
    cfg.rel_tol = 1e-9;
    cfg.record_iterates = true;
    const auto trace = run(p, cfg, random_vector(rng, 3, 2.0));
    const double bound = (1.0 + cfg.gamma * (p.lf() + p.lh())) * (1.0 + cfg.gamma * p.lf()) /
                         (cfg.lambda * cfg.alpha * cfg.gamma) * (1.0 + 1e-6);
    REQUIRE(trace.xs.size() >= 2);
    for (std::size_t k = 0; k + 1 < trace.xs.size(); ++k) {
        const double step = trace.step_norm[k];
        if (step <= 1e-14) continue;
        const double ratio = dy_envelope_gradient(p, cfg.gamma, trace.xs[k]).norm() / step;
        CHECK(ratio <= bound);
    }
}

TEST_CASE("trace serializes to CSV") {
    const auto lasso = known_lasso_1d(4.0, 1.0);
    SolverConfig cfg;
    cfg.gamma = 0.5;
    cfg.lambda = 1.0;
    cfg.alpha = 0.9;
    const auto trace = run(lasso.problem, cfg, scalar(0.0));
    std::ostringstream os;
    trace.write_csv(os);
    const std::string csv = os.str();
    CHECK(csv.rfind("k,envelope,step_norm,residual,rel_residual\n", 0) == 0);
    const auto lines = std::count(csv.begin(), csv.end(), '\n');
    CHECK(lines == trace.iters + 1);
}
