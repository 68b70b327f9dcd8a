#pragma once

#include <cstdint>

#include "dys/splitting.hpp"
#include "dys/tuning.hpp"

namespace dys {

/// Sparse-regression benchmark instance
///   min (1/2)||Ax-b||^2 + mu (nu P(x) + (1-nu)/2 ||x||^2)
/// split as f = (1/2)||Ax-b||^2, h = (mu(1-nu)/2)||x||^2, g = mu*nu*P.
struct ElasticNetInstance {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    double mu = 0.5;
    double nu = 2.0 / 3.0;
    PenaltyKind penalty_kind = PenaltyKind::Mcp;
    double theta = 3.0;  // ignored for L1
    Eigen::VectorXd x_true;
    std::uint64_t seed = 0;
};

/// Generates a random instance: standard normal A with
/// `collinear_pairs` near-duplicated column pairs (copy plus 0.01 *
/// standard normal noise), a `sparsity`-sparse x_true with magnitudes
/// uniform on [1, 3] and random signs, and b = A x_true + noise_sd * N(0, I).
/// Deterministic for a fixed seed.
ElasticNetInstance gen_elastic_net(int m, int d, double mu, double nu, PenaltyKind penalty_kind,
                                   double theta, int sparsity, int collinear_pairs,
                                   double noise_sd, std::uint64_t seed);

/// Binds the instance split to solver types. The penalty keeps unit
/// level tau = 1 and carries mu*nu through its scale.
Problem as_problem(const ElasticNetInstance& inst);

/// Packs the constants of a problem together with a relaxation/damping
/// pair for the tuning module.
ProblemConstants make_constants(const Problem& p, double lambda, double alpha);

/// 2-D strict-saddle landscape f = (x1^4 + x2^4)/4, h = (x1^2 - x2^2)/2,
/// g = 0: the origin is a Hessian saddle, (0, +-1) are the minimizers
/// with objective -1/4. Constants are certified on the box [-2, 2]^2.
struct SaddleToy {
    Problem problem;
    Eigen::Vector2d saddle;
    Eigen::Vector2d min_plus;
    Eigen::Vector2d min_minus;
    double box_radius = 2.0;
};

SaddleToy gen_saddle_toy();

/// Convex sanity instance f = (1/2)(x-a)^2, g = tau |x|, h = 0, whose
/// minimizer is the soft threshold sign(a) * max(|a| - tau, 0).
struct Lasso1d {
    Problem problem;
    double a = 0.0;
    double tau = 0.0;
    double x_star = 0.0;
};

Lasso1d known_lasso_1d(double a, double tau);

}  // namespace dys
