#include "dys/problems.hpp"

#include <cmath>
#include <numeric>
#include <vector>

#include "dys/rng.hpp"

namespace dys {

ElasticNetInstance gen_elastic_net(int m, int d, double mu, double nu, PenaltyKind penalty_kind,
                                   double theta, int sparsity, int collinear_pairs,
                                   double noise_sd, std::uint64_t seed) {
    if (m < 1 || d < 1) throw InvalidDimensions("gen_elastic_net: m, d must be >= 1");
    if (sparsity < 0 || sparsity > d)
        throw InvalidDimensions("gen_elastic_net: sparsity outside [0, d]");
    if (collinear_pairs < 0 || 2 * collinear_pairs > d)
        throw InvalidDimensions("gen_elastic_net: collinear_pairs exceeds d/2");
    if (!(mu >= 0.0) || !(nu >= 0.0 && nu <= 1.0))
        throw ParameterOutOfRange("gen_elastic_net: need mu >= 0 and nu in [0, 1]");
    if (penalty_kind != PenaltyKind::L1 && penalty_kind != PenaltyKind::Mcp &&
        penalty_kind != PenaltyKind::Scad)
        throw ParameterOutOfRange("gen_elastic_net: penalty must be L1, MCP, or SCAD");

    Rng rng(seed);
    ElasticNetInstance inst;
    inst.mu = mu;
    inst.nu = nu;
    inst.penalty_kind = penalty_kind;
    inst.theta = theta;
    inst.seed = seed;

    inst.A.resize(m, d);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < d; ++j) inst.A(i, j) = rng.normal();

    // Near-duplicated column pairs (2t, 2t+1).
    for (int t = 0; t < collinear_pairs; ++t) {
        const int i = 2 * t, j = 2 * t + 1;
        for (int r = 0; r < m; ++r) inst.A(r, j) = inst.A(r, i) + 0.01 * rng.normal();
    }

    inst.x_true = Eigen::VectorXd::Zero(d);
    std::vector<int> perm(d);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = 0; i < sparsity; ++i) {
        const int j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(d - i)));
        std::swap(perm[i], perm[j]);
        const double mag = rng.uniform(1.0, 3.0);
        const double sign = (rng.next_u64() & 1u) ? 1.0 : -1.0;
        inst.x_true[perm[i]] = sign * mag;
    }

    inst.b = inst.A * inst.x_true;
    for (int i = 0; i < m; ++i) inst.b[i] += noise_sd * rng.normal();
    return inst;
}

Problem as_problem(const ElasticNetInstance& inst) {
    auto f = std::make_shared<QuadraticTerm>(inst.A, inst.b);
    auto h = std::make_shared<DiagQuadraticTerm>(inst.A.cols(), inst.mu * (1.0 - inst.nu));
    ProxTerm g;
    const double scale = inst.mu * inst.nu;
    switch (inst.penalty_kind) {
        case PenaltyKind::L1:
            g = ProxTerm::l1(1.0, scale);
            break;
        case PenaltyKind::Mcp:
            g = ProxTerm::mcp(1.0, inst.theta, scale);
            break;
        case PenaltyKind::Scad:
            g = ProxTerm::scad(1.0, inst.theta, scale);
            break;
        default:
            throw ParameterOutOfRange("as_problem: unsupported penalty kind");
    }
    return Problem(std::move(f), std::move(h), std::move(g));
}

ProblemConstants make_constants(const Problem& p, double lambda, double alpha) {
    ProblemConstants k;
    k.lf = p.lf();
    k.lh = p.lh();
    k.rho_f = p.rho_f();
    k.rho_g = p.rho_g();
    k.lambda = lambda;
    k.alpha = alpha;
    return k;
}

SaddleToy gen_saddle_toy() {
    const double box_radius = 2.0;
    auto f = std::make_shared<QuarticTerm>(2, box_radius);
    Eigen::VectorXd diag(2);
    diag << 1.0, -1.0;
    auto h = std::make_shared<DiagQuadraticTerm>(diag);
    return SaddleToy{Problem(std::move(f), std::move(h), ProxTerm::zero()),
                     Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(0.0, 1.0),
                     Eigen::Vector2d(0.0, -1.0), box_radius};
}

Lasso1d known_lasso_1d(double a, double tau) {
    if (!(tau >= 0.0)) throw ParameterOutOfRange("known_lasso_1d: tau must be >= 0");
    Eigen::MatrixXd A(1, 1);
    A << 1.0;
    Eigen::VectorXd b(1);
    b << a;
    Problem problem(std::make_shared<QuadraticTerm>(A, b), std::make_shared<ZeroSmooth>(1),
                    ProxTerm::l1(tau));
    const double mag = std::abs(a) - tau;
    const double x_star = (mag > 0.0) ? ((a >= 0.0) ? mag : -mag) : 0.0;
    return Lasso1d{std::move(problem), a, tau, x_star};
}

}  // namespace dys
