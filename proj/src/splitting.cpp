#include "dys/splitting.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace dys {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_gamma_operators(const Problem& p, double gamma) {
    if (!(gamma > 0.0)) throw ParameterOutOfRange("gamma must be positive");
    if (gamma >= p.max_gamma_operators())
        throw ParameterOutOfRange("gamma exceeds min{1/rho_g, 1/rho_f}");
}

double envelope_given(const Problem& p, double gamma, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& grad_fh, const Eigen::VectorXd& y) {
    const Eigen::VectorXd d = y - x;
    return p.f->value(x) + p.h->value(x) + grad_fh.dot(d) + d.squaredNorm() / (2.0 * gamma) +
           penalty_value(p.g, y);
}

}  // namespace

Problem::Problem(SmoothPtr f_, SmoothPtr h_, ProxTerm g_)
    : f(std::move(f_)), h(std::move(h_)), g(std::move(g_)) {
    if (!f || !h) throw InvalidDimensions("Problem: null smooth term");
    if (f->dim() != h->dim()) throw InvalidDimensions("Problem: f and h dimension mismatch");
    if (!f->has_prox()) throw CapabilityError("Problem: f must provide an exact prox");
    g.validate();
}

double Problem::value(const Eigen::VectorXd& x) const {
    return f->value(x) + h->value(x) + penalty_value(g, x);
}

double Problem::max_gamma_operators() const {
    double m = kInf;
    if (rho_g() > 0.0) m = std::min(m, 1.0 / rho_g());
    if (rho_f() > 0.0) m = std::min(m, 1.0 / rho_f());
    return m;
}

double Problem::max_gamma_envelope_gradient() const {
    double m = kInf;
    if (rho_g() > 0.0) m = std::min(m, 1.0 / rho_g());
    const double l = lf() + lh();
    if (l > 0.0) m = std::min(m, 1.0 / l);
    return m;
}

void SolverConfig::validate(const Problem& p) const {
    if (!(gamma > 0.0)) throw ParameterOutOfRange("SolverConfig: gamma must be positive");
    if (!(lambda > 0.0)) throw ParameterOutOfRange("SolverConfig: lambda must be positive");
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw ParameterOutOfRange("SolverConfig: alpha must lie in (0, 1]");
    if (!(lambda * alpha < 2.0)) throw ParameterOutOfRange("SolverConfig: lambda*alpha < 2 required");
    if (!(rel_tol > 0.0)) throw ParameterOutOfRange("SolverConfig: rel_tol must be positive");
    if (max_iter < 1) throw ParameterOutOfRange("SolverConfig: max_iter must be >= 1");
    check_gamma_operators(p, gamma);
}

Eigen::VectorXd dy_map(const Problem& p, double gamma, const Eigen::VectorXd& x) {
    check_gamma_operators(p, gamma);
    const Eigen::VectorXd fwd = x - gamma * (p.f->gradient(x) + p.h->gradient(x));
    return prox_vector(p.g, gamma, fwd);
}

Eigen::VectorXd shadow_t(const Problem& p, double gamma, double lambda,
                         const Eigen::VectorXd& x) {
    const Eigen::VectorXd y = dy_map(p, gamma, x);
    const Eigen::VectorXd arg = (1.0 - lambda) * x + gamma * p.f->gradient(x) + lambda * y;
    return p.f->prox(gamma, arg);
}

Eigen::VectorXd damped_step(const Problem& p, const SolverConfig& cfg, const Eigen::VectorXd& x) {
    return (1.0 - cfg.alpha) * x + cfg.alpha * shadow_t(p, cfg.gamma, cfg.lambda, x);
}

ClassicDyStep classic_dy_step(const Problem& p, double gamma, double lambda,
                              const Eigen::VectorXd& z) {
    check_gamma_operators(p, gamma);
    ClassicDyStep s;
    s.x = p.f->prox(gamma, z);
    s.y = prox_vector(p.g, gamma, 2.0 * s.x - z - gamma * p.h->gradient(s.x));
    s.z_next = z + lambda * (s.y - s.x);
    return s;
}

double dy_envelope(const Problem& p, double gamma, const Eigen::VectorXd& x) {
    check_gamma_operators(p, gamma);
    const Eigen::VectorXd grad_fh = p.f->gradient(x) + p.h->gradient(x);
    const Eigen::VectorXd y = prox_vector(p.g, gamma, x - gamma * grad_fh);
    return envelope_given(p, gamma, x, grad_fh, y);
}

Eigen::VectorXd dy_envelope_gradient(const Problem& p, double gamma, const Eigen::VectorXd& x) {
    if (!(gamma > 0.0)) throw ParameterOutOfRange("gamma must be positive");
    if (gamma >= p.max_gamma_envelope_gradient())
        throw ParameterOutOfRange("envelope gradient requires gamma < min{1/rho_g, 1/(Lf+Lh)}");
    if (!p.f->has_hess_vec() || !p.h->has_hess_vec())
        throw CapabilityError("envelope gradient requires Hessian-vector products on f and h");
    const Eigen::VectorXd y = dy_map(p, gamma, x);
    const Eigen::VectorXd d = x - y;
    return (d - gamma * (p.f->hess_vec(x, d) + p.h->hess_vec(x, d))) / gamma;
}

double merit_v(const Problem& p, double gamma, const Eigen::VectorXd& z) {
    check_gamma_operators(p, gamma);
    return dy_envelope(p, gamma, p.f->prox(gamma, z));
}

double stationarity_residual(const Problem& p, double gamma, const Eigen::VectorXd& x) {
    return (x - dy_map(p, gamma, x)).norm();
}

IterateTrace run(const Problem& p, const SolverConfig& cfg, const Eigen::VectorXd& x0) {
    cfg.validate(p);
    if (x0.size() != p.dim()) throw InvalidDimensions("run: x0 dimension mismatch");

    IterateTrace trace;
    Eigen::VectorXd x = x0;
    Eigen::VectorXd grad_f(p.dim()), grad_fh(p.dim()), y(p.dim()), t(p.dim()), x_next(p.dim());

    for (long k = 0; k < cfg.max_iter; ++k) {
        grad_f = p.f->gradient(x);
        grad_fh = grad_f + p.h->gradient(x);
        y = prox_vector(p.g, cfg.gamma, x - cfg.gamma * grad_fh);

        double env = kNaN;
        if (cfg.record_envelope) {
            env = envelope_given(p, cfg.gamma, x, grad_fh, y);
            if (cfg.debug_recompute) {
                const double env2 = dy_envelope(p, cfg.gamma, x);
                if (std::abs(env - env2) > 1e-12 * (1.0 + std::abs(env2)))
                    throw std::logic_error("run: shared-y envelope disagrees with recomputation");
            }
        }

        t = p.f->prox(cfg.gamma, (1.0 - cfg.lambda) * x + cfg.gamma * grad_f + cfg.lambda * y);
        x_next = (1.0 - cfg.alpha) * x + cfg.alpha * t;
        if (!x_next.allFinite())
            throw NonFiniteIterate("run: iterate became non-finite (gamma likely inadmissible)");

        const double step = (x_next - x).norm();
        const double rel = step / std::max(x.norm(), cfg.eps_abs);
        trace.envelope.push_back(env);
        trace.step_norm.push_back(step);
        trace.residual.push_back((x - y).norm());
        trace.rel_residual.push_back(rel);
        if (cfg.record_iterates) {
            trace.xs.push_back(x);
            trace.ys.push_back(y);
        }
        trace.y_final = y;
        x.swap(x_next);
        trace.iters = k + 1;
        if (rel <= cfg.rel_tol) {
            trace.status = RunStatus::Converged;
            break;
        }
    }
    trace.x_final = x;
    return trace;
}

void IterateTrace::write_csv(std::ostream& os) const {
    os << "k,envelope,step_norm,residual,rel_residual\n";
    char buf[256];
    for (std::size_t k = 0; k < step_norm.size(); ++k) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g\n", k, envelope[k],
                      step_norm[k], residual[k], rel_residual[k]);
        os << buf;
    }
}

bool verify_sufficient_descent(const IterateTrace& trace, double c, double gamma, double slack) {
    for (std::size_t k = 0; k + 1 < trace.envelope.size(); ++k) {
        const double lhs = trace.envelope[k + 1] + (c / gamma) * trace.step_norm[k] * trace.step_norm[k];
        if (!(lhs <= trace.envelope[k] + slack)) return false;
    }
    return true;
}

}  // namespace dys
