#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <vector>

#include "dys/penalty.hpp"
#include "dys/smooth.hpp"

namespace dys {

/// Composite problem  min_x  f(x) + g(x) + h(x)  with f, h smooth and g
/// prox-friendly. f must expose an exact prox (it is the backward term
/// of the shadow step).
struct Problem {
    SmoothPtr f;
    SmoothPtr h;
    ProxTerm g;

    Problem(SmoothPtr f_, SmoothPtr h_, ProxTerm g_);

    Eigen::Index dim() const { return f->dim(); }
    double lf() const { return f->lipschitz(); }
    double lh() const { return h->lipschitz(); }
    double rho_f() const { return f->weak_convexity(); }
    double rho_g() const { return weak_convexity_modulus(g); }

    double value(const Eigen::VectorXd& x) const;

    /// Largest stepsize for which the iteration operators are
    /// single-valued: gamma < min{1/rho_g, 1/rho_f}.
    double max_gamma_operators() const;
    /// Stricter bound required by the envelope-gradient formula:
    /// gamma < min{1/rho_g, 1/(L_f + L_h)}.
    double max_gamma_envelope_gradient() const;
};

enum class RunStatus { Converged, MaxIter };

struct SolverConfig {
    double gamma = 0.1;    // stepsize
    double lambda = 1.0;   // relaxation
    double alpha = 0.5;    // damping; alpha == 1 reproduces the undamped shadow iteration
    double rel_tol = 1e-6;
    long max_iter = 100000;
    double eps_abs = 1e-12;  // floor of the relative-residual denominator
    bool record_envelope = true;
    bool record_iterates = false;
    bool debug_recompute = false;  // re-derive the envelope independently each iteration

    /// Throws ParameterOutOfRange when the configuration is not
    /// admissible for the given problem.
    void validate(const Problem& p) const;

    /// alpha == 1 is accepted (it matches the classic fixed-point form)
    /// but sits outside the saddle-escape regime.
    bool damped() const { return alpha < 1.0; }
};

/// Per-iteration trace of a run. Row k holds the iterate-k quantities
/// and the norm of the step from k to k+1.
struct IterateTrace {
    std::vector<double> envelope;      // DY envelope at x^k (NaN when not recorded)
    std::vector<double> step_norm;     // ||x^{k+1} - x^k||
    std::vector<double> residual;      // ||x^k - Y_gamma(x^k)||
    std::vector<double> rel_residual;  // step_norm / max(||x^k||, eps_abs)
    std::vector<Eigen::VectorXd> xs;   // only when record_iterates
    std::vector<Eigen::VectorXd> ys;
    Eigen::VectorXd x_final;
    Eigen::VectorXd y_final;  // Y_gamma at the last evaluated iterate
    long iters = 0;
    RunStatus status = RunStatus::MaxIter;

    /// CSV with header k,envelope,step_norm,residual,rel_residual.
    void write_csv(std::ostream& os) const;
};

/// DY solution map  Y_gamma(x) = prox_{gamma g}(x - gamma grad(f+h)(x)).
Eigen::VectorXd dy_map(const Problem& p, double gamma, const Eigen::VectorXd& x);

/// Shadow iteration operator
///   T_gamma(x) = prox_{gamma f}((1-lambda) x + gamma grad f(x) + lambda Y_gamma(x)).
Eigen::VectorXd shadow_t(const Problem& p, double gamma, double lambda,
                         const Eigen::VectorXd& x);

/// Damped step (1-alpha) x + alpha T_gamma(x).
Eigen::VectorXd damped_step(const Problem& p, const SolverConfig& cfg, const Eigen::VectorXd& x);

struct ClassicDyStep {
    Eigen::VectorXd z_next;
    Eigen::VectorXd x;
    Eigen::VectorXd y;
};

/// One step of the classic fixed-point form:
///   x = prox_{gamma f}(z),  y = prox_{gamma g}(2x - z - gamma grad h(x)),
///   z+ = z + lambda (y - x).
ClassicDyStep classic_dy_step(const Problem& p, double gamma, double lambda,
                              const Eigen::VectorXd& z);

/// DY envelope  phi_gamma(x) = Q(y; x) + g(y)  with y = Y_gamma(x) and
///   Q(y; x) = (f+h)(x) + <grad(f+h)(x), y - x> + ||y - x||^2 / (2 gamma).
double dy_envelope(const Problem& p, double gamma, const Eigen::VectorXd& x);

/// Gradient of the DY envelope,
///   (1/gamma) (I - gamma hess(f+h)(x)) (x - Y_gamma(x)).
/// Requires Hessian-vector products on f and h and
/// gamma < min{1/rho_g, 1/(L_f+L_h)}; undefined at prox kinks of g.
Eigen::VectorXd dy_envelope_gradient(const Problem& p, double gamma, const Eigen::VectorXd& x);

/// Merit function on the fixed-point variable: V(z) = envelope(prox_{gamma f}(z)).
double merit_v(const Problem& p, double gamma, const Eigen::VectorXd& z);

/// ||x - Y_gamma(x)||; zero exactly at stationary points of f+g+h.
double stationarity_residual(const Problem& p, double gamma, const Eigen::VectorXd& x);

/// Runs the damped shadow iteration from x0 until the relative step
/// ||x^{k+1}-x^k|| / max(||x^k||, eps_abs) falls below rel_tol.
IterateTrace run(const Problem& p, const SolverConfig& cfg, const Eigen::VectorXd& x0);

/// Checks the sufficient-descent inequality
///   envelope[k+1] + (c/gamma) step_norm[k]^2 <= envelope[k] + slack
/// on every recorded iteration of a trace.
bool verify_sufficient_descent(const IterateTrace& trace, double c, double gamma,
                               double slack = 1e-10);

}  // namespace dys
