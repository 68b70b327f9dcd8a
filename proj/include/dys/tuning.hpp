#pragma once

#include <json.hpp>

#include "dys/errors.hpp"

namespace dys {

/// Certified constants of a composite problem together with the solver
/// relaxation/damping pair they are evaluated for.
struct ProblemConstants {
    double lf = 0.0;     // gradient Lipschitz constant of f
    double lh = 0.0;     // gradient Lipschitz constant of h
    double rho_f = 0.0;  // weak-convexity modulus of f (rho_f <= lf)
    double rho_g = 0.0;  // weak-convexity modulus of g
    double lambda = 1.0;
    double alpha = 0.5;

    void validate() const;
};

/// Descent coefficient
///   C(gamma, L) = -(lf^2 (1-alpha)/(lambda alpha) + lf lh/(lambda alpha)) gamma
///                 - (2 lf/(lambda alpha) + (1/2 + |1-lambda alpha|/(lambda alpha)) lh
///                    + rho_f L / (2 (L - rho_f)))
///                 + (1/(lambda alpha) - 1/2) / gamma.
double c_coefficient(const ProblemConstants& k, double gamma, double L);

/// Provable stepsize range and per-stepsize descent constant: for every
/// gamma in (0, gamma_max), the envelope decreases by at least
/// (c_at(gamma)/gamma) * ||x^{k+1}-x^k||^2 per iteration.
struct DescentCertificate {
    enum class Case { One, Two };
    Case case_used = Case::Two;
    double gamma_max = 0.0;
    double l_plus = 0.0;      // curvature bound used inside C(., L)
    double c_constant = 0.0;  // Case One: fixed descent constant (NaN otherwise)
    // Intermediates, NaN when not applicable to the selected case.
    double gamma_hat = 0.0;
    double gamma_hat_plus = 0.0;
    double eta_plus = 0.0;
    ProblemConstants inputs;

    double c_at(double gamma) const;
    /// C(gamma, l_plus) regardless of case; with Case One this is the
    /// gamma-dependent constant reported alongside the fixed one.
    double c_coefficient_at(double gamma) const;
};

/// Computes the certificate. Case One applies when
/// (2 - lambda) lf - 2 rho_f >= lambda lh and the concave quadratic
/// C1_hat is positive at gamma_hat = lambda / (2 (lf - rho_f));
/// otherwise the smallest admissible curvature bound L+ is located by
/// bisection on C2_hat(L) = C(lambda/(2(L-rho_f)), L) and cross-checked
/// against the equivalent quadratic in eta = L - rho_f. When f and h
/// carry no curvature at all the stepsize is unconstrained by descent
/// and gamma_max is capped at 1/rho_g (or gamma_ceiling when rho_g = 0).
DescentCertificate descent_bounds(const ProblemConstants& k, double gamma_ceiling = 1e6);

namespace detail {
/// Case One certificate if its applicability condition holds and yields
/// a positive constant; used directly by property tests.
bool descent_case_one(const ProblemConstants& k, DescentCertificate& out);
DescentCertificate descent_case_two(const ProblemConstants& k, double gamma_ceiling);
}  // namespace detail

/// Damping bound for almost-sure avoidance of strict saddles:
///   L1 = 1 + (1 + gamma (lf + lh)) / (1 - gamma rho_g)
///   L2 = (1 + gamma lf + lambda L1) max{1, gamma lf/(1 - gamma lf)}
///        + lambda L1 + gamma lf
/// and any alpha with alpha * L2 < 1 qualifies.
struct EscapeCertificate {
    double l1 = 0.0;
    double l2 = 0.0;
    double alpha_max = 0.0;  // 1 / L2
};

EscapeCertificate escape_bounds(const ProblemConstants& k, double gamma);

/// The experiment stepsize 0.9 * min{1/(lf+lh), 1/rho_g}. Not
/// certificate-backed; the provable range is usually smaller. Returns
/// `fallback` when both lf+lh and rho_g vanish.
double practical_gamma(double lf, double lh, double rho_g, double fallback = 1.0);

/// JSON report {case, gamma_max, c_at_gamma, L1, L2, alpha_max, inputs}.
nlohmann::json certificate_report(const DescentCertificate& dc, const EscapeCertificate& ec,
                                  double gamma);

}  // namespace dys
