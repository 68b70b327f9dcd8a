#include "dys/tuning.hpp"

#include <cmath>
#include <limits>

namespace dys {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

void ProblemConstants::validate() const {
    if (!(lf >= 0.0) || !(lh >= 0.0)) throw ParameterOutOfRange("constants: lf, lh must be >= 0");
    if (!(rho_f >= 0.0 && rho_f <= lf))
        throw ParameterOutOfRange("constants: need 0 <= rho_f <= lf");
    if (!(rho_g >= 0.0)) throw ParameterOutOfRange("constants: rho_g must be >= 0");
    if (!(lambda > 0.0)) throw ParameterOutOfRange("constants: lambda must be positive");
    if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterOutOfRange("constants: alpha in (0, 1]");
    if (!(lambda * alpha < 2.0)) throw ParameterOutOfRange("constants: lambda*alpha < 2 required");
}

double c_coefficient(const ProblemConstants& k, double gamma, double L) {
    if (!(gamma > 0.0)) throw ParameterOutOfRange("c_coefficient: gamma must be positive");
    if (L < k.rho_f || (L == k.rho_f && k.rho_f > 0.0))
        throw ParameterOutOfRange("c_coefficient: L > rho_f required");
    const double la = k.lambda * k.alpha;
    const double curvature = (k.rho_f > 0.0) ? k.rho_f * L / (2.0 * (L - k.rho_f)) : 0.0;
    const double slope = k.lf * k.lf / k.lambda * (1.0 - k.alpha) / k.alpha + k.lf * k.lh / la;
    const double offset =
        2.0 * k.lf / la + (0.5 + std::abs(1.0 - la) / la) * k.lh + curvature;
    return -slope * gamma - offset + (1.0 / la - 0.5) / gamma;
}

double DescentCertificate::c_at(double gamma) const {
    if (!(gamma > 0.0 && gamma < gamma_max))
        throw ParameterOutOfRange("certificate: gamma outside (0, gamma_max)");
    if (case_used == Case::One) return c_constant;
    // The inequality provides a per-step decrease of C(gamma, L+) times
    // the squared step; dividing by gamma in the merit inequality means
    // the certified constant carries a factor gamma (case one already
    // folds that factor into C1_hat).
    return gamma * c_coefficient(inputs, gamma, l_plus);
}

double DescentCertificate::c_coefficient_at(double gamma) const {
    return c_coefficient(inputs, gamma, l_plus);
}

namespace detail {

bool descent_case_one(const ProblemConstants& k, DescentCertificate& out) {
    if (!((2.0 - k.lambda) * k.lf - 2.0 * k.rho_f >= k.lambda * k.lh)) return false;
    if (!(k.lf > k.rho_f)) return false;
    const double la = k.lambda * k.alpha;
    const double gamma_hat = k.lambda / (2.0 * (k.lf - k.rho_f));
    // C1_hat(t) = -a t^2 - b t + c, the concave quadratic obtained by
    // folding the gradient-difference term into C(t, lf).
    const double a = (k.lf * k.lf + k.lf * k.lh) / la;
    const double b = 2.0 * k.lf / la + (0.5 + std::abs(1.0 - la) / la) * k.lh +
                     k.rho_f * k.lf / (2.0 * (k.lf - k.rho_f)) -
                     k.lf * k.lf / (2.0 * (k.lf - k.rho_f));
    const double c = 1.0 / la - 0.5;
    const double c1 = -a * gamma_hat * gamma_hat - b * gamma_hat + c;
    if (!(c1 > 0.0)) return false;
    out.case_used = DescentCertificate::Case::One;
    out.gamma_hat = gamma_hat;
    out.gamma_hat_plus = (-b + std::sqrt(b * b + 4.0 * a * c)) / (2.0 * a);
    out.gamma_max = std::min(out.gamma_hat_plus, gamma_hat);
    out.l_plus = k.lf;
    out.c_constant = c1;
    out.eta_plus = kNaN;
    out.inputs = k;
    return true;
}

DescentCertificate descent_case_two(const ProblemConstants& k, double gamma_ceiling) {
    DescentCertificate cert;
    cert.case_used = DescentCertificate::Case::Two;
    cert.gamma_hat = kNaN;
    cert.gamma_hat_plus = kNaN;
    cert.c_constant = kNaN;
    cert.inputs = k;

    if (k.lf == 0.0 && k.lh == 0.0) {
        // No smooth curvature to fight: C(gamma, .) = (1/(la)-1/2)/gamma > 0
        // for every gamma, so only the prox admissibility of g binds.
        cert.l_plus = 0.0;
        cert.eta_plus = 0.0;
        cert.gamma_max = (k.rho_g > 0.0) ? 1.0 / k.rho_g : gamma_ceiling;
        return cert;
    }

    const auto c2_hat = [&](double eta) {
        return c_coefficient(k, k.lambda / (2.0 * eta), k.rho_f + eta);
    };

    // Bracket the sign change of C2_hat geometrically, then bisect.
    double eta_hi = std::max(k.lf - k.rho_f, 1.0);
    int grow = 0;
    while (c2_hat(eta_hi) < 0.0) {
        eta_hi *= 2.0;
        if (++grow > 200) throw NoCertificate("descent_bounds: no admissible curvature bound");
    }
    double eta_lo = eta_hi * 0.5;
    int shrink = 0;
    while (c2_hat(eta_lo) >= 0.0) {
        eta_hi = eta_lo;
        eta_lo *= 0.5;
        if (++shrink > 1000) throw NoCertificate("descent_bounds: C2_hat has no sign change");
    }
    while (eta_hi - eta_lo > 1e-12) {
        const double mid = 0.5 * (eta_lo + eta_hi);
        if (c2_hat(mid) >= 0.0)
            eta_hi = mid;
        else
            eta_lo = mid;
    }
    const double eta_bisect = eta_hi;

    // Cross-check against the quadratic obtained by substituting
    // L = eta + rho_f into 4 eta^2 C2_hat (the two must agree).
    const double la = k.lambda * k.alpha;
    const double qa = 4.0 * (1.0 / la - 0.5);
    const double qb = -2.0 * (2.0 * k.lf / k.alpha +
                              (k.lambda / 2.0 + std::abs(1.0 - la) / k.alpha) * k.lh) -
                      k.lambda * k.rho_f;
    const double qc = -k.lambda * (k.rho_f * k.rho_f +
                                   k.lf * k.lf * (1.0 - k.alpha) / k.alpha +
                                   k.lf * k.lh / k.alpha);
    const double eta_quadratic = (-qb + std::sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa);
    if (std::abs(eta_bisect - eta_quadratic) > 1e-6 * (1.0 + std::abs(eta_quadratic)))
        throw NoCertificate("descent_bounds: root cross-check failed");

    cert.eta_plus = eta_bisect;
    cert.l_plus = std::max(k.lf, k.rho_f + eta_bisect);
    cert.gamma_max = k.lambda / (2.0 * (cert.l_plus - k.rho_f));
    return cert;
}

}  // namespace detail

DescentCertificate descent_bounds(const ProblemConstants& k, double gamma_ceiling) {
    k.validate();
    DescentCertificate cert;
    if (detail::descent_case_one(k, cert)) return cert;
    cert = detail::descent_case_two(k, gamma_ceiling);
    if (!(cert.gamma_max > 0.0)) throw NoCertificate("descent_bounds: empty stepsize range");
    return cert;
}

EscapeCertificate escape_bounds(const ProblemConstants& k, double gamma) {
    k.validate();
    if (!(gamma > 0.0)) throw ParameterOutOfRange("escape_bounds: gamma must be positive");
    if (!(gamma * k.lf < 1.0)) throw ParameterOutOfRange("escape_bounds: gamma * lf < 1 required");
    if (!(gamma * k.rho_g < 1.0))
        throw ParameterOutOfRange("escape_bounds: gamma * rho_g < 1 required");
    EscapeCertificate ec;
    ec.l1 = 1.0 + (1.0 + gamma * (k.lf + k.lh)) / (1.0 - gamma * k.rho_g);
    const double expand = (k.lf > 0.0)
                              ? std::max(1.0, gamma * k.lf / (1.0 - gamma * k.lf))
                              : 1.0;
    ec.l2 = (1.0 + gamma * k.lf + k.lambda * ec.l1) * expand + k.lambda * ec.l1 + gamma * k.lf;
    ec.alpha_max = 1.0 / ec.l2;
    return ec;
}

double practical_gamma(double lf, double lh, double rho_g, double fallback) {
    double m = std::numeric_limits<double>::infinity();
    if (lf + lh > 0.0) m = std::min(m, 1.0 / (lf + lh));
    if (rho_g > 0.0) m = std::min(m, 1.0 / rho_g);
    if (!std::isfinite(m)) return fallback;
    return 0.9 * m;
}

nlohmann::json certificate_report(const DescentCertificate& dc, const EscapeCertificate& ec,
                                  double gamma) {
    nlohmann::json j;
    j["case"] = dc.case_used == DescentCertificate::Case::One ? "case_one" : "case_two";
    j["gamma_max"] = dc.gamma_max;
    j["c_at_gamma"] = dc.c_at(gamma);
    j["c_coefficient_at_gamma"] = dc.c_coefficient_at(gamma);
    j["L1"] = ec.l1;
    j["L2"] = ec.l2;
    j["alpha_max"] = ec.alpha_max;
    j["inputs"] = {{"lf", dc.inputs.lf},       {"lh", dc.inputs.lh},
                   {"rho_f", dc.inputs.rho_f}, {"rho_g", dc.inputs.rho_g},
                   {"lambda", dc.inputs.lambda}, {"alpha", dc.inputs.alpha},
                   {"gamma", gamma}};
    return j;
}

}  // namespace dys
