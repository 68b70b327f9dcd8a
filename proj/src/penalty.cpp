#include "dys/penalty.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace dys {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp(double t, double lo, double hi) { return std::min(std::max(t, lo), hi); }

}  // namespace

ProxTerm ProxTerm::zero() { return ProxTerm{}; }

ProxTerm ProxTerm::l1(double tau, double scale) {
    ProxTerm t;
    t.kind = PenaltyKind::L1;
    t.tau = tau;
    t.scale = scale;
    t.validate();
    return t;
}

ProxTerm ProxTerm::mcp(double tau, double theta, double scale) {
    ProxTerm t;
    t.kind = PenaltyKind::Mcp;
    t.tau = tau;
    t.theta = theta;
    t.scale = scale;
    t.validate();
    return t;
}

ProxTerm ProxTerm::scad(double tau, double theta, double scale) {
    ProxTerm t;
    t.kind = PenaltyKind::Scad;
    t.tau = tau;
    t.theta = theta;
    t.scale = scale;
    t.validate();
    return t;
}

ProxTerm ProxTerm::ridge(double c, double scale) {
    ProxTerm t;
    t.kind = PenaltyKind::Ridge;
    t.c = c;
    t.scale = scale;
    t.validate();
    return t;
}

ProxTerm ProxTerm::box(double lo, double hi) {
    ProxTerm t;
    t.kind = PenaltyKind::Box;
    t.lo = lo;
    t.hi = hi;
    t.validate();
    return t;
}

void ProxTerm::validate() const {
    if (!(scale >= 0.0)) throw ParameterOutOfRange("penalty scale must be nonnegative");
    switch (kind) {
        case PenaltyKind::Zero:
            break;
        case PenaltyKind::L1:
            if (!(tau >= 0.0)) throw ParameterOutOfRange("L1 requires tau >= 0");
            break;
        case PenaltyKind::Mcp:
            if (!(tau >= 0.0)) throw ParameterOutOfRange("MCP requires tau >= 0");
            if (!(theta > 0.0)) throw ParameterOutOfRange("MCP requires theta > 0");
            break;
        case PenaltyKind::Scad:
            if (!(tau >= 0.0)) throw ParameterOutOfRange("SCAD requires tau >= 0");
            if (!(theta > 2.0)) throw ParameterOutOfRange("SCAD requires theta > 2");
            break;
        case PenaltyKind::Ridge:
            if (!(c >= 0.0)) throw ParameterOutOfRange("ridge weight must be nonnegative");
            break;
        case PenaltyKind::Box:
            if (!(lo <= hi)) throw ParameterOutOfRange("box requires lo <= hi");
            break;
    }
}

double weak_convexity_modulus(const ProxTerm& term) {
    switch (term.kind) {
        case PenaltyKind::Mcp:
            return term.scale / term.theta;
        case PenaltyKind::Scad:
            return term.scale / (term.theta - 1.0);
        default:
            return 0.0;
    }
}

double penalty_value(const ProxTerm& term, double t) {
    const double a = std::abs(t);
    switch (term.kind) {
        case PenaltyKind::Zero:
            return 0.0;
        case PenaltyKind::L1:
            return term.scale * term.tau * a;
        case PenaltyKind::Mcp: {
            const double tau = term.tau, th = term.theta;
            if (a <= th * tau) return term.scale * (tau * a - t * t / (2.0 * th));
            return term.scale * (th * tau * tau / 2.0);
        }
        case PenaltyKind::Scad: {
            const double tau = term.tau, th = term.theta;
            if (a <= tau) return term.scale * tau * a;
            if (a <= th * tau)
                return term.scale * (2.0 * th * tau * a - t * t - tau * tau) / (2.0 * (th - 1.0));
            return term.scale * tau * tau * (th + 1.0) / 2.0;
        }
        case PenaltyKind::Ridge:
            return term.scale * 0.5 * term.c * t * t;
        case PenaltyKind::Box:
            return (t >= term.lo && t <= term.hi) ? 0.0 : kInf;
    }
    return 0.0;
}

double penalty_value(const ProxTerm& term, const Eigen::VectorXd& x) {
    double v = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) v += penalty_value(term, x[i]);
    return v;
}

namespace {

void check_prox_preconditions(const ProxTerm& term, double gamma) {
    term.validate();
    if (!(gamma > 0.0)) throw ParameterOutOfRange("prox requires gamma > 0");
    const double rho = weak_convexity_modulus(term);
    if (gamma * rho >= 1.0)
        throw ParameterOutOfRange("prox requires gamma * weak_convexity_modulus < 1");
}

}  // namespace

double prox_scalar(const ProxTerm& term, double gamma, double z) {
    check_prox_preconditions(term, gamma);
    const double s = term.scale;
    const double a = std::abs(z);
    const double sgn = (z >= 0.0) ? 1.0 : -1.0;
    switch (term.kind) {
        case PenaltyKind::Zero:
            return z;
        case PenaltyKind::L1: {
            const double t = gamma * s * term.tau;
            return (a <= t) ? 0.0 : sgn * (a - t);
        }
        case PenaltyKind::Mcp: {
            // Firm thresholding. Region boundaries use <= so that each
            // kink belongs to the left-hand branch (branch values agree
            // there).
            const double tau = term.tau, th = term.theta;
            const double t = gamma * s * tau;
            if (a <= t) return 0.0;
            if (a <= th * tau) return sgn * (a - t) / (1.0 - gamma * s / th);
            return z;
        }
        case PenaltyKind::Scad: {
            const double tau = term.tau, th = term.theta;
            const double t = gamma * s * tau;
            if (a <= t) return 0.0;
            if (a <= tau * (1.0 + gamma * s)) return sgn * (a - t);
            if (a <= th * tau)
                return sgn * ((th - 1.0) * a - gamma * s * th * tau) / (th - 1.0 - gamma * s);
            return z;
        }
        case PenaltyKind::Ridge:
            return z / (1.0 + gamma * s * term.c);
        case PenaltyKind::Box:
            return clamp(z, term.lo, term.hi);
    }
    return z;
}

Eigen::VectorXd prox_vector(const ProxTerm& term, double gamma, const Eigen::VectorXd& z) {
    check_prox_preconditions(term, gamma);
    Eigen::VectorXd out(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = prox_scalar(term, gamma, z[i]);
    return out;
}

double prox_oracle_1d(const ProxTerm& term, double gamma, double z) {
    check_prox_preconditions(term, gamma);
    const auto objective = [&](double t) {
        const double d = t - z;
        return penalty_value(term, t) + d * d / (2.0 * gamma);
    };

    const double reach = term.tau * term.theta;  // zero for kinds without tau/theta
    const double radius = 2.0 * (std::abs(z) + gamma * term.scale * reach + 1.0);
    const int n = 4001;
    const double step = 2.0 * radius / (n - 1);

    int best = 0;
    double best_val = kInf;
    for (int i = 0; i < n; ++i) {
        const double t = z - radius + i * step;
        const double v = objective(t);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    if (best == 0 || best == n - 1)
        throw std::logic_error("prox_oracle_1d: search radius too small (minimizer at boundary)");

    // Golden-section refinement on the bracketing interval. The prox
    // objective is strongly convex under gamma*rho < 1, hence unimodal.
    double a = z - radius + (best - 1) * step;
    double b = z - radius + (best + 1) * step;
    const double invphi = 0.6180339887498949;
    double c1 = b - invphi * (b - a);
    double c2 = a + invphi * (b - a);
    double f1 = objective(c1);
    double f2 = objective(c2);
    while (b - a > 1e-11) {
        if (f1 <= f2) {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - invphi * (b - a);
            f1 = objective(c1);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + invphi * (b - a);
            f2 = objective(c2);
        }
    }
    return 0.5 * (a + b);
}

double moreau_envelope(const ProxTerm& term, double gamma, const Eigen::VectorXd& x) {
    const Eigen::VectorXd p = prox_vector(term, gamma, x);
    return penalty_value(term, p) + (p - x).squaredNorm() / (2.0 * gamma);
}

Eigen::VectorXd moreau_gradient(const ProxTerm& term, double gamma, const Eigen::VectorXd& x) {
    return (x - prox_vector(term, gamma, x)) / gamma;
}

}  // namespace dys
