#pragma once

#include <Eigen/Core>

#include "dys/errors.hpp"

namespace dys {

enum class PenaltyKind { Zero, L1, Mcp, Scad, Ridge, Box };

/// A separable prox-friendly penalty g. The closed-form proximal
/// operators are the workhorses of the splitting iterations; every
/// closed form is validated against the brute-force 1-D oracle below.
///
/// Parameterizations:
///   L1:    tau * |t|
///   MCP:   tau*|t| - t^2/(2*theta) on |t| <= theta*tau, else theta*tau^2/2
///   SCAD:  tau*|t| on |t| <= tau,
///          (2*theta*tau*|t| - t^2 - tau^2) / (2*(theta-1)) on tau < |t| <= theta*tau,
///          tau^2*(theta+1)/2 beyond (requires theta > 2)
///   Ridge: (c/2) * t^2
///   Box:   indicator of [lo, hi]
/// The whole term is multiplied by `scale`, so g = scale * P.
struct ProxTerm {
    PenaltyKind kind = PenaltyKind::Zero;
    double tau = 0.0;    // penalty level (L1 / MCP / SCAD)
    double theta = 0.0;  // concavity parameter (MCP: > 0, SCAD: > 2)
    double c = 0.0;      // ridge weight
    double lo = 0.0;     // box bounds
    double hi = 0.0;
    double scale = 1.0;

    static ProxTerm zero();
    static ProxTerm l1(double tau, double scale = 1.0);
    static ProxTerm mcp(double tau, double theta, double scale = 1.0);
    static ProxTerm scad(double tau, double theta, double scale = 1.0);
    static ProxTerm ridge(double c, double scale = 1.0);
    static ProxTerm box(double lo, double hi);

    /// Throws ParameterOutOfRange on malformed parameters.
    void validate() const;
};

/// Weak-convexity modulus rho of the term: g + (rho/2)|.|^2 is convex.
/// Zero for the convex kinds, scale/theta for MCP, scale/(theta-1) for SCAD.
double weak_convexity_modulus(const ProxTerm& term);

/// Scalar penalty value; +inf outside a box.
double penalty_value(const ProxTerm& term, double t);

/// Separable vector value: sum of scalar values.
double penalty_value(const ProxTerm& term, const Eigen::VectorXd& x);

/// argmin_t  g(t) + (1/(2*gamma)) (t - z)^2, in closed form.
/// Requires gamma > 0 and gamma * weak_convexity_modulus < 1.
double prox_scalar(const ProxTerm& term, double gamma, double z);

/// Coordinatewise prox.
Eigen::VectorXd prox_vector(const ProxTerm& term, double gamma, const Eigen::VectorXd& z);

/// Brute-force prox: dense grid scan followed by golden-section
/// refinement; accurate to about 1e-8. Independent of the closed forms.
double prox_oracle_1d(const ProxTerm& term, double gamma, double z);

/// Moreau envelope g_gamma(x) = g(p) + (1/(2*gamma)) ||p - x||^2 with
/// p = prox_vector(term, gamma, x).
double moreau_envelope(const ProxTerm& term, double gamma, const Eigen::VectorXd& x);

/// Gradient of the Moreau envelope: (x - prox(x)) / gamma.
Eigen::VectorXd moreau_gradient(const ProxTerm& term, double gamma, const Eigen::VectorXd& x);

}  // namespace dys
