#pragma once

#include <Eigen/Core>
#include <map>
#include <memory>
#include <mutex>

#include "dys/errors.hpp"

namespace dys {

/// A smooth term with certified constants: L is a Lipschitz constant of
/// the gradient, weak_convexity() a modulus rho such that the term plus
/// (rho/2)||.||^2 is convex. Terms are immutable after construction.
class SmoothTerm {
  public:
    virtual ~SmoothTerm() = default;

    virtual Eigen::Index dim() const = 0;
    virtual double value(const Eigen::VectorXd& x) const = 0;
    virtual Eigen::VectorXd gradient(const Eigen::VectorXd& x) const = 0;

    virtual bool has_hess_vec() const { return false; }
    virtual Eigen::VectorXd hess_vec(const Eigen::VectorXd&, const Eigen::VectorXd&) const {
        throw CapabilityError("smooth term has no Hessian-vector product");
    }

    virtual double lipschitz() const = 0;
    virtual double weak_convexity() const = 0;

    virtual bool has_prox() const { return false; }
    /// argmin_y value(y) + (1/(2*gamma)) ||y - z||^2.
    virtual Eigen::VectorXd prox(double /*gamma*/, const Eigen::VectorXd& /*z*/) const {
        throw CapabilityError("smooth term has no proximal operator");
    }
};

using SmoothPtr = std::shared_ptr<const SmoothTerm>;

/// The identically-zero term.
class ZeroSmooth final : public SmoothTerm {
  public:
    explicit ZeroSmooth(Eigen::Index d) : d_(d) {}
    Eigen::Index dim() const override { return d_; }
    double value(const Eigen::VectorXd&) const override { return 0.0; }
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override {
        return Eigen::VectorXd::Zero(x.size());
    }
    bool has_hess_vec() const override { return true; }
    Eigen::VectorXd hess_vec(const Eigen::VectorXd& x, const Eigen::VectorXd&) const override {
        return Eigen::VectorXd::Zero(x.size());
    }
    double lipschitz() const override { return 0.0; }
    double weak_convexity() const override { return 0.0; }
    bool has_prox() const override { return true; }
    Eigen::VectorXd prox(double, const Eigen::VectorXd& z) const override { return z; }

  private:
    Eigen::Index d_;
};

/// Affine least squares (1/2) ||A x - b||^2. The prox solves the ridge
/// system (I + gamma A'A) y = z + gamma A'b through a Cholesky
/// factorization cached per stepsize (write-once, then read-only).
class QuadraticTerm final : public SmoothTerm {
  public:
    QuadraticTerm(Eigen::MatrixXd A, Eigen::VectorXd b);

    Eigen::Index dim() const override { return A_.cols(); }
    double value(const Eigen::VectorXd& x) const override;
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override;
    bool has_hess_vec() const override { return true; }
    Eigen::VectorXd hess_vec(const Eigen::VectorXd& x, const Eigen::VectorXd& v) const override;
    double lipschitz() const override { return lip_; }
    double weak_convexity() const override { return 0.0; }
    bool has_prox() const override { return true; }
    Eigen::VectorXd prox(double gamma, const Eigen::VectorXd& z) const override;

    const Eigen::MatrixXd& matrix() const { return A_; }
    const Eigen::VectorXd& rhs() const { return b_; }

  private:
    Eigen::MatrixXd A_;
    Eigen::VectorXd b_;
    Eigen::MatrixXd AtA_;
    Eigen::VectorXd Atb_;
    double lip_ = 0.0;
    mutable std::mutex cache_mutex_;
    mutable std::map<double, std::shared_ptr<Eigen::LLT<Eigen::MatrixXd>>> prox_cache_;
};

/// Diagonal quadratic (1/2) sum_i d_i x_i^2; d_i may be negative, which
/// makes the term weakly convex with modulus max(0, -min d_i).
class DiagQuadraticTerm final : public SmoothTerm {
  public:
    explicit DiagQuadraticTerm(Eigen::VectorXd diag);
    /// Uniform coefficient: (coeff/2) ||x||^2 in dimension d.
    DiagQuadraticTerm(Eigen::Index d, double coeff);

    Eigen::Index dim() const override { return diag_.size(); }
    double value(const Eigen::VectorXd& x) const override;
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override;
    bool has_hess_vec() const override { return true; }
    Eigen::VectorXd hess_vec(const Eigen::VectorXd&, const Eigen::VectorXd& v) const override;
    double lipschitz() const override { return lip_; }
    double weak_convexity() const override { return rho_; }
    bool has_prox() const override { return true; }
    Eigen::VectorXd prox(double gamma, const Eigen::VectorXd& z) const override;

  private:
    Eigen::VectorXd diag_;
    double lip_ = 0.0;
    double rho_ = 0.0;
};

/// Separable quartic (1/4) sum_i x_i^4 with constants certified on a
/// validity box [-box_radius, box_radius]^d (the term is not globally
/// L-smooth). The prox solves gamma t^3 + t = z per coordinate by a
/// safeguarded Newton iteration.
class QuarticTerm final : public SmoothTerm {
  public:
    QuarticTerm(Eigen::Index d, double box_radius);

    Eigen::Index dim() const override { return d_; }
    double value(const Eigen::VectorXd& x) const override;
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override;
    bool has_hess_vec() const override { return true; }
    Eigen::VectorXd hess_vec(const Eigen::VectorXd& x, const Eigen::VectorXd& v) const override;
    double lipschitz() const override { return lip_; }
    double weak_convexity() const override { return 0.0; }
    bool has_prox() const override { return true; }
    Eigen::VectorXd prox(double gamma, const Eigen::VectorXd& z) const override;

    double box_radius() const { return box_radius_; }

  private:
    Eigen::Index d_;
    double box_radius_;
    double lip_;
};

/// Aggregate f + h: values, gradients and Hessian products add, the
/// certified constants add conservatively. No exact prox.
SmoothPtr sum_smooth(SmoothPtr f, SmoothPtr h);

struct SpectralResult {
    double value = 0.0;    // largest eigenvalue of A'A, i.e. sigma_max(A)^2
    bool converged = true;
    int iterations = 0;
};

/// Power iteration on A'A to relative tolerance 1e-10 (at most 10000
/// iterations). On non-convergence the best estimate is returned with
/// the flag cleared.
SpectralResult spectral_norm_sq(const Eigen::MatrixXd& A);

}  // namespace dys
