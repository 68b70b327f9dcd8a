#include "dys/smooth.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "dys/rng.hpp"

namespace dys {

QuadraticTerm::QuadraticTerm(Eigen::MatrixXd A, Eigen::VectorXd b)
    : A_(std::move(A)), b_(std::move(b)) {
    if (A_.rows() != b_.size()) throw InvalidDimensions("QuadraticTerm: A rows != b size");
    AtA_.noalias() = A_.transpose() * A_;
    Atb_.noalias() = A_.transpose() * b_;
    lip_ = spectral_norm_sq(A_).value;
}

double QuadraticTerm::value(const Eigen::VectorXd& x) const {
    return 0.5 * (A_ * x - b_).squaredNorm();
}

Eigen::VectorXd QuadraticTerm::gradient(const Eigen::VectorXd& x) const {
    return AtA_ * x - Atb_;
}

Eigen::VectorXd QuadraticTerm::hess_vec(const Eigen::VectorXd&, const Eigen::VectorXd& v) const {
    return AtA_ * v;
}

Eigen::VectorXd QuadraticTerm::prox(double gamma, const Eigen::VectorXd& z) const {
    if (!(gamma > 0.0)) throw ParameterOutOfRange("prox requires gamma > 0");
    std::shared_ptr<Eigen::LLT<Eigen::MatrixXd>> llt;
    {
        std::lock_guard<std::mutex> lock(cache_mutex_);
        auto it = prox_cache_.find(gamma);
        if (it == prox_cache_.end()) {
            Eigen::MatrixXd M = gamma * AtA_;
            M.diagonal().array() += 1.0;
            auto fact = std::make_shared<Eigen::LLT<Eigen::MatrixXd>>(M);
            if (fact->info() != Eigen::Success)
                throw FactorizationFailure("QuadraticTerm::prox: I + gamma A'A not SPD");
            it = prox_cache_.emplace(gamma, std::move(fact)).first;
        }
        llt = it->second;
    }
    return llt->solve(z + gamma * Atb_);
}

DiagQuadraticTerm::DiagQuadraticTerm(Eigen::VectorXd diag) : diag_(std::move(diag)) {
    lip_ = diag_.size() ? diag_.cwiseAbs().maxCoeff() : 0.0;
    rho_ = diag_.size() ? std::max(0.0, -diag_.minCoeff()) : 0.0;
}

DiagQuadraticTerm::DiagQuadraticTerm(Eigen::Index d, double coeff)
    : DiagQuadraticTerm(Eigen::VectorXd::Constant(d, coeff)) {}

double DiagQuadraticTerm::value(const Eigen::VectorXd& x) const {
    return 0.5 * diag_.dot(x.cwiseProduct(x));
}

Eigen::VectorXd DiagQuadraticTerm::gradient(const Eigen::VectorXd& x) const {
    return diag_.cwiseProduct(x);
}

Eigen::VectorXd DiagQuadraticTerm::hess_vec(const Eigen::VectorXd&,
                                            const Eigen::VectorXd& v) const {
    return diag_.cwiseProduct(v);
}

Eigen::VectorXd DiagQuadraticTerm::prox(double gamma, const Eigen::VectorXd& z) const {
    if (!(gamma > 0.0)) throw ParameterOutOfRange("prox requires gamma > 0");
    if (gamma * rho_ >= 1.0)
        throw ParameterOutOfRange("DiagQuadraticTerm::prox: gamma * rho >= 1");
    return z.array() / (1.0 + gamma * diag_.array());
}

QuarticTerm::QuarticTerm(Eigen::Index d, double box_radius) : d_(d), box_radius_(box_radius) {
    if (!(box_radius > 0.0)) throw ParameterOutOfRange("QuarticTerm: box radius must be positive");
    // Largest Hessian norm over the validity box, by grid sampling.
    double m = 0.0;
    const int n = 201;
    for (int i = 0; i < n; ++i) {
        const double t = -box_radius + 2.0 * box_radius * i / (n - 1);
        m = std::max(m, 3.0 * t * t);
    }
    lip_ = m;
}

double QuarticTerm::value(const Eigen::VectorXd& x) const {
    return 0.25 * x.array().pow(4).sum();
}

Eigen::VectorXd QuarticTerm::gradient(const Eigen::VectorXd& x) const {
    return x.array().cube();
}

Eigen::VectorXd QuarticTerm::hess_vec(const Eigen::VectorXd& x, const Eigen::VectorXd& v) const {
    return 3.0 * x.array().square() * v.array();
}

Eigen::VectorXd QuarticTerm::prox(double gamma, const Eigen::VectorXd& z) const {
    if (!(gamma > 0.0)) throw ParameterOutOfRange("prox requires gamma > 0");
    // Solve gamma t^3 + t = z coordinatewise: the map is strictly
    // increasing, so Newton with a bisection safeguard converges.
    Eigen::VectorXd out(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double zi = z[i];
        double lo = std::min(0.0, zi), hi = std::max(0.0, zi);
        double t = zi / (1.0 + 3.0 * gamma * zi * zi);
        bool ok = false;
        for (int it = 0; it < 100; ++it) {
            const double r = gamma * t * t * t + t - zi;
            if (std::abs(r) <= 1e-12 * (1.0 + std::abs(zi))) {
                ok = true;
                break;
            }
            if (r > 0.0) hi = t; else lo = t;
            const double dr = 3.0 * gamma * t * t + 1.0;
            double tn = t - r / dr;
            if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
            t = tn;
        }
        if (!ok) throw InnerSolverFailure("QuarticTerm::prox: Newton did not converge");
        out[i] = t;
    }
    return out;
}

namespace {

class SumSmooth final : public SmoothTerm {
  public:
    SumSmooth(SmoothPtr f, SmoothPtr h) : f_(std::move(f)), h_(std::move(h)) {
        if (f_->dim() != h_->dim()) throw InvalidDimensions("sum_smooth: dimension mismatch");
    }
    Eigen::Index dim() const override { return f_->dim(); }
    double value(const Eigen::VectorXd& x) const override { return f_->value(x) + h_->value(x); }
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override {
        return f_->gradient(x) + h_->gradient(x);
    }
    bool has_hess_vec() const override { return f_->has_hess_vec() && h_->has_hess_vec(); }
    Eigen::VectorXd hess_vec(const Eigen::VectorXd& x, const Eigen::VectorXd& v) const override {
        return f_->hess_vec(x, v) + h_->hess_vec(x, v);
    }
    double lipschitz() const override { return f_->lipschitz() + h_->lipschitz(); }
    double weak_convexity() const override { return f_->weak_convexity() + h_->weak_convexity(); }

  private:
    SmoothPtr f_;
    SmoothPtr h_;
};

}  // namespace

SmoothPtr sum_smooth(SmoothPtr f, SmoothPtr h) {
    return std::make_shared<SumSmooth>(std::move(f), std::move(h));
}

SpectralResult spectral_norm_sq(const Eigen::MatrixXd& A) {
    SpectralResult res;
    if (A.size() == 0 || A.norm() == 0.0) return res;
    const Eigen::MatrixXd AtA = A.transpose() * A;
    Rng rng(0x5eed5eedULL);
    Eigen::VectorXd v(AtA.cols());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
    v.normalize();
    double lam = 0.0;
    for (int it = 0; it < 10000; ++it) {
        Eigen::VectorXd w = AtA * v;
        const double lam_new = v.dot(w);
        const double nw = w.norm();
        res.iterations = it + 1;
        if (nw == 0.0) {
            res.value = 0.0;
            return res;
        }
        v = w / nw;
        if (it > 0 && std::abs(lam_new - lam) <= 1e-10 * std::abs(lam_new)) {
            res.value = lam_new;
            return res;
        }
        lam = lam_new;
    }
    res.value = lam;
    res.converged = false;
    return res;
}

}  // namespace dys
