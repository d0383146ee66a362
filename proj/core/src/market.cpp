#include "buyerlearn/market.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace buyerlearn {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr int kDykstraMaxSweeps = 1000;
constexpr double kDykstraTol = 1e-12;

void require_dim(Eigen::Index expected, const Vector &v, const char *what) {
    if (v.size() != expected)
        throw Error(ErrorCode::InvalidArgument, std::string(what) + " has wrong dimension");
}

// min over the box of x^T P x + 2 q^T x + r by exact coordinate descent.
double box_minimum(const Matrix &p, const Vector &q, double r) {
    const auto n = q.size();
    Vector x = Vector::Constant(n, 0.5);
    for (int sweep = 0; sweep < 10000; ++sweep) {
        double change = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double coupling = q(i) + p.row(i).dot(x) - p(i, i) * x(i);
            double xi;
            if (p(i, i) > 0.0)
                xi = std::clamp(-coupling / p(i, i), 0.0, 1.0);
            else
                xi = coupling > 0.0 ? 0.0 : 1.0;
            change = std::max(change, std::abs(xi - x(i)));
            x(i) = xi;
        }
        if (change < 1e-15)
            break;
    }
    return x.dot(p * x) + 2.0 * q.dot(x) + r;
}

} // namespace

FeasibleSet::FeasibleSet(Matrix p, Vector q, double r, std::optional<double> gamma1, std::optional<double> gamma2)
    : p_(std::move(p)), q_(std::move(q)), r_(r) {
    const auto n = q_.size();
    if (n == 0 || p_.rows() != n || p_.cols() != n)
        throw Error(ErrorCode::InvalidArgument, "feasible set P/q dimensions disagree");
    if (!p_.allFinite() || !q_.allFinite() || !std::isfinite(r_))
        throw Error(ErrorCode::InvalidArgument, "feasible set has non-finite entries");
    const double scale = std::max(1.0, p_.cwiseAbs().maxCoeff());
    if ((p_ - p_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale)
        throw Error(ErrorCode::InvalidArgument, "feasible set P is not symmetric");
    p_ = 0.5 * (p_ + p_.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Matrix> eig(p_);
    if (eig.info() != Eigen::Success)
        throw Error(ErrorCode::SolverFailure, "eigendecomposition of P failed");
    p_eigenvalues_ = eig.eigenvalues();
    p_eigenvectors_ = eig.eigenvectors();
    if (p_eigenvalues_(0) < -1e-12 * scale)
        throw Error(ErrorCode::InvalidArgument, "feasible set P must be positive semidefinite");

    Matrix off = p_;
    off.diagonal().setZero();
    diagonal_ = off.isZero(0.0);
    const double rho = p_(0, 0);
    if (diagonal_ && rho > 0.0 && (p_.diagonal().array() == rho).all() && q_.isZero(0.0) && r_ < 0.0)
        ball_radius_ = std::sqrt(-r_ / rho);

    if (box_minimum(p_, q_, r_) > 1e-12 * scale)
        throw Error(ErrorCode::InvalidArgument, "feasible set is empty within [0,1]^n");

    const double nd = static_cast<double>(n);
    double g1 = nd;
    double g2 = std::sqrt(nd);
    if (ball_radius_) {
        g1 = std::min(g1, *ball_radius_ * std::sqrt(nd));
        g2 = std::min(g2, *ball_radius_);
    }
    gamma1_ = gamma1.value_or(g1);
    gamma2_ = gamma2.value_or(g2);
    if (!(gamma1_ > 0.0) || !(gamma2_ > 0.0))
        throw Error(ErrorCode::InvalidArgument, "norm bounds gamma1, gamma2 must be positive");
}

FeasibleSet FeasibleSet::ball(Eigen::Index n, double radius) {
    if (!(radius > 0.0))
        throw Error(ErrorCode::InvalidArgument, "ball radius must be positive");
    return FeasibleSet(Matrix::Identity(n, n), Vector::Zero(n), -radius * radius);
}

double FeasibleSet::constraint_value(const Vector &x) const {
    require_dim(dim(), x, "bundle");
    return x.dot(p_ * x) + 2.0 * q_.dot(x) + r_;
}

bool FeasibleSet::contains(const Vector &x, double tol) const {
    require_dim(dim(), x, "bundle");
    return x.minCoeff() >= -tol && x.maxCoeff() <= 1.0 + tol && constraint_value(x) <= tol;
}

RealisticPriceSpace::RealisticPriceSpace(Vector p0, Vector delta, std::optional<double> radius)
    : p0_(std::move(p0)), delta_(std::move(delta)) {
    if (p0_.size() == 0 || p0_.size() != delta_.size())
        throw Error(ErrorCode::InvalidArgument, "price space p0/delta dimensions disagree");
    if (!p0_.allFinite() || !delta_.allFinite())
        throw Error(ErrorCode::InvalidArgument, "price space has non-finite entries");
    if (delta_.minCoeff() < 0.0)
        throw Error(ErrorCode::InvalidArgument, "price half-widths must be nonnegative");
    if ((p0_ - delta_).minCoeff() < 0.0)
        throw Error(ErrorCode::InvalidArgument, "realistic prices must stay nonnegative (p0 - delta >= 0)");
    radius_ = radius.value_or(delta_.norm());
    if (!(radius_ >= delta_.norm()))
        throw Error(ErrorCode::InvalidArgument, "enclosing radius R must be at least ||delta||_2");
}

bool RealisticPriceSpace::contains(const Vector &p) const {
    require_dim(dim(), p, "price");
    const double tol = 1e-12 * std::max(1.0, p0_.cwiseAbs().maxCoeff());
    return ((p - p0_).cwiseAbs() - delta_).maxCoeff() <= tol;
}

BuyerModel::BuyerModel(Vector a, double mu_, FeasibleSet c) : a_star(std::move(a)), mu(mu_), feasible(std::move(c)) {
    require_dim(feasible.dim(), a_star, "a_star");
    if (a_star.minCoeff() < 0.0)
        throw Error(ErrorCode::InvalidArgument, "true utility coefficients must be nonnegative");
    if (!(mu > 0.0) || !std::isfinite(mu))
        throw Error(ErrorCode::InvalidArgument, "tie-break parameter mu must be positive");
}

SellerKnowledge::SellerKnowledge(double mu1_, double mu2_, double lambda_val_, double beta_, FeasibleSet c,
                                 RealisticPriceSpace p)
    : mu1(mu1_), mu2(mu2_), lambda_val(lambda_val_), beta(beta_), feasible(std::move(c)), prices(std::move(p)) {
    if (!(mu1 > 0.0) || !(mu1 <= mu2) || !std::isfinite(mu2))
        throw Error(ErrorCode::InvalidArgument, "tie-break bounds need 0 < mu1 <= mu2");
    if (!(lambda_val >= 0.0))
        throw Error(ErrorCode::InvalidArgument, "Hoelder constant lambda_val must be nonnegative");
    if (!(beta > 0.0 && beta < 1.0))
        throw Error(ErrorCode::BetaOutOfRange, "Hoelder exponent beta must lie in (0,1)");
    if (feasible.dim() != prices.dim())
        throw Error(ErrorCode::InvalidArgument, "feasible set and price space dimensions disagree");
}

double perturbed_utility(const BuyerModel &model, const Vector &x) {
    require_dim(model.a_star.size(), x, "bundle");
    if (x.minCoeff() < 0.0)
        throw Error(ErrorCode::NegativeBundle, "bundle has a negative component");
    return model.a_star.dot(x) + 4.0 / model.mu * x.array().sqrt().sum();
}

Vector best_response(BuyerOracle &oracle, const Vector &p) { return oracle.respond(p); }

namespace {

// Projection onto {x^T P x + 2 q^T x + r <= 0}: x(nu) = (I + nu P)^{-1} (y - nu q)
// with nu >= 0 chosen so the constraint is tight.
Vector project_quadratic(const FeasibleSet &c, const Vector &y) {
    if (c.constraint_value(y) <= 0.0)
        return y;
    const Matrix &v = c.p_eigenvectors();
    const Vector &lam = c.p_eigenvalues();
    const Vector z = v.transpose() * y;
    const Vector w = v.transpose() * c.q();
    auto point = [&](double nu) -> Vector {
        return ((z - nu * w).array() / (1.0 + nu * lam.array())).matrix();
    };
    auto slack = [&](double nu) {
        const Vector t = point(nu);
        return (lam.array() * t.array().square()).sum() + 2.0 * w.dot(t) + c.r();
    };
    double lo = 0.0;
    double hi = 1.0;
    int grow = 0;
    while (slack(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (++grow > 400)
            throw Error(ErrorCode::ProjectionFailure, "could not bracket the projection multiplier");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-17 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (slack(mid) > 0.0 ? lo : hi) = mid;
    }
    return v * point(hi);
}

} // namespace

Vector project_feasible(const FeasibleSet &c, const Vector &y) {
    require_dim(c.dim(), y, "point");
    if (auto rho = c.ball_radius(); rho && *rho <= 1.0) {
        // Projection onto (cone ∩ centered ball) = ball projection of the cone projection.
        Vector x = y.cwiseMax(0.0);
        const double nrm = x.norm();
        if (nrm > *rho)
            x *= *rho / nrm;
        return x.cwiseMin(1.0);
    }

    Vector x = y;
    Vector p_inc = Vector::Zero(y.size());
    Vector q_inc = Vector::Zero(y.size());
    for (int sweep = 0; sweep < kDykstraMaxSweeps; ++sweep) {
        const Vector yq = project_quadratic(c, x + p_inc);
        p_inc = x + p_inc - yq;
        const Vector xb = (yq + q_inc).cwiseMax(0.0).cwiseMin(1.0);
        q_inc = yq + q_inc - xb;
        const double change = (xb - x).cwiseAbs().maxCoeff();
        const double gap = (xb - yq).cwiseAbs().maxCoeff();
        x = xb;
        if (change <= kDykstraTol && gap <= kDykstraTol)
            return x;
    }
    throw Error(ErrorCode::ProjectionFailure, "Dykstra projection did not converge within the sweep cap");
}

Vector project_price(const RealisticPriceSpace &prices, const Vector &p) {
    require_dim(prices.dim(), p, "price");
    return p.cwiseMax(prices.lower()).cwiseMin(prices.upper());
}

PriceBounds price_bounds(const RealisticPriceSpace &prices) {
    PriceBounds b{prices.upper().minCoeff(), prices.lower().maxCoeff()};
    if (!(b.l_bar > 0.0))
        throw Error(ErrorCode::DegeneratePriceSpace, "all upper price limits must be positive");
    return b;
}

double tau_bound(double lambda_val, double beta, double gamma1, const PriceBounds &bounds) {
    if (!(beta > 0.0 && beta < 1.0))
        throw Error(ErrorCode::BetaOutOfRange, "Hoelder exponent beta must lie in (0,1)");
    if (!(bounds.l_bar > 0.0))
        throw Error(ErrorCode::DegeneratePriceSpace, "upper price bound must be positive");
    const double over = std::pow(2.0 * bounds.l_under * gamma1 / bounds.l_bar, beta);
    const double root = std::pow(lambda_val, 1.0 / (1.0 - beta)) * std::pow(2.0 / bounds.l_bar, beta / (1.0 - beta));
    return std::max(lambda_val * over, root) + bounds.l_under * gamma1;
}

double tau_bound(const SellerKnowledge &knowledge) {
    return tau_bound(knowledge.lambda_val, knowledge.beta, knowledge.feasible.gamma1(), price_bounds(knowledge.prices));
}

} // namespace buyerlearn
