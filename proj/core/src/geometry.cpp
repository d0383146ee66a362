#include "buyerlearn/geometry.hpp"

#include <cmath>

namespace buyerlearn {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kContainsSlack = 1e-9;
constexpr double kDepthTol = 1e-12;

double quad_form(const Matrix &a, const Vector &x) { return x.dot(a * x); }

void require_same_dim(const Ellipsoid &e, const Vector &v, const char *what) {
    if (v.size() != e.dim())
        throw Error(ErrorCode::InvalidArgument, std::string(what) + " has wrong dimension");
}

} // namespace

Ellipsoid::Ellipsoid(Matrix shape, Vector center) : shape_(std::move(shape)), center_(std::move(center)) {
    const auto n = center_.size();
    if (n == 0 || shape_.rows() != n || shape_.cols() != n)
        throw Error(ErrorCode::InvalidArgument, "ellipsoid shape/center dimensions disagree");
    if (!shape_.allFinite() || !center_.allFinite())
        throw Error(ErrorCode::InvalidArgument, "ellipsoid has non-finite entries");
    const double scale = shape_.cwiseAbs().maxCoeff();
    if ((shape_ - shape_.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale)
        throw Error(ErrorCode::InvalidArgument, "ellipsoid shape is not symmetric");
    Eigen::LLT<Matrix> llt(shape_);
    if (llt.info() != Eigen::Success || scale == 0.0)
        throw Error(ErrorCode::NotPositiveDefinite, "ellipsoid shape is not positive definite");
}

Ellipsoid Ellipsoid::ball(Eigen::Index n, double radius_sq, Vector center) {
    return Ellipsoid(radius_sq * Matrix::Identity(n, n), std::move(center));
}

Halfspace::Halfspace(Vector u, double b) : normal(std::move(u)), offset(b) {
    if (normal.size() == 0 || normal.isZero(0.0))
        throw Error(ErrorCode::ZeroDirection, "halfspace normal is zero");
}

Halfspace Halfspace::at_least(const Vector &u, double b) { return Halfspace(-u, -b); }

bool Halfspace::contains(const Vector &a, double slack) const { return normal.dot(a) <= offset + slack; }

ExtremalPoints extremal_points(const Ellipsoid &e, const Vector &x) {
    require_same_dim(e, x, "direction");
    if (x.isZero(0.0))
        throw Error(ErrorCode::ZeroDirection, "extremal points need a nonzero direction");
    const Vector ax = e.shape() * x;
    const double width = std::sqrt(x.dot(ax));
    Vector b = ax / width;
    return {e.center() + b, e.center() - b, std::move(b)};
}

ValueInterval value_interval(const Ellipsoid &e, const Vector &x) {
    require_same_dim(e, x, "direction");
    if (x.isZero(0.0))
        throw Error(ErrorCode::ZeroDirection, "value interval needs a nonzero direction");
    const double mid = x.dot(e.center());
    const double half = std::sqrt(quad_form(e.shape(), x));
    return {mid - half, mid + half};
}

double cut_depth(const Ellipsoid &e, const Halfspace &h) {
    require_same_dim(e, h.normal, "halfspace normal");
    return (h.normal.dot(e.center()) - h.offset) / std::sqrt(quad_form(e.shape(), h.normal));
}

Ellipsoid cut(const Ellipsoid &e, const Halfspace &h) {
    const auto n = e.dim();
    if (n < 2)
        throw Error(ErrorCode::DimensionTooSmall, "ellipsoid cuts need n >= 2");
    const double nd = static_cast<double>(n);
    const double alpha = cut_depth(e, h);
    if (alpha >= 1.0)
        throw Error(ErrorCode::EmptyIntersection, "halfspace misses the ellipsoid (alpha=" + std::to_string(alpha) + ")");
    if (alpha < -1.0 / nd - kDepthTol)
        throw Error(ErrorCode::CutTooShallow,
                    "cut depth alpha=" + std::to_string(alpha) + " is below -1/n; no volume reduction possible");
    if (alpha <= -1.0 / nd)
        return e;

    const Matrix &a = e.shape();
    const Vector au = a * h.normal;
    const Vector b = au / std::sqrt(h.normal.dot(au));

    const double shift = (1.0 + nd * alpha) / (nd + 1.0);
    const double rank_one = 2.0 * (1.0 + nd * alpha) / ((nd + 1.0) * (1.0 + alpha));
    const double scale = nd * nd / (nd * nd - 1.0) * (1.0 - alpha * alpha);

    Matrix next = scale * (a - rank_one * b * b.transpose());
    next = 0.5 * (next + next.transpose()).eval();
    // The kept side is normal^T a <= offset, so the center moves against b.
    return Ellipsoid(std::move(next), e.center() - shift * b);
}

bool contains(const Ellipsoid &e, const Vector &a) {
    require_same_dim(e, a, "point");
    const Vector d = a - e.center();
    Eigen::LLT<Matrix> llt(e.shape());
    return d.dot(llt.solve(d)) <= 1.0 + kContainsSlack;
}

SpectralBounds spectral_bounds(const Ellipsoid &e) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(e.shape(), Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success)
        throw Error(ErrorCode::SolverFailure, "eigendecomposition did not converge");
    const Vector &ev = eig.eigenvalues();
    if (ev(0) <= 0.0)
        throw Error(ErrorCode::NotPositiveDefinite, "shape has a nonpositive eigenvalue");
    return {ev(0), ev(ev.size() - 1), ev.array().sqrt().prod()};
}

} // namespace buyerlearn
