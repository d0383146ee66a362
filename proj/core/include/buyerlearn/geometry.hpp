#pragma once

#include "buyerlearn/types.hpp"

namespace buyerlearn {

/**
 * Ellipsoid over coefficient space:
 *
 *   E(A, c) = { a | (a - c)^T A^{-1} (a - c) <= 1 }
 *
 * A is symmetric positive definite. Instances are immutable; the constructor
 * rejects shapes that are not symmetric (relative 1e-12) or not positive
 * definite.
 */
class Ellipsoid {
  public:
    Ellipsoid(Matrix shape, Vector center);

    /// Ball of squared radius `radius_sq` around `center` (shape radius_sq * I).
    static Ellipsoid ball(Eigen::Index n, double radius_sq, Vector center);

    const Matrix &shape() const noexcept { return shape_; }
    const Vector &center() const noexcept { return center_; }
    Eigen::Index dim() const noexcept { return center_.size(); }

  private:
    Matrix shape_;
    Vector center_;
};

/// Halfspace in canonical form { a | normal^T a <= offset }.
struct Halfspace {
    Vector normal;
    double offset = 0.0;

    Halfspace(Vector u, double b);

    /// { a | u^T a >= b } expressed in canonical form.
    static Halfspace at_least(const Vector &u, double b);

    bool contains(const Vector &a, double slack = 0.0) const;
};

struct ExtremalPoints {
    Vector argmax;
    Vector argmin;
    Vector b; // A x / sqrt(x^T A x)
};

struct ValueInterval {
    double lo = 0.0;
    double hi = 0.0;
};

struct SpectralBounds {
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double volume_factor = 0.0; // sqrt(det A), proportional to volume
};

/// Maximizer and minimizer of x^T a over E. Throws ZeroDirection for x = 0.
ExtremalPoints extremal_points(const Ellipsoid &e, const Vector &x);

/// [min, max] of x^T a over E.
ValueInterval value_interval(const Ellipsoid &e, const Vector &x);

/// Normalized cut depth alpha = (u^T c - b) / sqrt(u^T A u). alpha = 0 is a
/// central cut, alpha < 0 a shallow cut, alpha > 0 a deep cut.
double cut_depth(const Ellipsoid &e, const Halfspace &h);

/// Minimum-volume ellipsoid containing E ∩ H. Requires -1/n <= alpha < 1 and
/// n >= 2. alpha == -1/n returns E unchanged.
Ellipsoid cut(const Ellipsoid &e, const Halfspace &h);

/// Membership with relative slack 1e-9 on the quadratic form.
bool contains(const Ellipsoid &e, const Vector &a);

/// Extreme eigenvalues of A and sqrt(det A).
SpectralBounds spectral_bounds(const Ellipsoid &e);

} // namespace buyerlearn
