#include "buyerlearn/geometry.hpp"
#include "buyerlearn/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace buyerlearn;

namespace {

Vector vec(std::initializer_list<double> v) {
    Vector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v)
        out(i++) = x;
    return out;
}

Matrix diag(std::initializer_list<double> v) { return vec(v).asDiagonal(); }

bool throws_code(ErrorCode code, auto &&f) {
    try {
        f();
    } catch (const Error &e) {
        return e.code() == code;
    }
    return false;
}

Ellipsoid random_ellipsoid(SplitMix64 &rng, Eigen::Index n) {
    Matrix b(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            b(i, j) = rng.normal();
    Vector c(n);
    for (Eigen::Index i = 0; i < n; ++i)
        c(i) = rng.normal();
    return {b * b.transpose() + 0.05 * Matrix::Identity(n, n), c};
}

Vector random_normal(SplitMix64 &rng, Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = rng.normal();
    return v;
}

} // namespace

TEST_CASE("ellipsoid rejects asymmetric or indefinite shapes") {
    Matrix asym{{1.0, 0.5}, {0.0, 1.0}};
    CHECK(throws_code(ErrorCode::InvalidArgument, [&] { Ellipsoid(asym, Vector::Zero(2)); }));
    CHECK(throws_code(ErrorCode::NotPositiveDefinite, [&] { Ellipsoid(diag({1.0, -1.0}), Vector::Zero(2)); }));
    CHECK_NOTHROW(Ellipsoid(diag({4.0, 1.0}), vec({1.0, 1.0})));
}

TEST_CASE("extremal points") {
    SUBCASE("unit ball along an axis") {
        const auto pts = extremal_points(Ellipsoid(Matrix::Identity(2, 2), Vector::Zero(2)), vec({1, 0}));
        CHECK((pts.argmax - vec({1, 0})).norm() < 1e-15);
        CHECK((pts.argmin - vec({-1, 0})).norm() < 1e-15);
    }
    SUBCASE("scaled ellipsoid off the origin") {
        const auto pts = extremal_points(Ellipsoid(diag({4, 1}), vec({1, 1})), vec({1, 0}));
        CHECK((pts.b - vec({2, 0})).norm() < 1e-15);
        CHECK((pts.argmax - vec({3, 1})).norm() < 1e-15);
        CHECK((pts.argmin - vec({-1, 1})).norm() < 1e-15);
    }
    SUBCASE("zero direction") {
        CHECK(throws_code(ErrorCode::ZeroDirection,
                          [] { extremal_points(Ellipsoid(Matrix::Identity(2, 2), Vector::Zero(2)), Vector::Zero(2)); }));
    }
}

TEST_CASE("value interval") {
    auto iv = value_interval(Ellipsoid(Matrix::Identity(2, 2), Vector::Zero(2)), vec({1, 0}));
    CHECK(iv.lo == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(iv.hi == doctest::Approx(1.0).epsilon(1e-15));
    iv = value_interval(Ellipsoid(diag({4, 1}), vec({1, 1})), vec({1, 0}));
    CHECK(iv.lo == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(iv.hi == doctest::Approx(3.0).epsilon(1e-15));
    iv = value_interval(Ellipsoid(Matrix::Identity(2, 2), vec({2, 0})), vec({1, 1}));
    CHECK(iv.lo == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-15));
    CHECK(iv.hi == doctest::Approx(2.0 + std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("extremal point value matches the interval end") {
    SplitMix64 rng(11);
    for (int s = 0; s < 200; ++s) {
        const Ellipsoid e = random_ellipsoid(rng, 4);
        const Vector x = random_normal(rng, 4);
        const double hi = value_interval(e, x).hi;
        CHECK(std::abs(x.dot(extremal_points(e, x).argmax) - hi) <= 1e-10 * std::max(1.0, std::abs(hi)));
    }
}

TEST_CASE("central cut of the unit disc") {
    const Ellipsoid e(Matrix::Identity(2, 2), Vector::Zero(2));
    const Halfspace h(vec({1, 0}), 0.0);
    CHECK(cut_depth(e, h) == 0.0);
    const Ellipsoid next = cut(e, h);
    CHECK((next.shape() - diag({4.0 / 9.0, 4.0 / 3.0})).norm() < 1e-15);
    CHECK((next.center() - vec({-1.0 / 3.0, 0.0})).norm() < 1e-15);
}

TEST_CASE("cut at depth -1/n leaves the ellipsoid unchanged") {
    const Ellipsoid e(Matrix::Identity(2, 2), Vector::Zero(2));
    const Ellipsoid next = cut(e, Halfspace(vec({1, 0}), 0.5));
    CHECK((next.shape() - e.shape()).norm() < 1e-15);
    CHECK(next.center().norm() < 1e-15);
}

TEST_CASE("cut error cases") {
    const Ellipsoid e(Matrix::Identity(2, 2), Vector::Zero(2));
    CHECK(throws_code(ErrorCode::EmptyIntersection, [&] { cut(e, Halfspace(vec({1, 0}), -1.5)); }));
    CHECK(throws_code(ErrorCode::CutTooShallow, [&] { cut(e, Halfspace(vec({1, 0}), 0.6)); }));
    CHECK(throws_code(ErrorCode::ZeroDirection, [] { Halfspace(Vector::Zero(2), 1.0); }));
    const Ellipsoid line(Matrix::Identity(1, 1), Vector::Zero(1));
    CHECK(throws_code(ErrorCode::DimensionTooSmall, [&] { cut(line, Halfspace(vec({1}), 0.0)); }));
}

TEST_CASE("deep and shallow cuts match the reference update") {
    // Reference values from tests/oracle/derive.py.
    Ellipsoid next = cut(Ellipsoid(diag({4, 1}), vec({1, 1})), Halfspace(vec({1, 1}), 1.0));
    const Matrix a_ref{{1.2879257728001197, -0.7446852234666367}, {-0.7446852234666367, 0.8804953608000075}};
    CHECK((next.shape() - a_ref).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((next.center() - vec({-0.12961812733327727, 0.7175954681666807})).cwiseAbs().maxCoeff() < 1e-14);

    next = cut(Ellipsoid(Matrix::Identity(3, 3), Vector::Zero(3)), Halfspace::at_least(vec({1, 0, 0}), -0.2));
    CHECK((next.shape() - diag({0.81, 1.08, 1.08})).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((next.center() - vec({0.1, 0, 0})).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("containment") {
    const Ellipsoid e(Matrix::Identity(2, 2), Vector::Zero(2));
    CHECK(contains(e, e.center()));
    CHECK(contains(e, vec({1, 0})));
    CHECK_FALSE(contains(e, vec({1.1, 0})));
    const Ellipsoid f(diag({4, 1}), vec({1, 1}));
    CHECK(contains(f, f.center()));
}

TEST_CASE("spectral bounds") {
    auto s = spectral_bounds(Ellipsoid(diag({4, 1}), Vector::Zero(2)));
    CHECK(s.lambda_min == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.lambda_max == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(s.volume_factor == doctest::Approx(2.0).epsilon(1e-14));
    s = spectral_bounds(Ellipsoid(Matrix::Identity(3, 3), Vector::Zero(3)));
    CHECK(s.lambda_min == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.lambda_max == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.volume_factor == doctest::Approx(1.0).epsilon(1e-14));
    s = spectral_bounds(Ellipsoid(diag({4.0 / 9.0, 4.0 / 3.0}), Vector::Zero(2)));
    CHECK(s.lambda_min == doctest::Approx(4.0 / 9.0).epsilon(1e-14));
    CHECK(s.lambda_max == doctest::Approx(4.0 / 3.0).epsilon(1e-14));
    CHECK(s.volume_factor == doctest::Approx(std::sqrt(16.0 / 27.0)).epsilon(1e-14));
}

TEST_CASE("random cuts keep E ∩ H, shrink volume, shallow ones respect the eigenvalue floor") {
    SplitMix64 rng(2024);
    int checked_points = 0;
    for (int s = 0; s < 300; ++s) {
        const Eigen::Index n = 2 + static_cast<Eigen::Index>(s % 4);
        const double nn = static_cast<double>(n);
        const Ellipsoid e = random_ellipsoid(rng, n);
        const Vector u = random_normal(rng, n);
        const double alpha = rng.uniform(-1.0 / nn, 0.95);
        const Halfspace h(u, u.dot(e.center()) - alpha * std::sqrt(u.dot(e.shape() * u)));
        REQUIRE(cut_depth(e, h) == doctest::Approx(alpha).epsilon(1e-9));
        const Ellipsoid next = cut(e, h);

        CHECK((next.shape() - next.shape().transpose()).norm() == 0.0);
        const SpectralBounds before = spectral_bounds(e);
        const SpectralBounds after = spectral_bounds(next);
        CHECK(after.volume_factor < before.volume_factor);
        if (alpha <= 0.0)
            CHECK(after.lambda_min >= nn * nn / ((nn + 1) * (nn + 1)) * before.lambda_min * (1.0 - 1e-9));

        const Eigen::LLT<Matrix> chol(e.shape());
        for (int m = 0; m < 40; ++m) {
            Vector z = random_normal(rng, n);
            z *= std::pow(rng.uniform(), 1.0 / nn) / z.norm();
            const Vector a = e.center() + chol.matrixL() * z;
            if (h.contains(a)) {
                ++checked_points;
                CHECK(contains(next, a));
            }
        }
    }
    CHECK(checked_points > 1000);
}
