#include "buyerlearn/learner.hpp"
#include "buyerlearn/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>

namespace buyerlearn {

namespace {

constexpr double kAgreementTol = 1e-6;
constexpr double kBoxTol = 1e-12;
constexpr int kRandomStarts = 8;
constexpr int kAscentIterations = 5000;
constexpr std::uint64_t kStartSeed = 0x5eedb0dd1e5ULL;

struct FaceCandidate {
    Vector bundle;
    double value = 0.0;  // x^T A x at the recovered point
    double lambda = 0.0; // multiplier of the quadratic constraint
};

enum class Fix : std::uint8_t { Free, Zero, One };

// Bisect [a, b] down to a few ulps.
bool wide(double a, double b) { return b - a > 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b)) && b > a; }

// Roots of a strictly convex f on [lo, hi] (at most two).
void convex_roots(const std::function<double(double)> &f, const std::function<double(double)> &df, double lo,
                  double hi, std::vector<double> &out) {
    auto bisect = [&](double a, double b, bool increasing) {
        for (int it = 0; it < 2000 && wide(a, b); ++it) {
            const double mid = 0.5 * (a + b);
            ((f(mid) > 0.0) == increasing ? b : a) = mid;
        }
        out.push_back(0.5 * (a + b));
    };
    // Minimizer of f via the monotone derivative.
    double a = lo;
    double b = hi;
    for (int it = 0; it < 2000 && wide(a, b); ++it) {
        const double mid = 0.5 * (a + b);
        (df(mid) > 0.0 ? b : a) = mid;
    }
    const double m = 0.5 * (a + b);
    if (!(f(m) < 0.0))
        return;
    if (f(lo) > 0.0)
        bisect(lo, m, false);
    if (f(hi) > 0.0)
        bisect(m, hi, true);
}

// KKT points of max x^T A x over C restricted to a face of the box
// (coordinates fixed at 0 or 1, the rest free). With the fixed part
// substituted the face problem is
//   max  y^T A_F y + 2 b^T y + c0   s.t.  y^T P_F y + 2 q^T y + r <= 0.
// Whitening with P_F = L L^T and A-eigenpairs (theta_i, v_i) of L^-1 A_F L^-T
// turns the stationarity condition (A_F - lambda P_F) y = lambda q - b into
// z_i = -(w_i + s_i / (lambda - theta_i)), and the active constraint into the
// secular equation
//   sum_i s_i^2 / (lambda - theta_i)^2 + r - |w|^2 = 0,
// which is convex between consecutive poles. Every root with lambda >= 0 is
// a candidate; the one with lambda >= theta_max is the face's global maximizer
// (-A_F + lambda P_F PSD). Points outside the box are dropped.
void solve_face(const Matrix &a_full, const FeasibleSet &c, const std::vector<Fix> &fix,
                std::vector<FaceCandidate> &out) {
    const auto n = c.dim();
    std::vector<Eigen::Index> free, ones;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (fix[i] == Fix::Free)
            free.push_back(i);
        else if (fix[i] == Fix::One)
            ones.push_back(i);
    }
    Vector x = Vector::Zero(n);
    for (auto i : ones)
        x(i) = 1.0;
    if (free.empty()) {
        if (c.constraint_value(x) <= 0.0)
            out.push_back({x, x.dot(a_full * x), 0.0});
        return;
    }

    const auto k = static_cast<Eigen::Index>(free.size());
    Matrix a(k, k), p(k, k);
    Vector b(k), q(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto fi = free[i];
        b(i) = 0.0;
        q(i) = c.q()(fi);
        for (auto j : ones) {
            b(i) += a_full(fi, j);
            q(i) += c.P()(fi, j);
        }
        for (Eigen::Index j = 0; j < k; ++j) {
            a(i, j) = a_full(fi, free[j]);
            p(i, j) = c.P()(fi, free[j]);
        }
    }
    const double r = c.constraint_value(x);

    const Eigen::LLT<Matrix> chol(p);
    if (chol.info() != Eigen::Success)
        throw Error(ErrorCode::SolverFailure, "face constraint matrix is not positive definite");
    const Matrix l_inv = chol.matrixL().solve(Matrix::Identity(k, k));
    Matrix m = l_inv * a * l_inv.transpose();
    m = 0.5 * (m + m.transpose()).eval();
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(m);
    if (eig.info() != Eigen::Success)
        throw Error(ErrorCode::SolverFailure, "eigendecomposition did not converge");
    const Vector &theta = eig.eigenvalues();
    const Matrix &v = eig.eigenvectors();
    const Vector w = v.transpose() * (l_inv * q);
    const Vector s = theta.cwiseProduct(w) - v.transpose() * (l_inv * b);
    const double k0 = r - w.squaredNorm();
    if (!(k0 < 0.0))
        return; // the face misses the interior of C

    const double scale = std::max({1.0, s.cwiseAbs().maxCoeff(), theta.cwiseAbs().maxCoeff()});
    std::vector<Eigen::Index> poles;
    for (Eigen::Index i = 0; i < k; ++i)
        if (std::abs(s(i)) > 1e-13 * scale)
            poles.push_back(i);

    auto f = [&](double lambda) {
        double sum = k0;
        for (auto i : poles)
            sum += s(i) * s(i) / ((lambda - theta(i)) * (lambda - theta(i)));
        return sum;
    };
    auto df = [&](double lambda) {
        double sum = 0.0;
        for (auto i : poles)
            sum -= 2.0 * s(i) * s(i) / std::pow(lambda - theta(i), 3);
        return sum;
    };
    auto emit = [&](const Vector &z, double lambda) {
        const Vector y = l_inv.transpose() * (v * z);
        if (y.minCoeff() < -kBoxTol || y.maxCoeff() > 1.0 + kBoxTol)
            return;
        Vector xf = x;
        for (Eigen::Index i = 0; i < k; ++i)
            xf(free[i]) = std::clamp(y(i), 0.0, 1.0);
        if (c.constraint_value(xf) > 1e-9)
            return;
        out.push_back({xf, xf.dot(a_full * xf), lambda});
    };
    auto stationary = [&](double lambda) {
        Vector z(k);
        for (Eigen::Index i = 0; i < k; ++i)
            z(i) = std::abs(lambda - theta(i)) > 0.0 ? -(w(i) + s(i) / (lambda - theta(i))) : -w(i);
        return z;
    };

    // Regular roots, interval by interval between the poles at or above 0.
    std::vector<double> edges{0.0};
    for (auto i : poles)
        if (theta(i) > 0.0)
            edges.push_back(theta(i));
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    std::vector<double> roots;
    for (std::size_t e = 0; e < edges.size(); ++e) {
        const double lo = e == 0 ? 0.0 : edges[e] * (1.0 + 1e-15) + 1e-300;
        if (e + 1 < edges.size()) {
            const double hi = edges[e + 1] * (1.0 - 1e-15);
            if (hi <= lo)
                continue;
            convex_roots(f, df, lo, hi, roots);
        } else {
            // Right of the last pole f decreases to k0 < 0: exactly one root
            // when f(lo) > 0.
            if (!(f(lo) > 0.0))
                continue;
            double hi = std::max(2.0 * lo, 1.0);
            for (int grow = 0; f(hi) > 0.0 && grow < 2000; ++grow)
                hi *= 2.0;
            double a0 = lo, b0 = hi;
            for (int it = 0; it < 2000 && wide(a0, b0); ++it) {
                const double mid = 0.5 * (a0 + b0);
                (f(mid) > 0.0 ? a0 : b0) = mid;
            }
            roots.push_back(0.5 * (a0 + b0));
        }
    }
    for (double lambda : roots)
        emit(stationary(lambda), lambda);

    // Hard case: lambda equal to an eigenvalue whose s vanishes. The free
    // component along that eigenvector closes the constraint.
    for (Eigen::Index i = 0; i < k; ++i) {
        if (std::abs(s(i)) > 1e-13 * scale || theta(i) < 0.0)
            continue;
        double rest = -k0;
        for (auto j : poles)
            if (theta(j) != theta(i))
                rest -= s(j) * s(j) / ((theta(i) - theta(j)) * (theta(i) - theta(j)));
        if (rest < 0.0)
            continue;
        Vector z = stationary(theta(i));
        for (double sign : {1.0, -1.0}) {
            z(i) = -w(i) + sign * std::sqrt(rest);
            emit(z, theta(i));
        }
    }
}

double ascend(const Matrix &a, const FeasibleSet &c, Vector x, double step) {
    x = project_feasible(c, x);
    for (int it = 0; it < kAscentIterations; ++it) {
        Vector next = project_feasible(c, x + step * (2.0 * a * x));
        const double change = (next - x).cwiseAbs().maxCoeff();
        x = std::move(next);
        if (change < 1e-14)
            break;
    }
    return x.dot(a * x);
}

} // namespace

BundleChoice select_bundle(const Ellipsoid &e, const FeasibleSet &c) {
    const auto n = c.dim();
    if (e.dim() != n)
        throw Error(ErrorCode::InvalidArgument, "ellipsoid and feasible set dimensions disagree");
    if (n > 10)
        throw Error(ErrorCode::InvalidArgument, "bundle selection enumerates the 3^n box faces and supports n <= 10");
    const Matrix &a = e.shape();

    // Faces in order of the number of free coordinates, then of the number
    // fixed at one, then lexicographically, so that ties resolve to the
    // sparsest bundle with the lowest indices.
    std::vector<std::vector<Fix>> faces;
    std::vector<Fix> fix(n, Fix::Zero);
    while (true) {
        faces.push_back(fix);
        Eigen::Index d = 0;
        while (d < n && fix[d] == Fix::One)
            fix[d++] = Fix::Zero;
        if (d == n)
            break;
        fix[d] = fix[d] == Fix::Zero ? Fix::Free : Fix::One;
    }
    auto rank = [](const std::vector<Fix> &f) {
        return std::pair(std::count(f.begin(), f.end(), Fix::Free), std::count(f.begin(), f.end(), Fix::One));
    };
    std::stable_sort(faces.begin(), faces.end(), [&](const auto &l, const auto &r) { return rank(l) < rank(r); });

    std::optional<FaceCandidate> best;
    std::vector<FaceCandidate> candidates;
    for (const auto &face : faces) {
        const std::size_t first = candidates.size();
        solve_face(a, c, face, candidates);
        for (std::size_t i = first; i < candidates.size(); ++i)
            if (!best || candidates[i].value > best->value * (1.0 + 1e-12) + 1e-300)
                best = candidates[i];
    }
    if (!best)
        throw Error(ErrorCode::SolverFailure, "no face of the feasible set yields a stationary point");

    Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
    const double step = 1.0 / std::max(eig.eigenvalues().maxCoeff(), 1e-300);
    double primal = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        primal = std::max(primal, ascend(a, c, Vector::Unit(n, i), step));
    primal = std::max(primal, ascend(a, c, Vector::Ones(n), step));
    for (const FaceCandidate &start : candidates)
        primal = std::max(primal, ascend(a, c, start.bundle, step));
    SplitMix64 rng(kStartSeed);
    for (int s = 0; s < kRandomStarts; ++s) {
        Vector start(n);
        for (Eigen::Index i = 0; i < n; ++i)
            start(i) = rng.uniform();
        primal = std::max(primal, ascend(a, c, start, step));
    }

    BundleChoice choice;
    choice.bundle = best->bundle;
    choice.objective = std::sqrt(std::max(best->value, 0.0));
    choice.dual_bound = std::sqrt(std::max(best->value, 0.0));
    choice.primal_bound = std::sqrt(std::max(primal, 0.0));
    const double gap = std::max(std::abs(choice.dual_bound - choice.primal_bound),
                                std::abs(choice.objective - choice.primal_bound));
    if (gap > kAgreementTol * std::max(1.0, choice.dual_bound))
        throw Error(ErrorCode::SolverFailure, "bundle selection: dual " + std::to_string(choice.dual_bound) +
                                                  " and multistart " + std::to_string(choice.primal_bound) +
                                                  " disagree");
    return choice;
}

} // namespace buyerlearn
