#include "buyerlearn/market.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace buyerlearn {

namespace {

constexpr int kMaxSweeps = 20000;
constexpr int kMaxBisections = 200;
constexpr int kMaxBracketGrowth = 200;

// argmax over s = sqrt(x) in (0, 1] of  k s^2 + kappa s - (d/2) s^4, i.e. the
// unique root of  k s + kappa/2 - d s^3  (concave in s, positive at 0).
double coordinate_argmax(double k, double kappa, double d) {
    const double half = 0.5 * kappa;
    if (k + half - d >= 0.0)
        return 1.0;
    double s = 1.0;
    for (int it = 0; it < 200; ++it) {
        const double psi = k * s + half - d * s * s * s;
        const double dpsi = k - 3.0 * d * s * s;
        if (psi >= 0.0 || dpsi >= 0.0)
            break;
        const double next = s - psi / dpsi;
        if (!(next < s) || next <= 0.0)
            break;
        const bool done = s - next <= 4.0 * std::numeric_limits<double>::epsilon() * s;
        s = next;
        if (done)
            break;
    }
    return s * s;
}

class BuyerProblem {
  public:
    BuyerProblem(const BuyerModel &model, const Vector &p)
        : c_(model.feasible), w_(model.a_star - p), kappa_(4.0 / model.mu) {}

    // Maximizer over the box of the Lagrangian with multiplier nu on the
    // quadratic constraint. Warm-started from `x`.
    void maximize(double nu, Vector &x) const {
        const auto n = w_.size();
        const Matrix &p = c_.P();
        const int sweeps = c_.diagonal() ? 1 : kMaxSweeps;
        for (int sweep = 0; sweep < sweeps; ++sweep) {
            double change = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double coupling = c_.q()(i) + p.row(i).dot(x) - p(i, i) * x(i);
                const double k = w_(i) - 2.0 * nu * coupling;
                const double xi = coordinate_argmax(k, kappa_, 2.0 * nu * p(i, i));
                change = std::max(change, std::abs(xi - x(i)));
                x(i) = xi;
            }
            if (c_.diagonal() || change <= 1e-15)
                return;
        }
        throw Error(ErrorCode::SolverFailure, "buyer coordinate ascent did not converge");
    }

    double slack(const Vector &x) const { return c_.constraint_value(x); }

    double objective(const Vector &x) const { return w_.dot(x) + kappa_ * x.array().sqrt().sum(); }

  private:
    const FeasibleSet &c_;
    Vector w_;
    double kappa_;
};

} // namespace

BuyerSolution solve_buyer(const BuyerModel &model, const Vector &p, double tol) {
    const auto n = model.a_star.size();
    if (p.size() != n)
        throw Error(ErrorCode::InvalidArgument, "price has wrong dimension");
    if (!p.allFinite())
        throw Error(ErrorCode::InvalidArgument, "price has non-finite entries");
    BuyerProblem problem(model, p);

    Vector x = Vector::Constant(n, 0.5);
    problem.maximize(0.0, x);
    if (problem.slack(x) <= 0.0)
        return {x, problem.objective(x)};

    // The quadratic constraint binds: find its multiplier. The slack of the
    // Lagrangian maximizer is nonincreasing in nu.
    double lo = 0.0;
    double hi = 1.0;
    Vector x_hi = x;
    problem.maximize(hi, x_hi);
    for (int grow = 0; problem.slack(x_hi) > 0.0; ++grow) {
        if (grow > kMaxBracketGrowth)
            throw Error(ErrorCode::SolverFailure, "could not bracket the buyer's constraint multiplier");
        lo = hi;
        hi *= 4.0;
        problem.maximize(hi, x_hi);
    }
    Vector x_mid = x_hi;
    for (int it = 0; it < kMaxBisections && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        problem.maximize(mid, x_mid);
        if (problem.slack(x_mid) > 0.0) {
            lo = mid;
        } else {
            hi = mid;
            x_hi = x_mid;
        }
    }
    // Duality gap of the returned feasible point: nu * |slack|.
    const double gap = hi * std::abs(problem.slack(x_hi));
    if (!(gap <= tol))
        throw Error(ErrorCode::SolverFailure, "buyer solve ended with duality gap " + std::to_string(gap));
    return {x_hi, problem.objective(x_hi)};
}

BuyerOracle::BuyerOracle(BuyerModel model, RealisticPriceSpace prices, double solver_tol)
    : model_(std::move(model)), prices_(std::move(prices)), solver_tol_(solver_tol) {
    if (model_.a_star.size() != prices_.dim())
        throw Error(ErrorCode::InvalidArgument, "buyer model and price space dimensions disagree");
    if (!(solver_tol_ > 0.0))
        throw Error(ErrorCode::InvalidArgument, "solver tolerance must be positive");
}

Vector BuyerOracle::respond(const Vector &p) {
    if (p.size() != prices_.dim() || !prices_.contains(p))
        throw Error(ErrorCode::UnrealisticPrice, "posted price lies outside the realistic price space");
    Vector bundle = solve_buyer(model_, p, solver_tol_).bundle;
    ++interactions_;
    return bundle;
}

} // namespace buyerlearn
