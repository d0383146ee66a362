#include "buyerlearn/dual_learn.hpp"

#include <cmath>

namespace buyerlearn {

namespace {

constexpr double kZeroGradient = 1e-12;

// ceil that ignores representation noise in quotients such as 500 / 0.05.
std::uint64_t ceil_count(double value) {
    if (!(value < 1.8e19))
        return std::numeric_limits<std::uint64_t>::max();
    const double nearest = std::round(value);
    if (std::abs(value - nearest) <= 1e-9 * std::max(1.0, nearest))
        return static_cast<std::uint64_t>(nearest);
    return static_cast<std::uint64_t>(std::ceil(value));
}

} // namespace

double SimulatedInitialDualValue::initial_value(const Vector &x_hat, const Vector &p1) const {
    return dual_value(model_, x_hat, p1);
}

DualProblem::DualProblem(Vector target, BuyerOracle &buyer, const InitialDualValueProvider &provider)
    : x_hat(std::move(target)), p1(buyer.prices().p0()), oracle(&buyer) {
    if (x_hat.size() != buyer.dim())
        throw Error(ErrorCode::InvalidArgument, "target bundle has wrong dimension");
    if (!buyer.feasible().contains(x_hat))
        throw Error(ErrorCode::InvalidArgument, "target bundle is not feasible");
    g_p1 = provider.initial_value(x_hat, p1);
}

StepBudget step_budget(double tau, double gamma2, double mu2, double radius) {
    const double margin = tau - radius * radius * gamma2;
    if (!(margin > 0.0))
        throw Error(ErrorCode::InfeasibleBudget, "value learning needs tau > R^2 gamma2 (tau=" + std::to_string(tau) +
                                                     ", R^2 gamma2=" + std::to_string(radius * radius * gamma2) + ")");
    return {ceil_count(50.0 * gamma2 * mu2 / margin), ceil_count((gamma2 + mu2) / (2.0 * margin))};
}

double dual_value(const BuyerModel &model, const Vector &x_hat, const Vector &p) {
    if (x_hat.size() != p.size())
        throw Error(ErrorCode::InvalidArgument, "target bundle and price dimensions disagree");
    const BuyerSolution s = solve_buyer(model, p);
    return perturbed_utility(model, s.bundle) - p.dot(s.bundle) + p.dot(x_hat);
}

Vector dual_gradient(const Vector &x_hat, const Vector &purchased) {
    if (x_hat.size() != purchased.size())
        throw Error(ErrorCode::InvalidArgument, "bundle dimensions disagree");
    return x_hat - purchased;
}

LearnValueResult learn_value(DualProblem &problem, double tau, double gamma2, double mu2, double radius,
                             const LearnValueOptions &options) {
    if (problem.oracle == nullptr)
        throw Error(ErrorCode::InvalidArgument, "dual problem has no buyer oracle");
    BuyerOracle &oracle = *problem.oracle;
    const std::uint64_t steps = step_budget(tau, gamma2, mu2, radius).statement;
    if (steps > options.max_interactions)
        throw Error(ErrorCode::InfeasibleBudget, "value learning needs T=" + std::to_string(steps) +
                                                     " interactions, above the cap " +
                                                     std::to_string(options.max_interactions));
    const RealisticPriceSpace &prices = oracle.prices();
    const double step = 1.0 / static_cast<double>(steps);

    LearnValueResult result;
    if (options.record_trajectory)
        result.trajectory.reserve(steps);

    Vector p = problem.p1;
    double linear = 0.0;
    double quadratic = 0.0;
    for (std::uint64_t t = 1; t <= steps; ++t) {
        const Vector bundle = oracle.respond(p);
        const Vector grad = dual_gradient(problem.x_hat, bundle);
        const double gnorm = grad.norm();
        Vector next = gnorm < kZeroGradient ? p : project_price(prices, p - (step / gnorm) * grad);
        const Vector move = next - p;
        const double length = move.norm();
        // The estimate telescopes over the first T-1 moves; p_T is the last posted price.
        if (t < steps) {
            linear += grad.dot(move);
            quadratic += length * length;
        }
        if (options.record_trajectory)
            result.trajectory.push_back({p, bundle, length});
        if (t == steps)
            result.p_final = p;
        p = std::move(next);
    }
    result.g_tilde = problem.g_p1 + linear + 0.5 * mu2 * quadratic;
    result.iterations_used = steps;
    return result;
}

} // namespace buyerlearn
