#include "buyerlearn/dual_learn.hpp"
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

bool throws_code(ErrorCode code, auto &&f) {
    try {
        f();
    } catch (const Error &e) {
        return e.code() == code;
    }
    return false;
}

Vector uniform_box(SplitMix64 &rng, const Vector &lo, const Vector &hi) {
    Vector v(lo.size());
    for (Eigen::Index i = 0; i < lo.size(); ++i)
        v(i) = rng.uniform(lo(i), hi(i));
    return v;
}

Vector random_bundle(SplitMix64 &rng, const FeasibleSet &c) {
    return project_feasible(c, uniform_box(rng, Vector::Zero(c.dim()), Vector::Ones(c.dim())));
}

} // namespace

TEST_CASE("step budget") {
    const StepBudget b = step_budget(0.1, 1.0, 10.0, std::sqrt(0.05));
    CHECK(b.statement == 10000);
    CHECK(b.proof == 110);
    CHECK(throws_code(ErrorCode::InfeasibleBudget, [] { step_budget(0.0625, 1.0, 10.0, 0.25); }));
    CHECK(throws_code(ErrorCode::InfeasibleBudget, [] { step_budget(0.01, 1.0, 10.0, 1.0); }));
}

TEST_CASE("dual value at zero price") {
    const BuyerModel m(vec({1, 1}), 1e6, FeasibleSet::ball(2));
    // Reference from tests/oracle/derive.py.
    CHECK(dual_value(m, vec({0.2, 0.3}), Vector::Zero(2)) == doctest::Approx(1.4142203088258147).epsilon(1e-8));
    const Vector x_hat = solve_buyer(m, Vector::Zero(2)).bundle;
    CHECK(dual_value(m, x_hat, Vector::Zero(2)) == perturbed_utility(m, x_hat));
}

TEST_CASE("dual gradient") {
    CHECK((dual_gradient(vec({0.5, 0.5}), vec({0.25, 0.75})) - vec({0.25, -0.25})).norm() == 0.0);
    CHECK(dual_gradient(vec({0.3, 0.1}), vec({0.3, 0.1})).norm() == 0.0);
}

TEST_CASE("weak duality, convexity and smoothness of g") {
    SplitMix64 rng(99);
    for (int inst = 0; inst < 10; ++inst) {
        const double mu = rng.uniform(1.0, 50.0);
        const BuyerModel m(uniform_box(rng, Vector::Zero(2), Vector::Constant(2, 0.7)), mu, FeasibleSet::ball(2));
        const RealisticPriceSpace prices(vec({0.6, 0.6}), vec({0.4, 0.4}));
        for (int s = 0; s < 30; ++s) {
            const Vector x_hat = random_bundle(rng, m.feasible);
            const Vector p = uniform_box(rng, prices.lower(), prices.upper());
            const Vector q = uniform_box(rng, prices.lower(), prices.upper());
            const double t = rng.uniform();
            const double gp = dual_value(m, x_hat, p);
            const double gq = dual_value(m, x_hat, q);
            CHECK(gp - perturbed_utility(m, x_hat) >= -1e-8);
            CHECK(dual_value(m, x_hat, t * p + (1 - t) * q) <= t * gp + (1 - t) * gq + 1e-8);
            const Vector grad = dual_gradient(x_hat, solve_buyer(m, p).bundle);
            CHECK(gq <= gp + grad.dot(q - p) + 0.5 * mu * (q - p).squaredNorm() + 1e-8);
        }
    }
}

TEST_CASE("dual gradient matches central differences") {
    SplitMix64 rng(5);
    const double h = 1e-5;
    for (int s = 0; s < 50; ++s) {
        const BuyerModel m(uniform_box(rng, Vector::Zero(2), Vector::Constant(2, 0.7)), rng.uniform(1.0, 20.0),
                           FeasibleSet::ball(2));
        const Vector p = uniform_box(rng, Vector::Constant(2, 0.2), Vector::Constant(2, 1.0));
        const Vector x_hat = random_bundle(rng, m.feasible);
        const Vector bought = solve_buyer(m, p).bundle;
        const Vector analytic = dual_gradient(x_hat, bought);
        for (Eigen::Index i = 0; i < 2; ++i) {
            const Vector e = h * Vector::Unit(2, i);
            const double fd = (dual_value(m, x_hat, p + e) - dual_value(m, x_hat, p - e)) / (2 * h);
            const double scale = std::max({std::abs(analytic(i)), x_hat(i), bought(i)});
            CHECK(std::abs(fd - analytic(i)) <= 1e-4 * scale);
        }
    }
}

TEST_CASE("dual problem validates its target") {
    BuyerOracle oracle(BuyerModel(vec({1, 0.5}), 10.0, FeasibleSet::ball(2)), RealisticPriceSpace(vec({1, 0.5}), vec({0.1, 0.05})));
    const SimulatedInitialDualValue provider(BuyerModel(vec({1, 0.5}), 10.0, FeasibleSet::ball(2)));
    CHECK(throws_code(ErrorCode::InvalidArgument, [&] { DualProblem(vec({0.9, 0.9}), oracle, provider); }));
    const DualProblem ok(vec({0.6, 0.5}), oracle, provider);
    CHECK((ok.p1 - vec({1, 0.5})).norm() == 0.0);
    CHECK(ok.g_p1 == dual_value(BuyerModel(vec({1, 0.5}), 10.0, FeasibleSet::ball(2)), vec({0.6, 0.5}), vec({1, 0.5})));
    CHECK(oracle.interaction_count() == 0);
}

TEST_CASE("learn value on a desk instance") {
    const BuyerModel model(vec({1, 0.5}), 1e4, FeasibleSet::ball(2));
    const RealisticPriceSpace prices(vec({1, 0.5}), vec({0.1, 0.05}));
    const SellerKnowledge know(1e4, 1e4, 1.0, 0.5, model.feasible, prices);
    const double tau = tau_bound(know);
    BuyerOracle oracle(model, prices);
    const SimulatedInitialDualValue provider(model);
    const Vector x_hat = vec({0.6, 0.5});
    DualProblem problem(x_hat, oracle, provider);

    const LearnValueResult r = learn_value(problem, tau, model.feasible.gamma2(), know.mu2, prices.radius());
    const std::uint64_t steps = step_budget(tau, model.feasible.gamma2(), know.mu2, prices.radius()).statement;
    CHECK(r.iterations_used == steps);
    CHECK(oracle.interaction_count() == steps);
    REQUIRE(r.trajectory.size() == steps);
    const double gamma = 1.0 / static_cast<double>(steps);
    for (const auto &step : r.trajectory) {
        CHECK(prices.contains(step.price));
        // Differences of O(1) prices carry absolute rounding error of about 1e-16.
        CHECK(step.step_length <= gamma + 1e-15);
    }

    // Grid minimum of g over the price box (200 x 200).
    double grid_min = 1e300;
    for (int i = 0; i < 200; ++i)
        for (int j = 0; j < 200; ++j) {
            const Vector p = prices.lower() + (prices.upper() - prices.lower()).cwiseProduct(vec({i / 199.0, j / 199.0}));
            grid_min = std::min(grid_min, dual_value(model, x_hat, p));
        }
    const double u = perturbed_utility(model, x_hat);
    CHECK(r.g_tilde - grid_min <= tau);
    CHECK(u <= r.g_tilde);
    CHECK(r.g_tilde <= u + 2 * tau);
}

TEST_CASE("learn value refuses budgets above the cap") {
    const BuyerModel model(vec({1, 0.5}), 1e4, FeasibleSet::ball(2));
    const RealisticPriceSpace prices(vec({1, 0.5}), vec({0.1, 0.05}));
    BuyerOracle oracle(model, prices);
    const SimulatedInitialDualValue provider(model);
    DualProblem problem(vec({0.6, 0.5}), oracle, provider);
    LearnValueOptions options;
    options.max_interactions = 1000;
    CHECK(throws_code(ErrorCode::InfeasibleBudget, [&] { learn_value(problem, 1.0, 1.0, 1e4, prices.radius(), options); }));
    CHECK(oracle.interaction_count() == 0);
}
