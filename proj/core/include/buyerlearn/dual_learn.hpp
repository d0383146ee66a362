#pragma once

#include "buyerlearn/market.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace buyerlearn {

/// Value of the Lagrange dual g at the starting price. A real seller has no
/// way to observe it; the shipped implementation reads it off the simulation.
class InitialDualValueProvider {
  public:
    virtual ~InitialDualValueProvider() = default;
    virtual double initial_value(const Vector &x_hat, const Vector &p1) const = 0;
};

/// Simulation privilege: evaluates g(p1) with the ground-truth buyer model.
class SimulatedInitialDualValue final : public InitialDualValueProvider {
  public:
    explicit SimulatedInitialDualValue(BuyerModel model) : model_(std::move(model)) {}
    double initial_value(const Vector &x_hat, const Vector &p1) const override;

  private:
    BuyerModel model_;
};

/// A target bundle whose value is learned through posted prices.
struct DualProblem {
    Vector x_hat;
    Vector p1;
    double g_p1 = 0.0;
    BuyerOracle *oracle = nullptr;

    /// Starts at the median price p0 and asks `provider` for g(p0).
    DualProblem(Vector target, BuyerOracle &buyer, const InitialDualValueProvider &provider);
};

struct TrajectoryStep {
    Vector price;
    Vector bundle;
    double step_length = 0.0;
};

struct LearnValueResult {
    double g_tilde = 0.0;
    Vector p_final;
    std::uint64_t iterations_used = 0;
    std::vector<TrajectoryStep> trajectory;
};

/// Number of price updates for a value-learning call.
struct StepBudget {
    std::uint64_t statement = 0; // ceil(50 gamma2 mu2 / (tau - R^2 gamma2)), used by learn_value
    std::uint64_t proof = 0;     // ceil((gamma2 + mu2) / (2 (tau - R^2 gamma2))), logged for comparison
};

/// Throws InfeasibleBudget when tau <= R^2 gamma2.
StepBudget step_budget(double tau, double gamma2, double mu2, double radius);

struct LearnValueOptions {
    std::uint64_t max_interactions = std::numeric_limits<std::uint64_t>::max();
    bool record_trajectory = true;
};

/// g(p) = max_{x in C} U'(x) - p^T x + p^T x_hat, evaluated with the ground truth.
double dual_value(const BuyerModel &model, const Vector &x_hat, const Vector &p);

/// Gradient of g at p given the bundle purchased there: x_hat - x*(p).
Vector dual_gradient(const Vector &x_hat, const Vector &purchased);

/**
 * Projected gradient descent on g over the realistic price space with
 * constant step length 1/T. Each step posts one price to the oracle. Returns
 * the smoothness-corrected telescoped estimate of g at the last posted price.
 */
LearnValueResult learn_value(DualProblem &problem, double tau, double gamma2, double mu2, double radius,
                             const LearnValueOptions &options = {});

} // namespace buyerlearn
