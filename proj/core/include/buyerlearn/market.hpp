#pragma once

#include "buyerlearn/types.hpp"

#include <cstdint>
#include <optional>

namespace buyerlearn {

/**
 * Bundles the buyer may purchase:
 *
 *   C = { x | x^T P x + 2 q^T x + r <= 0 } ∩ [0,1]^n
 *
 * P must be positive semidefinite (C convex) and C nonempty. The box is always
 * part of the set since bundles are fractions of each good. gamma1 and gamma2
 * are upper bounds on the l1 and l2 norms of feasible bundles; when not given
 * they default to the bounds implied by the box.
 */
class FeasibleSet {
  public:
    FeasibleSet(Matrix p, Vector q, double r, std::optional<double> gamma1 = {},
                std::optional<double> gamma2 = {});

    /// {x^T x <= radius^2} ∩ [0,1]^n with exact norm bounds.
    static FeasibleSet ball(Eigen::Index n, double radius = 1.0);

    Eigen::Index dim() const noexcept { return q_.size(); }
    const Matrix &P() const noexcept { return p_; }
    const Vector &q() const noexcept { return q_; }
    double r() const noexcept { return r_; }
    double gamma1() const noexcept { return gamma1_; }
    double gamma2() const noexcept { return gamma2_; }
    constexpr bool box_clip() const noexcept { return true; }

    /// Radius when the quadratic part is a centered ball rho^2 I scaled; empty otherwise.
    std::optional<double> ball_radius() const noexcept { return ball_radius_; }
    /// True when P is diagonal (the buyer solver then needs a single sweep).
    bool diagonal() const noexcept { return diagonal_; }

    /// x^T P x + 2 q^T x + r.
    double constraint_value(const Vector &x) const;
    bool contains(const Vector &x, double tol = 1e-9) const;

    /// Eigendecomposition of P, cached at construction.
    const Vector &p_eigenvalues() const noexcept { return p_eigenvalues_; }
    const Matrix &p_eigenvectors() const noexcept { return p_eigenvectors_; }

  private:
    Matrix p_;
    Vector q_;
    double r_;
    double gamma1_;
    double gamma2_;
    std::optional<double> ball_radius_;
    bool diagonal_ = false;
    Vector p_eigenvalues_;
    Matrix p_eigenvectors_;
};

/// Realistic prices: the orthotope { p | |p_i - p0_i| <= delta_i }.
class RealisticPriceSpace {
  public:
    /// `radius` defaults to ||delta||_2 and must not be smaller.
    RealisticPriceSpace(Vector p0, Vector delta, std::optional<double> radius = {});

    Eigen::Index dim() const noexcept { return p0_.size(); }
    const Vector &p0() const noexcept { return p0_; }
    const Vector &delta() const noexcept { return delta_; }
    double radius() const noexcept { return radius_; }
    Vector lower() const { return p0_ - delta_; }
    Vector upper() const { return p0_ + delta_; }
    bool contains(const Vector &p) const;

  private:
    Vector p0_;
    Vector delta_;
    double radius_;
};

/// Simulation-side ground truth: U(x) = a*^T x with tie-break parameter mu.
struct BuyerModel {
    Vector a_star;
    double mu = 1.0;
    FeasibleSet feasible;

    BuyerModel(Vector a, double mu_, FeasibleSet c);
};

/// What the seller knows about the buyer and the market.
struct SellerKnowledge {
    double mu1 = 1.0;
    double mu2 = 1.0;
    double lambda_val = 0.0;
    double beta = 0.5;
    FeasibleSet feasible;
    RealisticPriceSpace prices;

    SellerKnowledge(double mu1_, double mu2_, double lambda_val_, double beta_, FeasibleSet c,
                    RealisticPriceSpace p);

    Eigen::Index dim() const noexcept { return prices.dim(); }
};

struct PriceBounds {
    double l_bar = 0.0;   // min_i (p0_i + delta_i)
    double l_under = 0.0; // max_i (p0_i - delta_i)
};

struct BuyerSolution {
    Vector bundle;
    double objective = 0.0; // U'(x) - p^T x at the returned bundle
};

inline constexpr double kDefaultSolverTol = 1e-10;

/// U'(x) = a*^T x + (4/mu) sum_i sqrt(x_i). Throws NegativeBundle for x_i < 0.
double perturbed_utility(const BuyerModel &model, const Vector &x);

/// Maximizes U'(x) - p^T x over C using the ground-truth model. Does not count
/// as an interaction; the oracle and the test oracles both call this.
BuyerSolution solve_buyer(const BuyerModel &model, const Vector &p, double tol = kDefaultSolverTol);

/**
 * The seller's only channel to the buyer: post a realistic price, observe the
 * purchased bundle. The ground-truth model is not reachable through this type.
 */
class BuyerOracle {
  public:
    BuyerOracle(BuyerModel model, RealisticPriceSpace prices, double solver_tol = kDefaultSolverTol);

    /// Throws UnrealisticPrice (and does not count the call) when p is outside the price space.
    Vector respond(const Vector &p);

    std::uint64_t interaction_count() const noexcept { return interactions_; }
    const RealisticPriceSpace &prices() const noexcept { return prices_; }
    const FeasibleSet &feasible() const noexcept { return model_.feasible; }
    Eigen::Index dim() const noexcept { return prices_.dim(); }

  private:
    BuyerModel model_;
    RealisticPriceSpace prices_;
    double solver_tol_;
    std::uint64_t interactions_ = 0;
};

Vector best_response(BuyerOracle &oracle, const Vector &p);

/// Euclidean projection onto C (quadratic set ∩ box), Dykstra's scheme.
Vector project_feasible(const FeasibleSet &c, const Vector &y);

/// Componentwise clamp onto the price orthotope.
Vector project_price(const RealisticPriceSpace &prices, const Vector &p);

PriceBounds price_bounds(const RealisticPriceSpace &prices);

/// Additive error bound on the restricted dual optimum induced by realistic prices.
double tau_bound(double lambda_val, double beta, double gamma1, const PriceBounds &bounds);
double tau_bound(const SellerKnowledge &knowledge);

} // namespace buyerlearn
