#pragma once

#include "buyerlearn/dual_learn.hpp"
#include "buyerlearn/geometry.hpp"
#include "buyerlearn/market.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace buyerlearn {

struct LearnerConfig {
    double epsilon = 0.1;
    double r_a = 1.0; // initial shape R_a * I centered at 0
    SellerKnowledge knowledge;
    /// Outer-iteration cap; 0 selects the worst-case iteration bound.
    std::uint64_t max_outer_iterations = 0;
    /// Cap on the per-call interaction count T of value learning.
    std::uint64_t max_interactions = 1'000'000;

    LearnerConfig(double eps, double ra, SellerKnowledge know) : epsilon(eps), r_a(ra), knowledge(std::move(know)) {}

    Eigen::Index dim() const noexcept { return knowledge.dim(); }
};

struct ValidatedBudget {
    double tau = 0.0;
    StepBudget steps;               // T per value-learning call
    std::uint64_t outer_cap = 0;    // worst-case number of cuts
    std::uint64_t interaction_bound = 0; // outer_cap * T (saturating)
    double max_cut_depth = 0.0;     // worst-case depth of a shallow cut
};

/// ceil(20 n^2 ln(20 R_a (n+1) / eps)).
std::uint64_t outer_iteration_bound(Eigen::Index n, double r_a, double epsilon);

/// R^2 gamma2 < tau <= eps/(4n); throws InfeasibleParameters otherwise.
void check_tau_chain(double tau, double r2_gamma2, double epsilon, Eigen::Index n);

/**
 * Checks R^2 gamma2 < tau <= eps/(4n), the shallow-cut depth bound
 * 4 sqrt(n gamma1)/mu1 + 2 tau <= eps/(2n), and T <= max_interactions.
 * Throws InfeasibleParameters (or InfeasibleBudget for the T cap) naming the
 * violated inequality.
 */
ValidatedBudget validate(const LearnerConfig &config);

struct BundleChoice {
    Vector bundle;
    double objective = 0.0;    // sqrt(x^T A x) at the returned bundle
    double dual_bound = 0.0;   // sqrt of the best face stationary value
    double primal_bound = 0.0; // sqrt of the multistart ascent value
};

/// argmax over C of x^T A x. Enumerates the 3^n faces of the box and on each
/// solves the secular equation of the quadratic constraint for every KKT
/// multiplier, then cross-checks with multistart projected ascent
/// (SolverFailure beyond 1e-6). Requires n <= 10 and P positive definite.
BundleChoice select_bundle(const Ellipsoid &e, const FeasibleSet &c);

enum class CutBranch { Central, Shallow };

std::string_view to_string(CutBranch branch) noexcept;

struct HalfspaceChoice {
    Halfspace halfspace;
    CutBranch branch = CutBranch::Central;
    double depth = 0.0; // 0 for the central branch
};

/// Central cut {x^T a <= x^T c} when g_tilde <= x^T c, otherwise the shallow
/// cut {x^T a >= x^T c - delta} with delta = (4/mu1) sum sqrt(x_i) + 2 tau.
HalfspaceChoice choose_halfspace(const Ellipsoid &e, const Vector &x, double g_tilde, double mu1, double tau);

struct IterationRecord {
    std::uint64_t iter = 0;
    std::uint64_t interactions = 0; // cumulative
    double g_tilde = 0.0;
    CutBranch branch = CutBranch::Central;
    double delta = 0.0;
    double alpha = 0.0;
    double vol_factor = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double term_lhs = 0.0; // 2 sqrt(x^T A_{t+1} x) for the next probe
    Vector probe;
    Matrix shape; // ellipsoid after the cut
    Vector center;
    double select_gap = 0.0; // |dual - primal| of the next probe selection
};

struct RunLog {
    ValidatedBudget budget;
    std::vector<IterationRecord> iterations;
    std::string termination;
};

struct LearnOutcome {
    Ellipsoid final_ellipsoid;
    RunLog log;
};

using IterationObserver = std::function<void(const IterationRecord &)>;

/// Shrinks E(R_a I, 0) until max_{x in C} 2 sqrt(x^T A x) <= eps. The observer
/// (optional) sees every record as it is produced, also on runs that later fail.
LearnOutcome learn_utility(const LearnerConfig &config, BuyerOracle &oracle, const InitialDualValueProvider &provider,
                           const IterationObserver &observer = {});

} // namespace buyerlearn
