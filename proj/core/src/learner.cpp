#include "buyerlearn/learner.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace buyerlearn {

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a)
        return std::numeric_limits<std::uint64_t>::max();
    return a * b;
}

} // namespace

std::string_view to_string(CutBranch branch) noexcept {
    return branch == CutBranch::Central ? "central" : "shallow";
}

std::uint64_t outer_iteration_bound(Eigen::Index n, double r_a, double epsilon) {
    if (n < 1 || !(r_a > 0.0) || !(epsilon > 0.0))
        throw Error(ErrorCode::InvalidArgument, "iteration bound needs n >= 1, R_a > 0, eps > 0");
    const double nn = static_cast<double>(n);
    const double bound = 20.0 * nn * nn * std::log(20.0 * r_a * (nn + 1.0) / epsilon);
    if (!(bound > 1.0))
        return 1;
    return static_cast<std::uint64_t>(std::ceil(bound));
}

void check_tau_chain(double tau, double r2_gamma2, double epsilon, Eigen::Index n) {
    const double upper = epsilon / (4.0 * static_cast<double>(n));
    if (!(r2_gamma2 < tau))
        throw Error(ErrorCode::InfeasibleParameters,
                    "R^2 gamma2 < tau violated (R^2 gamma2=" + fmt(r2_gamma2) + ", tau=" + fmt(tau) + ")");
    if (!(tau <= upper))
        throw Error(ErrorCode::InfeasibleParameters,
                    "tau <= eps/(4n) violated (tau=" + fmt(tau) + ", eps/(4n)=" + fmt(upper) + ")");
}

ValidatedBudget validate(const LearnerConfig &config) {
    const Eigen::Index n = config.dim();
    if (n < 2)
        throw Error(ErrorCode::InfeasibleParameters, "n >= 2 violated (n=" + std::to_string(n) + ")");
    if (!(config.epsilon > 0.0))
        throw Error(ErrorCode::InfeasibleParameters, "eps > 0 violated");
    if (!(config.r_a > 0.0))
        throw Error(ErrorCode::InfeasibleParameters, "R_a > 0 violated");
    const SellerKnowledge &k = config.knowledge;
    if (k.feasible.dim() != n)
        throw Error(ErrorCode::InfeasibleParameters, "feasible set and price space dimensions disagree");

    ValidatedBudget budget;
    try {
        budget.tau = tau_bound(k);
    } catch (const Error &e) {
        throw Error(ErrorCode::InfeasibleParameters, std::string("tau undefined: ") + e.what());
    }
    const double radius = k.prices.radius();
    const double gamma2 = k.feasible.gamma2();
    check_tau_chain(budget.tau, radius * radius * gamma2, config.epsilon, n);

    const double nn = static_cast<double>(n);
    budget.max_cut_depth = 4.0 * std::sqrt(nn * k.feasible.gamma1()) / k.mu1 + 2.0 * budget.tau;
    const double depth_limit = config.epsilon / (2.0 * nn);
    if (!(budget.max_cut_depth <= depth_limit))
        throw Error(ErrorCode::InfeasibleParameters,
                    "shallow-cut depth 4 sqrt(n gamma1)/mu1 + 2 tau <= eps/(2n) violated (depth=" +
                        fmt(budget.max_cut_depth) + ", eps/(2n)=" + fmt(depth_limit) + ")");

    budget.steps = step_budget(budget.tau, gamma2, k.mu2, radius);
    budget.outer_cap = outer_iteration_bound(n, config.r_a, config.epsilon);
    budget.interaction_bound = saturating_mul(budget.outer_cap, budget.steps.statement);
    if (budget.steps.statement > config.max_interactions)
        throw Error(ErrorCode::InfeasibleBudget, "value learning needs T=" + std::to_string(budget.steps.statement) +
                                                     " interactions per cut, above the cap " +
                                                     std::to_string(config.max_interactions));
    return budget;
}

HalfspaceChoice choose_halfspace(const Ellipsoid &e, const Vector &x, double g_tilde, double mu1, double tau) {
    if (x.size() != e.dim())
        throw Error(ErrorCode::InvalidArgument, "probe bundle has wrong dimension");
    if (x.isZero(0.0))
        throw Error(ErrorCode::ZeroDirection, "probe bundle is zero");
    const double anchor = x.dot(e.center());
    if (g_tilde <= anchor)
        return {Halfspace(x, anchor), CutBranch::Central, 0.0};
    const double delta = (4.0 / mu1) * x.cwiseMax(0.0).cwiseSqrt().sum() + 2.0 * tau;
    return {Halfspace::at_least(x, anchor - delta), CutBranch::Shallow, delta};
}

LearnOutcome learn_utility(const LearnerConfig &config, BuyerOracle &oracle, const InitialDualValueProvider &provider,
                           const IterationObserver &observer) {
    const ValidatedBudget budget = validate(config);
    const SellerKnowledge &k = config.knowledge;
    const Eigen::Index n = config.dim();
    if (oracle.dim() != n)
        throw Error(ErrorCode::InvalidArgument, "oracle dimension disagrees with the configuration");
    const std::uint64_t cap = config.max_outer_iterations ? config.max_outer_iterations : budget.outer_cap;
    const std::uint64_t start_count = oracle.interaction_count();
    LearnValueOptions options;
    options.max_interactions = config.max_interactions;
    options.record_trajectory = false;

    Ellipsoid e = Ellipsoid::ball(n, config.r_a, Vector::Zero(n));
    RunLog log;
    log.budget = budget;
    BundleChoice probe = select_bundle(e, k.feasible);
    if (probe.bundle.isZero(0.0)) {
        log.termination = "feasible set is {0}";
        return {e, std::move(log)};
    }

    do {
        if (log.iterations.size() >= cap)
            throw Error(ErrorCode::IterationCapExceeded,
                        "no accuracy certificate after " + std::to_string(cap) + " cuts");
        DualProblem problem(probe.bundle, oracle, provider);
        const LearnValueResult value = learn_value(problem, budget.tau, k.feasible.gamma2(), k.mu2, k.prices.radius(),
                                                   options);
        const HalfspaceChoice h = choose_halfspace(e, probe.bundle, value.g_tilde, k.mu1, budget.tau);
        const double alpha = cut_depth(e, h.halfspace);
        e = cut(e, h.halfspace);
        const SpectralBounds spectrum = spectral_bounds(e);
        const BundleChoice next = select_bundle(e, k.feasible);

        IterationRecord rec;
        rec.iter = log.iterations.size() + 1;
        rec.interactions = oracle.interaction_count() - start_count;
        rec.g_tilde = value.g_tilde;
        rec.branch = h.branch;
        rec.delta = h.depth;
        rec.alpha = alpha;
        rec.vol_factor = spectrum.volume_factor;
        rec.lambda_min = spectrum.lambda_min;
        rec.lambda_max = spectrum.lambda_max;
        rec.term_lhs = 2.0 * next.objective;
        rec.probe = probe.bundle;
        rec.shape = e.shape();
        rec.center = e.center();
        rec.select_gap = std::abs(next.dual_bound - next.primal_bound);
        log.iterations.push_back(rec);
        if (observer)
            observer(log.iterations.back());
        probe = next;
    } while (log.iterations.back().term_lhs > config.epsilon);

    log.termination = "accuracy certificate reached";
    return {e, std::move(log)};
}

} // namespace buyerlearn
