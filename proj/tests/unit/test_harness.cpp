#include "buyerlearn/harness.hpp"
#include "buyerlearn/rng.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>
#include <thread>

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

const char *kRelaxed = R"({
  "n": 2, "seed": 7,
  "buyer": {"a_star": "random", "mu": "random"},
  "knowledge": {"mu1": 60, "mu2": 60, "lambda_val": 0.001, "beta": 0.5},
  "feasible_set": "ball",
  "prices": {"p0": 0.05, "delta": 0.006},
  "learner": {"epsilon": 1.0, "R_a": 1, "max_interactions": 100000}
})";

std::string slurp(const std::filesystem::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::filesystem::path scratch(const std::string &name) {
    auto dir = std::filesystem::temp_directory_path() / ("buyerlearn_test_" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

IterationRecord record(std::uint64_t i) {
    IterationRecord r;
    r.iter = i;
    r.interactions = 1000 * i;
    r.g_tilde = 0.1 / 3.0 * static_cast<double>(i);
    r.branch = i % 2 ? CutBranch::Shallow : CutBranch::Central;
    r.delta = i % 2 ? 1.0 / 7.0 : 0.0;
    r.alpha = -1.0 / (3.0 + static_cast<double>(i));
    r.vol_factor = std::exp(-static_cast<double>(i));
    r.lambda_min = 1e-300;
    r.lambda_max = 123456789.123456789;
    r.term_lhs = std::sqrt(2.0);
    return r;
}

} // namespace

TEST_CASE("config parsing and round trip") {
    const ExperimentConfig c = parse_config(kRelaxed);
    CHECK(c.n == 2);
    CHECK(c.seed == 7);
    CHECK_FALSE(c.buyer.a_star.has_value());
    CHECK(c.feasible_set.ball);
    CHECK((c.prices.p0 - vec({0.05, 0.05})).norm() == 0.0);
    CHECK(c.learner.max_interactions == 100000);
    CHECK(parse_config(dump_config(c)) == c);

    ExperimentConfig d = c;
    d.buyer.a_star = vec({0.1 / 3.0, 0.7});
    d.buyer.mu = 60.0;
    d.feasible_set.ball = false;
    d.feasible_set.P = Matrix{{3.0, 1.0}, {1.0, 2.0}};
    d.feasible_set.q = vec({-1.0 / 3.0, 0.2});
    d.feasible_set.r = -0.75;
    d.feasible_set.gamma1 = 1.5;
    d.prices.radius = 0.1;
    d.output = "out/x";
    const ExperimentConfig back = parse_config(dump_config(d));
    CHECK(back == d);
    CHECK((*back.buyer.a_star - *d.buyer.a_star).norm() == 0.0);
    CHECK((back.feasible_set.P - d.feasible_set.P).norm() == 0.0);

    CHECK(throws_code(ErrorCode::InvalidArgument, [] { parse_config("{\"n\": 2}"); }));
    CHECK(throws_code(ErrorCode::InvalidArgument, [] { parse_config("not json"); }));
}

TEST_CASE("instances are seeded and respect the prior") {
    ExperimentConfig c = parse_config(kRelaxed);
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        c.seed = seed;
        const Instance inst = make_instance(c);
        CHECK(inst.model.a_star.minCoeff() >= 0.0);
        CHECK(inst.model.a_star.squaredNorm() <= c.learner.r_a);
        CHECK(inst.model.mu == 60.0);
    }
    c.seed = 3;
    CHECK((make_instance(c).model.a_star - make_instance(c).model.a_star).norm() == 0.0);
    c.buyer.a_star = vec({1.0, 1.0});
    CHECK(throws_code(ErrorCode::InfeasibleParameters, [&] { make_instance(c); }));
}

TEST_CASE("one-item configs fail validation before any interaction") {
    ExperimentConfig c = parse_config(kRelaxed);
    c.n = 1;
    c.prices.p0 = vec({0.05});
    c.prices.delta = vec({0.006});
    CHECK(throws_code(ErrorCode::InfeasibleParameters, [&] { run_experiment(c); }));
}

TEST_CASE("runs are deterministic and isolated") {
    ExperimentConfig c = parse_config(kRelaxed);
    c.output = scratch("first").string();
    const ExperimentReport first = run_experiment(c);
    CHECK(first.contained);
    CHECK(first.interactions == first.outer_iterations * first.budget.steps.statement);
    CHECK(first.interactions <= first.budget.interaction_bound);

    c.output = scratch("second").string();
    ExperimentReport second;
    std::thread worker([&] { second = run_experiment(c); });
    worker.join();
    CHECK(slurp(first.csv_path) == slurp(second.csv_path));
    CHECK(slurp(first.report_path) == slurp(second.report_path));

    const auto rows = parse_csv(first.csv_path);
    CHECK(rows.size() == first.outer_iterations);
    CHECK(slurp(first.csv_path).find('\r') == std::string::npos);
}

TEST_CASE("csv emission") {
    std::ostringstream empty;
    write_csv(empty, {});
    CHECK(empty.str() == std::string(kCsvHeader) + "\n");

    const std::vector<IterationRecord> recs{record(1), record(2), record(3)};
    std::ostringstream out;
    write_csv(out, recs);
    const std::string text = out.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 4);

    std::istringstream in(text);
    const auto rows = parse_csv(in);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
        CHECK(rows[i] == to_row(recs[i]));

    std::istringstream bad("iter,foo\n");
    CHECK(throws_code(ErrorCode::IoFailure, [&] { parse_csv(bad); }));
}

TEST_CASE("brute-force buyer") {
    const BuyerModel rich(vec({2}), 1e6, FeasibleSet::ball(1));
    CHECK(brute_force_buyer(rich, vec({1}), 1e-3)(0) == 1.0);
    const BuyerModel poor(vec({1}), 1e6, FeasibleSet::ball(1));
    CHECK(brute_force_buyer(poor, vec({10}), 1e-3)(0) <= 1e-3);
    CHECK(throws_code(ErrorCode::InvalidArgument, [&] { brute_force_buyer(poor, vec({10}), 1e-4); }));

    // The solver never loses to the grid. Bundles agree to resolution + 1e-2
    // when the optimum is off the sphere; on it the objective is flat along the
    // boundary and the best lattice point can sit a few cells away.
    SplitMix64 rng(41);
    int interior = 0;
    for (int s = 0; s < 50; ++s) {
        const BuyerModel m(vec({rng.uniform(0, 1), rng.uniform(0, 1)}), rng.uniform(1, 20), FeasibleSet::ball(2));
        const Vector p = vec({rng.uniform(0.1, 1.2), rng.uniform(0.1, 1.2)});
        const Vector grid = brute_force_buyer(m, p, 0.005);
        const Vector x = solve_buyer(m, p).bundle;
        CHECK(perturbed_utility(m, x) - p.dot(x) >= perturbed_utility(m, grid) - p.dot(grid) - 1e-12);
        if (x.norm() < 1.0 - 0.005) {
            ++interior;
            CHECK((grid - x).cwiseAbs().maxCoeff() <= 0.005 + 1e-2);
        }
    }
    CHECK(interior >= 5);
}

TEST_CASE("brute-force R-OPT") {
    const BuyerModel m(vec({1, 0.5}), 50.0, FeasibleSet::ball(2));
    const Vector x_hat = vec({0.5, 0.4});
    const RealisticPriceSpace point(vec({1, 0.5}), Vector::Zero(2));
    const RoptEstimate single = brute_force_ropt(m, x_hat, point, 0.01);
    CHECK(single.value == dual_value(m, x_hat, vec({1, 0.5})));
    CHECK(single.slack == 0.0);

    const RealisticPriceSpace box(vec({1, 0.5}), vec({0.2, 0.2}));
    const RoptEstimate est = brute_force_ropt(m, x_hat, box, 0.01);
    CHECK(est.value >= perturbed_utility(m, x_hat) - 1e-8);
    CHECK(throws_code(ErrorCode::GridTooLarge, [&] { brute_force_ropt(m, x_hat, box, 1e-6); }));
}

TEST_CASE("verify reports every property") {
    ExperimentConfig c = parse_config(kRelaxed);
    const VerifyReport r = verify_instance(c);
    CHECK(r.checks.size() >= 6);
    for (const auto &check : r.checks) {
        INFO(check.name << ": " << check.detail);
        if (check.name == "validate" || check.name == "dual_gradient" || check.name == "buyer_oracle" ||
            check.name == "shallow_cut_containment")
            CHECK(check.passed);
    }
}
