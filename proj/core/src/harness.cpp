#include "buyerlearn/harness.hpp"
#include "buyerlearn/rng.hpp"

#include <json.hpp>

#include <chrono>
#include <fstream>
#include <sstream>

namespace buyerlearn {

using nlohmann::json;

namespace {

[[noreturn]] void bad_config(const std::string &what) { throw Error(ErrorCode::InvalidArgument, "config: " + what); }

const json &require(const json &j, const char *key) {
    if (!j.is_object() || !j.contains(key))
        bad_config(std::string("missing field '") + key + "'");
    return j.at(key);
}

double number(const json &j, const char *what) {
    if (!j.is_number())
        bad_config(std::string(what) + " must be a number");
    return j.get<double>();
}

Vector vector_field(const json &j, Eigen::Index n, const char *what) {
    if (j.is_number())
        return Vector::Constant(n, j.get<double>());
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n)
        bad_config(std::string(what) + " must be a number or an array of length n");
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = number(j[static_cast<std::size_t>(i)], what);
    return v;
}

Matrix matrix_field(const json &j, Eigen::Index n, const char *what) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != n)
        bad_config(std::string(what) + " must be an n x n array");
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        m.row(i) = vector_field(j[static_cast<std::size_t>(i)], n, what).transpose();
    return m;
}

json to_json(const Vector &v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json to_json(const Matrix &m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        rows.push_back(to_json(Vector(m.row(i).transpose())));
    return rows;
}

std::uint64_t count_field(const json &j, const char *key, std::uint64_t fallback) {
    if (!j.contains(key))
        return fallback;
    const json &v = j.at(key);
    if (v.is_number_unsigned())
        return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    if (v.is_number_float() && v.get<double>() >= 0.0 && v.get<double>() < 1.8e19 &&
        v.get<double>() == std::floor(v.get<double>()))
        return static_cast<std::uint64_t>(v.get<double>());
    bad_config(std::string(key) + " must be a nonnegative integer");
}

bool is_random(const json &j) { return j.is_string() && j.get<std::string>() == "random"; }

void write_text(const std::filesystem::path &path, const std::string &text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out)
        throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
}

} // namespace

bool operator==(const ExperimentConfig &l, const ExperimentConfig &r) { return dump_config(l) == dump_config(r); }

ExperimentConfig parse_config(const std::string &text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception &e) {
        bad_config(e.what());
    }
    ExperimentConfig c;
    const json &jn = require(j, "n");
    if (!jn.is_number_integer() || jn.get<std::int64_t>() < 1)
        bad_config("n must be a positive integer");
    c.n = static_cast<Eigen::Index>(jn.get<std::int64_t>());
    c.seed = count_field(j, "seed", 0);

    if (j.contains("buyer")) {
        const json &b = j.at("buyer");
        if (b.contains("a_star") && !is_random(b.at("a_star")))
            c.buyer.a_star = vector_field(b.at("a_star"), c.n, "buyer.a_star");
        if (b.contains("mu") && !is_random(b.at("mu")))
            c.buyer.mu = number(b.at("mu"), "buyer.mu");
    }

    const json &k = require(j, "knowledge");
    c.knowledge.mu1 = number(require(k, "mu1"), "knowledge.mu1");
    c.knowledge.mu2 = number(require(k, "mu2"), "knowledge.mu2");
    c.knowledge.lambda_val = number(require(k, "lambda_val"), "knowledge.lambda_val");
    c.knowledge.beta = number(require(k, "beta"), "knowledge.beta");

    const json fs = j.value("feasible_set", json("ball"));
    if (fs.is_string()) {
        if (fs.get<std::string>() != "ball")
            bad_config("unknown feasible_set preset '" + fs.get<std::string>() + "'");
    } else {
        c.feasible_set.ball = false;
        c.feasible_set.P = matrix_field(require(fs, "P"), c.n, "feasible_set.P");
        c.feasible_set.q = vector_field(require(fs, "q"), c.n, "feasible_set.q");
        c.feasible_set.r = number(require(fs, "r"), "feasible_set.r");
        if (fs.contains("gamma1"))
            c.feasible_set.gamma1 = number(fs.at("gamma1"), "feasible_set.gamma1");
        if (fs.contains("gamma2"))
            c.feasible_set.gamma2 = number(fs.at("gamma2"), "feasible_set.gamma2");
    }

    const json &p = require(j, "prices");
    c.prices.p0 = vector_field(require(p, "p0"), c.n, "prices.p0");
    c.prices.delta = vector_field(require(p, "delta"), c.n, "prices.delta");
    if (p.contains("R"))
        c.prices.radius = number(p.at("R"), "prices.R");

    if (j.contains("learner")) {
        const json &l = j.at("learner");
        c.learner.epsilon = number(l.value("epsilon", json(c.learner.epsilon)), "learner.epsilon");
        c.learner.r_a = number(l.value("R_a", json(c.learner.r_a)), "learner.R_a");
        c.learner.max_outer_iterations = count_field(l, "max_outer_iterations", c.learner.max_outer_iterations);
        c.learner.max_interactions = count_field(l, "max_interactions", c.learner.max_interactions);
    }
    if (j.contains("output")) {
        if (!j.at("output").is_string())
            bad_config("output must be a string");
        c.output = j.at("output").get<std::string>();
    }
    return c;
}

ExperimentConfig load_config(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string dump_config(const ExperimentConfig &c) {
    json j;
    j["n"] = c.n;
    j["seed"] = c.seed;
    j["buyer"]["a_star"] = c.buyer.a_star ? to_json(*c.buyer.a_star) : json("random");
    j["buyer"]["mu"] = c.buyer.mu ? json(*c.buyer.mu) : json("random");
    j["knowledge"] = {{"mu1", c.knowledge.mu1},
                      {"mu2", c.knowledge.mu2},
                      {"lambda_val", c.knowledge.lambda_val},
                      {"beta", c.knowledge.beta}};
    if (c.feasible_set.ball) {
        j["feasible_set"] = "ball";
    } else {
        json fs{{"P", to_json(c.feasible_set.P)}, {"q", to_json(c.feasible_set.q)}, {"r", c.feasible_set.r}};
        if (c.feasible_set.gamma1)
            fs["gamma1"] = *c.feasible_set.gamma1;
        if (c.feasible_set.gamma2)
            fs["gamma2"] = *c.feasible_set.gamma2;
        j["feasible_set"] = fs;
    }
    j["prices"] = {{"p0", to_json(c.prices.p0)}, {"delta", to_json(c.prices.delta)}};
    if (c.prices.radius)
        j["prices"]["R"] = *c.prices.radius;
    j["learner"] = {{"epsilon", c.learner.epsilon},
                    {"R_a", c.learner.r_a},
                    {"max_outer_iterations", c.learner.max_outer_iterations},
                    {"max_interactions", c.learner.max_interactions}};
    j["output"] = c.output;
    return j.dump(2) + "\n";
}

Instance make_instance(const ExperimentConfig &config) {
    const Eigen::Index n = config.n;
    const FeasibleSpec &fs = config.feasible_set;
    FeasibleSet c = fs.ball ? FeasibleSet::ball(n) : FeasibleSet(fs.P, fs.q, fs.r, fs.gamma1, fs.gamma2);

    SplitMix64 root(config.seed);
    SplitMix64 a_rng = root.split();
    SplitMix64 mu_rng = root.split();

    Vector a_star;
    if (config.buyer.a_star) {
        a_star = *config.buyer.a_star;
        if (a_star.squaredNorm() > config.learner.r_a * (1.0 + 1e-12))
            throw Error(ErrorCode::InfeasibleParameters, "ground-truth a* lies outside the initial ellipsoid");
    } else {
        // Direction from |N(0, I)|, radius sqrt(R_a) U^(1/n).
        Vector dir(n);
        do {
            for (Eigen::Index i = 0; i < n; ++i)
                dir(i) = std::abs(a_rng.normal());
        } while (dir.norm() == 0.0);
        const double radius = std::sqrt(config.learner.r_a) * std::pow(a_rng.uniform(), 1.0 / static_cast<double>(n));
        a_star = radius * dir.normalized();
    }
    const KnowledgeSpec &k = config.knowledge;
    const double mu = config.buyer.mu ? *config.buyer.mu : mu_rng.uniform(k.mu1, k.mu2);
    if (!(mu >= k.mu1 && mu <= k.mu2))
        throw Error(ErrorCode::InfeasibleParameters, "buyer mu lies outside [mu1, mu2]");

    BuyerModel model(a_star, mu, c);
    SellerKnowledge knowledge(k.mu1, k.mu2, k.lambda_val, k.beta, c,
                              RealisticPriceSpace(config.prices.p0, config.prices.delta, config.prices.radius));
    LearnerConfig learner(config.learner.epsilon, config.learner.r_a, std::move(knowledge));
    learner.max_outer_iterations = config.learner.max_outer_iterations;
    learner.max_interactions = config.learner.max_interactions;
    return {std::move(model), std::move(learner)};
}

ExperimentReport run_experiment(const ExperimentConfig &config) {
    const auto start = std::chrono::steady_clock::now();
    const Instance inst = make_instance(config);
    ExperimentReport report;
    report.n = config.n;
    report.seed = config.seed;
    report.a_star = inst.model.a_star;
    report.mu = inst.model.mu;
    report.budget = validate(inst.learner);

    const std::filesystem::path out_dir = config.output;
    if (!config.output.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(out_dir, ec);
        if (ec)
            throw Error(ErrorCode::IoFailure, "cannot create " + out_dir.string() + ": " + ec.message());
        report.csv_path = out_dir / "iterations.csv";
        report.report_path = out_dir / "report.json";
    }

    BuyerOracle oracle(inst.model, inst.learner.knowledge.prices);
    const SimulatedInitialDualValue provider(inst.model);
    std::vector<IterationRecord> records;
    report.contained = true;
    auto observe = [&](const IterationRecord &rec) {
        records.push_back(rec);
        if (report.contained && !contains(Ellipsoid(rec.shape, rec.center), inst.model.a_star)) {
            report.contained = false;
            report.first_violation = rec.iter;
        }
    };

    std::optional<LearnOutcome> outcome;
    try {
        outcome.emplace(learn_utility(inst.learner, oracle, provider, observe));
    } catch (const Error &) {
        if (!config.output.empty())
            emit_csv(records, report.csv_path);
        throw;
    }

    report.outer_iterations = records.size();
    report.interactions = oracle.interaction_count();
    report.final_shape = outcome->final_ellipsoid.shape();
    report.final_center = outcome->final_ellipsoid.center();
    report.contained = report.contained && contains(outcome->final_ellipsoid, inst.model.a_star);
    report.accuracy = (inst.model.a_star - report.final_center).cwiseAbs().maxCoeff();
    for (const auto &rec : records)
        report.max_select_gap = std::max(report.max_select_gap, rec.select_gap);
    report.termination = outcome->log.termination;
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (!config.output.empty()) {
        emit_csv(records, report.csv_path);
        write_text(report.report_path, report_json(report));
        json timing{{"wall_seconds", report.wall_seconds}};
        write_text(out_dir / "timing.json", timing.dump(2) + "\n");
    }
    return report;
}

std::string report_json(const ExperimentReport &r) {
    json j;
    j["n"] = r.n;
    j["seed"] = r.seed;
    j["a_star"] = to_json(r.a_star);
    j["mu"] = r.mu;
    j["tau"] = r.budget.tau;
    j["T"] = r.budget.steps.statement;
    j["T_proof"] = r.budget.steps.proof;
    j["outer_cap"] = r.budget.outer_cap;
    j["interaction_bound"] = r.budget.interaction_bound;
    j["max_cut_depth"] = r.budget.max_cut_depth;
    j["outer_iterations"] = r.outer_iterations;
    j["interactions"] = r.interactions;
    j["contained"] = r.contained;
    j["first_violation"] = r.first_violation;
    j["accuracy_inf"] = r.accuracy;
    j["max_select_gap"] = r.max_select_gap;
    j["final_center"] = to_json(r.final_center);
    j["final_shape"] = to_json(r.final_shape);
    j["termination"] = r.termination;
    j["csv"] = r.csv_path.filename().string();
    return j.dump(2) + "\n";
}

} // namespace buyerlearn
