#pragma once

#include "buyerlearn/learner.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace buyerlearn {

// ---------------------------------------------------------------------------
// Experiment configuration

struct BuyerSpec {
    std::optional<Vector> a_star; // empty: drawn from the seed
    std::optional<double> mu;     // empty: uniform in [mu1, mu2]
};

struct KnowledgeSpec {
    double mu1 = 1e6;
    double mu2 = 1e6;
    double lambda_val = 1.0;
    double beta = 0.5;
};

struct FeasibleSpec {
    bool ball = true; // preset {x^T x <= 1} ∩ [0,1]^n
    Matrix P;
    Vector q;
    double r = -1.0;
    std::optional<double> gamma1;
    std::optional<double> gamma2;
};

struct PriceSpec {
    Vector p0;
    Vector delta;
    std::optional<double> radius;
};

struct LearnerSpec {
    double epsilon = 0.1;
    double r_a = 1.0;
    std::uint64_t max_outer_iterations = 0;
    std::uint64_t max_interactions = 100'000;
};

struct ExperimentConfig {
    Eigen::Index n = 2;
    std::uint64_t seed = 0;
    BuyerSpec buyer;
    KnowledgeSpec knowledge;
    FeasibleSpec feasible_set;
    PriceSpec prices;
    LearnerSpec learner;
    std::string output; // empty: write nothing

    friend bool operator==(const ExperimentConfig &, const ExperimentConfig &);
};

/// JSON dialect. Scalars are accepted where a vector is expected and are
/// broadcast to length n; "random" selects a seeded draw for a* and mu.
ExperimentConfig parse_config(const std::string &text);
ExperimentConfig load_config(const std::filesystem::path &path);
std::string dump_config(const ExperimentConfig &config);

/// Ground truth and seller view materialized from a config.
struct Instance {
    BuyerModel model;
    LearnerConfig learner;
};

/**
 * a* (when random) is uniform on the nonnegative part of the ball
 * { a : a^T a <= R_a }, i.e. inside the initial ellipsoid; mu (when random) is
 * uniform on [mu1, mu2]. Both come from SplitMix64 streams split off `seed`.
 */
Instance make_instance(const ExperimentConfig &config);

// ---------------------------------------------------------------------------
// Runs

struct ExperimentReport {
    Eigen::Index n = 0;
    std::uint64_t seed = 0;
    Vector a_star;
    double mu = 0.0;
    ValidatedBudget budget;
    std::uint64_t outer_iterations = 0;
    std::uint64_t interactions = 0;
    bool contained = false;       // a* in every intermediate and the final ellipsoid
    std::uint64_t first_violation = 0; // iteration index of the first miss, 0 if none
    double accuracy = 0.0;        // ||a* - c_final||_inf
    double max_select_gap = 0.0;
    Matrix final_shape;
    Vector final_center;
    std::string termination;
    double wall_seconds = 0.0;
    std::filesystem::path csv_path;
    std::filesystem::path report_path;
};

/// Validates, runs the learner against a simulated buyer and checks every
/// ellipsoid against the ground truth. Writes iterations.csv, report.json and
/// timing.json to config.output when set (the CSV also on failed runs).
ExperimentReport run_experiment(const ExperimentConfig &config);

std::string report_json(const ExperimentReport &report);

// ---------------------------------------------------------------------------
// Reference oracles (tests only; never on the learner's path)

/// Grid argmax of U'(x) - p^T x over feasible grid points. n <= 3, resolution >= 1e-3.
Vector brute_force_buyer(const BuyerModel &model, const Vector &p, double resolution);

struct RoptEstimate {
    double value = 0.0; // min of g over the grid
    double slack = 0.0; // bound on value - min over the whole price space
};

/// Grid minimum of g over the realistic price space. n <= 2.
RoptEstimate brute_force_ropt(const BuyerModel &model, const Vector &x_hat, const RealisticPriceSpace &prices,
                              double resolution);

// ---------------------------------------------------------------------------
// CSV

struct CsvRow {
    std::uint64_t iter = 0;
    std::uint64_t interactions = 0;
    double g_tilde = 0.0;
    CutBranch branch = CutBranch::Central;
    double delta = 0.0;
    double alpha = 0.0;
    double vol_factor = 0.0;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    double term_lhs = 0.0;

    friend bool operator==(const CsvRow &, const CsvRow &) = default;
};

inline constexpr const char *kCsvHeader =
    "iter,interactions,g_tilde,branch,delta,alpha,vol_factor,lambda_min,lambda_max,term_lhs";

CsvRow to_row(const IterationRecord &record);
void write_csv(std::ostream &out, const std::vector<IterationRecord> &records);
void emit_csv(const RunLog &log, const std::filesystem::path &path);
void emit_csv(const std::vector<IterationRecord> &records, const std::filesystem::path &path);
std::vector<CsvRow> parse_csv(std::istream &in);
std::vector<CsvRow> parse_csv(const std::filesystem::path &path);

// ---------------------------------------------------------------------------
// Property checks on one configured instance

struct PropertyCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct VerifyReport {
    std::vector<PropertyCheck> checks;
    bool all_passed() const;
};

VerifyReport verify_instance(const ExperimentConfig &config);

} // namespace buyerlearn
