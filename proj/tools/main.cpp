#include "buyerlearn/harness.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <iostream>
#include <thread>

namespace bl = buyerlearn;

namespace {

enum Exit : int { kOk = 0, kFailure = 1, kValidation = 2, kCapExceeded = 3 };

int exit_code(bl::ErrorCode code) {
    switch (code) {
    case bl::ErrorCode::IterationCapExceeded:
    case bl::ErrorCode::InfeasibleBudget:
    case bl::ErrorCode::GridTooLarge:
        return kCapExceeded;
    case bl::ErrorCode::IoFailure:
    case bl::ErrorCode::SolverFailure:
    case bl::ErrorCode::ProjectionFailure:
    case bl::ErrorCode::CutTooShallow:
    case bl::ErrorCode::EmptyIntersection:
        return kFailure;
    default:
        return kValidation;
    }
}

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

bl::ExperimentConfig load(const std::filesystem::path &path, const Overrides &o) {
    bl::ExperimentConfig c = bl::load_config(path);
    if (o.seed)
        c.seed = *o.seed;
    if (o.out)
        c.output = *o.out;
    return c;
}

std::string summary(const bl::ExperimentReport &r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "cuts=%llu interactions=%llu T=%llu contained=%s accuracy=%.6g wall=%.2fs",
                  static_cast<unsigned long long>(r.outer_iterations),
                  static_cast<unsigned long long>(r.interactions),
                  static_cast<unsigned long long>(r.budget.steps.statement), r.contained ? "yes" : "no", r.accuracy,
                  r.wall_seconds);
    return buf;
}

// Runs one experiment and returns (exit code, one-line message).
std::pair<int, std::string> run_one(const bl::ExperimentConfig &config) {
    try {
        const bl::ExperimentReport r = bl::run_experiment(config);
        return {r.contained ? kOk : kFailure, summary(r)};
    } catch (const bl::Error &e) {
        return {exit_code(e.code()), e.what()};
    } catch (const std::exception &e) {
        return {kFailure, e.what()};
    }
}

int cmd_run(const std::string &path, const Overrides &o) {
    try {
        const auto [code, message] = run_one(load(path, o));
        (code == kOk ? std::cout : std::cerr) << message << '\n';
        return code;
    } catch (const bl::Error &e) {
        std::cerr << e.what() << '\n';
        return exit_code(e.code());
    }
}

int cmd_sweep(const std::string &dir, const Overrides &o, unsigned jobs) {
    std::vector<std::filesystem::path> files;
    std::error_code ec;
    for (const auto &entry : std::filesystem::directory_iterator(dir, ec))
        if (entry.is_regular_file() && entry.path().extension() == ".json")
            files.push_back(entry.path());
    if (ec) {
        std::cerr << "cannot list " << dir << ": " << ec.message() << '\n';
        return kFailure;
    }
    std::sort(files.begin(), files.end());

    std::vector<std::pair<int, std::string>> results(files.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < files.size();) {
            try {
                Overrides local = o;
                if (o.out)
                    local.out = (std::filesystem::path(*o.out) / files[i].stem()).string();
                results[i] = run_one(load(files[i], local));
            } catch (const bl::Error &e) {
                results[i] = {exit_code(e.code()), e.what()};
            }
        }
    };
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(files.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t)
        pool.emplace_back(worker);
    for (auto &t : pool)
        t.join();

    int worst = kOk;
    for (std::size_t i = 0; i < files.size(); ++i) {
        std::cout << files[i].filename().string() << ": [" << results[i].first << "] " << results[i].second << '\n';
        worst = std::max(worst, results[i].first);
    }
    return worst;
}

int cmd_verify(const std::string &path, const Overrides &o) {
    try {
        const bl::VerifyReport report = bl::verify_instance(load(path, o));
        for (const auto &c : report.checks)
            std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
        return report.all_passed() ? kOk : kFailure;
    } catch (const bl::Error &e) {
        std::cerr << e.what() << '\n';
        return exit_code(e.code());
    }
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Learn a buyer's linear utility from posted prices and purchased bundles"};
    app.require_subcommand(1);

    Overrides overrides;
    std::uint64_t seed = 0;
    std::string out;
    auto add_overrides = [&](CLI::App *sub) {
        sub->add_option("--seed", seed, "Override the config seed");
        sub->add_option("--out", out, "Override the output directory");
    };

    std::string config_path;
    auto *run = app.add_subcommand("run", "Run one experiment");
    run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
    add_overrides(run);

    std::string sweep_dir;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    auto *sweep = app.add_subcommand("sweep", "Run every *.json config in a directory");
    sweep->add_option("dir", sweep_dir, "Config directory")->required()->check(CLI::ExistingDirectory);
    sweep->add_option("--jobs", jobs, "Worker threads");
    add_overrides(sweep);

    auto *verify = app.add_subcommand("verify", "Run the reference-oracle property checks on one instance");
    verify->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
    add_overrides(verify);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }
    for (auto *sub : {run, sweep, verify}) {
        if (sub->count("--seed"))
            overrides.seed = seed;
        if (sub->count("--out"))
            overrides.out = out;
    }

    if (*run)
        return cmd_run(config_path, overrides);
    if (*sweep)
        return cmd_sweep(sweep_dir, overrides, jobs);
    return cmd_verify(config_path, overrides);
}
