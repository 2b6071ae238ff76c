#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ordbo/benchfns.hpp"
#include "ordbo/diagnostics.hpp"
#include "ordbo/partition.hpp"
#include "ordbo/random.hpp"

namespace ordbo {

enum class Method { OrdinalLCB, OrdinalTS, VanillaEI };

std::string method_name(Method m);
Method parse_method(const std::string& s);
std::string partition_name(PartitionMode m);
PartitionMode parse_partition(const std::string& s);

/// Raised for invalid configurations (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string function = "bent-cigar";
    int dim = 0;  ///< 0 = the objective's default
    std::vector<Method> methods{Method::OrdinalLCB};
    PartitionMode partition = PartitionMode::TreeSearch;
    int n_init = 5;
    int n_iter = 20;
    int repeats = 10;
    double beta = 3.0;
    int ts_samples = 100;
    bool ts_argmax = false;
    int candidates_per_cell = 16;
    double movement_constant = 1.0;
    int quad_order = 40;
    int train_steps = 200;
    double learning_rate = 0.05;
    std::uint64_t seed = 0;
    std::string out_dir;
    int workers = 1;
    double beta_delta = 0.1;  ///< confidence level of the analysis beta_n schedule

    /// Throws ConfigError on invalid values.
    void validate() const;
    /// Applies `key = value` entries (unknown keys raise ConfigError).
    void apply_text(std::string_view text);
};

struct IterationRecord {
    int iteration = 0;   ///< 0 for the initial design
    int cell_id = -1;
    Eigen::VectorXd x;
    double y = 0.0;
    Eigen::VectorXd witness;  ///< latent witness of the chosen cell (empty for EI / initial)
    double post_mean = std::numeric_limits<double>::quiet_NaN();
    double post_sd = std::numeric_limits<double>::quiet_NaN();
    double elbo = std::numeric_limits<double>::quiet_NaN();
    double score_min = std::numeric_limits<double>::quiet_NaN();
    double score_max = std::numeric_limits<double>::quiet_NaN();
    int cell_count = 0;
    double wall_seconds = 0.0;
};

struct RunLog {
    Method method = Method::OrdinalLCB;
    std::string function;
    std::uint64_t seed = 0;
    int dim = 0;
    int n_init = 0;
    double f_star = 0.0;
    std::vector<IterationRecord> records;
    std::optional<AnalysisTrace> trace;  ///< ordinal methods only
    double I_initial = std::numeric_limits<double>::quiet_NaN();
    int final_cell_count = 0;
    int evaluations = 0;

    [[nodiscard]] std::vector<double> cumulative_regret() const;  ///< per row
    [[nodiscard]] std::string to_csv() const;
};

/// Raised when a run aborts; carries the iteration and a serialised model checkpoint.
class RunFailure : public std::runtime_error {
public:
    RunFailure(const std::string& what, int iteration, std::string checkpoint)
        : std::runtime_error(what), iteration_(iteration), checkpoint_(std::move(checkpoint)) {}
    [[nodiscard]] int iteration() const { return iteration_; }
    [[nodiscard]] const std::string& checkpoint() const { return checkpoint_; }

private:
    int iteration_;
    std::string checkpoint_;
};

/// All-min and all-max corners followed by n_init - 2 maximin-selected uniform points.
Eigen::MatrixXd initial_design(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper, int n_init, Rng& rng);

/// One run of the ordinal method (LCB or TS) with the config's first method.
RunLog run_ordinal(const ExperimentConfig& config, Method method, std::uint64_t seed);
RunLog run_ordinal(const ExperimentConfig& config, Method method, std::uint64_t seed, const ObjectiveSpec& objective);

/// One run of the EI baseline.
RunLog run_baseline(const ExperimentConfig& config, std::uint64_t seed);
RunLog run_baseline(const ExperimentConfig& config, std::uint64_t seed, const ObjectiveSpec& objective);

RunLog run_single(const ExperimentConfig& config, Method method, std::uint64_t seed);

/// Seed of repeat r, shared across methods.
std::uint64_t child_seed(std::uint64_t master, int repeat);

struct BatteryResult {
    std::vector<RunLog> logs;           ///< successful runs, ordered by (method, repeat)
    std::vector<std::string> failures;  ///< one message per failed child
    int attempted = 0;
    std::string aggregate_csv;
};

/// Runs every (method, repeat) pair on `config.workers` threads; writes per-run CSVs,
/// diagnostics traces and the aggregate CSV when `config.out_dir` is set.
BatteryResult run_battery(const ExperimentConfig& config);

/// iteration,method,function,median_cum_regret,q25,q75 over the per-seed cumulative regret.
std::string aggregate_csv(const std::vector<RunLog>& logs);

/// Linear-interpolation quantile of unsorted values.
double quantile(std::vector<double> values, double q);

std::string run_file_stem(const RunLog& log);

}  // namespace ordbo
