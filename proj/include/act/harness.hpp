#pragma once

// Seeded experiment runs, metrics and recorders.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "act/environments.hpp"
#include "act/planner.hpp"
#include "act/uct.hpp"

namespace act {

enum class PlannerKind { Act, Fe, Uct };
enum class EnvKind { BinaryTrap, GFunction, RockSample, Tiger, File };

std::string to_string(PlannerKind kind);
std::string to_string(EnvKind kind);
std::string to_string(FinalAction kind);

struct EnvironmentSpec {
    EnvKind kind = EnvKind::BinaryTrap;
    BinaryTrapSpec trap;
    GFunctionSpec gfunction;
    RockSampleSpec rocksample;
    TigerTMazeSpec tiger;
    std::string model_path;         // EnvKind::File
    std::size_t file_step_limit = 100;
    /// RockSample: ignore rocksample.rocks and place the rocks of every
    /// execution with rocksample_random_layout(n, k, execution seed).
    bool random_rocks = false;
};

/// Builds the environment; model files get a process sampled from the model
/// itself (initial state from D, no reward, absorbing states terminal).
Environment build_environment(const EnvironmentSpec& spec);
/// The environment spec of one execution: spec itself unless rocks are random.
EnvironmentSpec execution_environment(const EnvironmentSpec& spec, std::uint64_t execution_seed);

struct ExperimentSpec {
    EnvironmentSpec env;
    PlannerKind planner = PlannerKind::Act;
    PlannerConfig act;
    UctConfig uct;
    bool heuristic = true;
    /// Replace act.alpha / act.beta with the environment model's values.
    bool model_alpha = false;
    bool model_beta = false;
    std::size_t executions = 1;
    std::uint64_t base_seed = 0;
    std::size_t jobs = 1;
    std::optional<std::size_t> step_limit;  // overrides the environment's
    std::size_t histogram_bins = 20;
    // Sweep axes; empty = the single value in act/uct/env.
    std::vector<double> sweep_epsilon;
    std::vector<double> sweep_kappa_p;
    std::vector<std::size_t> sweep_depth;

    /// Discount used for ADR.
    double delta() const { return planner == PlannerKind::Uct ? uct.delta : act.delta; }
    /// Throws Error on an unusable spec.
    void check() const;
};

struct ExecutionResult {
    std::size_t id = 0;
    std::uint64_t seed = 0;
    EpisodeTrace trace;
    double adr = 0.0;
    std::vector<Cell> rocks;  // RockSample arrangement used
    std::optional<std::string> error;
};

struct MetricsBundle {
    double adr_mean = 0.0;
    double adr_std = 0.0;
    std::size_t n = 0;                       // executions that finished
    std::size_t failed_executions = 0;
    std::vector<double> failure_rates;       // binary trap, per execution
    double failure_rate_mean = 0.0;
    std::vector<std::size_t> occupancy;      // visits per state
    std::vector<std::size_t> modal_states;   // most frequent state per step index
    std::vector<std::size_t> nu_histogram;   // g-function, final x over [0, 1]
    std::vector<std::size_t> simulation_counts;  // per step, all executions in order
    double alpha = 0.0;                      // precision shape the planner used
    double beta = 0.0;                       // precision rate the planner used
    std::vector<ExecutionResult> executions;
};

/// Sum over steps of delta^t r_t.
double discounted_return(const EpisodeTrace& trace, double delta);
/// (D - depth reached) / D for a binary-trap trace.
double failure_rate(const EpisodeTrace& trace, const BinaryTrapSpec& spec);
double mean(const std::vector<double>& xs);
/// Sample standard deviation (0 for fewer than two values).
double sample_std(const std::vector<double>& xs);
/// Shannon entropy (nats) of a histogram of counts.
double histogram_entropy(const std::vector<std::size_t>& counts);
/// Counts of values in [0, 1] split into `bins` equal bins (1.0 lands in the last).
std::vector<std::size_t> unit_histogram(const std::vector<double>& values, std::size_t bins);

/// Runs spec.executions seeded executions (seed_i = base_seed + i) of the
/// spec's single configuration, ignoring the sweep axes.
MetricsBundle run_experiment(const ExperimentSpec& spec);

struct SweepPoint {
    double epsilon;
    double kappa_p;
    std::size_t depth;
    MetricsBundle metrics;
};

/// run_experiment over the Cartesian product of the sweep axes.
std::vector<SweepPoint> run_sweep(const ExperimentSpec& spec);

/// Rows = hidden state x epoch units (row = epoch * num_states + state),
/// columns = rollouts of every epoch in order.
struct RasterRecord {
    std::size_t num_states = 0;
    std::size_t horizon = 0;
    std::vector<std::vector<double>> values;  // [row][column]
    std::vector<std::size_t> column_epoch;
    /// Per designated unit: its row in the final-epoch block across columns.
    std::vector<std::vector<double>> traces;
    std::vector<std::size_t> trace_units;

    std::size_t rows() const { return values.size(); }
    std::size_t cols() const { return column_epoch.size(); }
};

/// Column block of epoch t: the present block (rows of epoch t) holds the root
/// belief, later blocks hold the rollout's predicted belief at depth e - t (0
/// past the rollout's end), earlier blocks hold the root beliefs recorded at
/// those epochs. Throws when steps.size() != horizon or rollouts are missing.
RasterRecord record_raster(const std::vector<StepRecord>& steps, std::size_t num_states, std::size_t horizon,
                           std::vector<std::size_t> trace_units = {});

// Output files.
void write_steps_csv(const std::string& path, const MetricsBundle& bundle, double delta);
void write_histogram_csv(const std::string& path, const std::vector<std::size_t>& counts);
void write_values_csv(const std::string& path, const std::string& header, const std::vector<double>& values);
void write_raster_csv(const std::string& path, const RasterRecord& raster);
/// {"adr_mean", "adr_std", "n", ..., "config": {...}} with a stable key order.
std::string summary_json(const MetricsBundle& bundle, const ExperimentSpec& spec);
std::string config_json(const ExperimentSpec& spec);

}  // namespace act
