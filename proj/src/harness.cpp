#include "act/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <thread>

#include <json.hpp>

#include "act/log.hpp"
#include "act/model_io.hpp"

namespace act {

std::string to_string(PlannerKind kind) {
    switch (kind) {
        case PlannerKind::Act: return "act";
        case PlannerKind::Fe: return "fe";
        case PlannerKind::Uct: return "uct";
    }
    return "?";
}

std::string to_string(FinalAction kind) {
    switch (kind) {
        case FinalAction::Argmax: return "argmax";
        case FinalAction::Sample: return "sample";
        case FinalAction::MinEfe: return "min-efe";
    }
    return "?";
}

std::string to_string(EnvKind kind) {
    switch (kind) {
        case EnvKind::BinaryTrap: return "binarytrap";
        case EnvKind::GFunction: return "gfunction";
        case EnvKind::RockSample: return "rocksample";
        case EnvKind::Tiger: return "tiger";
        case EnvKind::File: return "file";
    }
    return "?";
}

Environment build_environment(const EnvironmentSpec& spec) {
    switch (spec.kind) {
        case EnvKind::BinaryTrap: return build_binary_trap(spec.trap);
        case EnvKind::GFunction: return build_g_function(spec.gfunction);
        case EnvKind::RockSample: return build_rocksample(spec.rocksample);
        case EnvKind::Tiger: return build_tiger_tmaze(spec.tiger);
        case EnvKind::File: break;
    }
    auto model = std::make_shared<const GenerativeModel>(load_model_file(spec.model_path));
    Environment env;
    env.name = "file";
    env.model = model;
    const auto absorbing = absorbing_states(*model);
    env.terminal = [absorbing](std::size_t s) { return static_cast<bool>(absorbing[s]); };
    env.initial_state = [model](Rng& rng) { return sample(model->initial_belief, rng); };
    env.step_limit = spec.file_step_limit;
    return env;
}

EnvironmentSpec execution_environment(const EnvironmentSpec& spec, std::uint64_t execution_seed) {
    EnvironmentSpec own = spec;
    if (spec.kind == EnvKind::RockSample && spec.random_rocks) {
        own.rocksample.rocks = rocksample_random_layout(spec.rocksample.n, spec.rocksample.k, execution_seed).rocks;
        own.random_rocks = false;
    }
    return own;
}

void ExperimentSpec::check() const {
    if (executions < 1) throw Error("experiment: executions must be >= 1");
    if (jobs < 1) throw Error("experiment: jobs must be >= 1");
    if (histogram_bins < 1) throw Error("experiment: histogram bins must be >= 1");
    if (planner == PlannerKind::Uct) {
        if (uct.c_p < 0.0) throw Error("uct: c_p must be >= 0");
        if (!(uct.delta > 0.0 && uct.delta <= 1.0)) throw Error("uct: delta must lie in (0, 1]");
    } else {
        act.max_depth();
        if (act.kappa_p < 0.0) throw Error("planner: kappa_p must be >= 0");
        if (act.max_simulations == 0) throw Error("planner: max_simulations must be >= 1");
    }
}

double discounted_return(const EpisodeTrace& trace, double delta) {
    double total = 0.0, discount = 1.0;
    for (const auto& step : trace.steps) {
        total += discount * step.reward;
        discount *= delta;
    }
    return total;
}

double failure_rate(const EpisodeTrace& trace, const BinaryTrapSpec& spec) {
    const double d_max = static_cast<double>(spec.depth);
    return (d_max - static_cast<double>(binary_trap_depth_reached(spec, trace.final_state))) / d_max;
}

double mean(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_std(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double histogram_entropy(const std::vector<std::size_t>& counts) {
    double total = 0.0;
    for (auto c : counts) total += static_cast<double>(c);
    if (total == 0.0) return 0.0;
    double h = 0.0;
    for (auto c : counts) h += entropy_term(static_cast<double>(c) / total);
    return h;
}

std::vector<std::size_t> unit_histogram(const std::vector<double>& values, std::size_t bins) {
    if (bins == 0) throw Error("histogram: bins must be >= 1");
    std::vector<std::size_t> counts(bins, 0);
    for (double v : values) {
        if (!(v >= 0.0 && v <= 1.0)) throw Error("histogram: value outside [0, 1]");
        counts[std::min(bins - 1, static_cast<std::size_t>(v * static_cast<double>(bins)))] += 1;
    }
    return counts;
}

namespace {

ExecutionResult run_one(const ExperimentSpec& spec, const Environment* shared, std::size_t id) {
    ExecutionResult r;
    r.id = id;
    r.seed = spec.base_seed + id;
    try {
        const EnvironmentSpec env_spec = execution_environment(spec.env, r.seed);
        std::optional<Environment> own;
        if (!shared) own = build_environment(env_spec);
        const Environment& env = shared ? *shared : *own;
        if (spec.env.kind == EnvKind::RockSample) r.rocks = env_spec.rocksample.rocks;
        const std::size_t limit = spec.step_limit.value_or(env.step_limit);
        Rng rng(r.seed);
        auto process = env.make_process(rng);
        if (spec.planner == PlannerKind::Uct) {
            const Mdp mdp{*env.model, env.reward, env.terminal_states()};
            r.trace = uct_episode(mdp, *process, spec.uct, rng, limit);
        } else {
            PlannerConfig cfg = spec.act;
            cfg.rng_seed = r.seed;
            if (spec.planner == PlannerKind::Fe) cfg.kappa_p = 0.0;
            if (spec.heuristic && env.heuristic) cfg.heuristic = env.heuristic;
            r.trace = act_episode(*env.model, *process, cfg, rng, limit);
        }
        r.adr = discounted_return(r.trace, spec.delta());
    } catch (const std::exception& e) {
        r.error = e.what();
        log(LogLevel::Error, "execution ", id, " (seed ", r.seed, ") failed: ", e.what());
    }
    return r;
}

}  // namespace

MetricsBundle run_experiment(const ExperimentSpec& requested) {
    requested.check();
    ExperimentSpec spec = requested;
    const bool per_execution = spec.env.kind == EnvKind::RockSample && spec.env.random_rocks;
    // With random rocks the first execution's environment stands in for sizes and precision.
    const Environment env = build_environment(execution_environment(spec.env, spec.base_seed));
    if (spec.model_alpha) spec.act.alpha = env.model->alpha;
    if (spec.model_beta) spec.act.beta = env.model->beta;
    const Environment* shared = per_execution ? nullptr : &env;

    MetricsBundle m;
    m.alpha = spec.act.alpha;
    m.beta = spec.act.beta;
    m.executions.resize(spec.executions);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < spec.executions; i = next++)
            m.executions[i] = run_one(spec, shared, i);
    };
    const std::size_t jobs = std::min(spec.jobs, spec.executions);
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::vector<double> adrs, final_x;
    m.occupancy.assign(env.model->num_states, 0);
    std::vector<std::map<std::size_t, std::size_t>> per_step;
    for (const auto& r : m.executions) {
        if (r.error) {
            ++m.failed_executions;
            continue;
        }
        adrs.push_back(r.adr);
        const auto& steps = r.trace.steps;
        if (per_step.size() < steps.size() + 1) per_step.resize(steps.size() + 1);
        for (std::size_t t = 0; t < steps.size(); ++t) {
            ++m.occupancy[steps[t].state];
            ++per_step[t][steps[t].state];
            m.simulation_counts.push_back(steps[t].tree_stats.simulations);
        }
        ++m.occupancy[r.trace.final_state];
        ++per_step[steps.size()][r.trace.final_state];
        if (spec.env.kind == EnvKind::BinaryTrap) m.failure_rates.push_back(failure_rate(r.trace, spec.env.trap));
        if (spec.env.kind == EnvKind::GFunction) final_x.push_back(g_function_interval(r.trace.final_state).mid());
    }
    for (const auto& counts : per_step) {
        std::size_t best = 0, best_count = 0;
        for (const auto& [s, c] : counts)
            if (c > best_count) {
                best = s;
                best_count = c;
            }
        m.modal_states.push_back(best);
    }
    m.n = adrs.size();
    m.adr_mean = mean(adrs);
    m.adr_std = sample_std(adrs);
    m.failure_rate_mean = mean(m.failure_rates);
    if (spec.env.kind == EnvKind::GFunction) m.nu_histogram = unit_histogram(final_x, spec.histogram_bins);
    return m;
}

std::vector<SweepPoint> run_sweep(const ExperimentSpec& spec) {
    const bool uct = spec.planner == PlannerKind::Uct;
    const auto epsilons = spec.sweep_epsilon.empty() ? std::vector<double>{spec.act.epsilon} : spec.sweep_epsilon;
    const auto kappas =
        spec.sweep_kappa_p.empty() ? std::vector<double>{uct ? spec.uct.c_p : spec.act.kappa_p} : spec.sweep_kappa_p;
    const auto depths = spec.sweep_depth.empty() ? std::vector<std::size_t>{spec.env.trap.depth} : spec.sweep_depth;

    std::vector<SweepPoint> out;
    for (double eps : epsilons)
        for (double kappa : kappas)
            for (std::size_t depth : depths) {
                ExperimentSpec point = spec;
                point.act.epsilon = eps;
                point.act.kappa_p = kappa;
                point.uct.c_p = kappa;
                point.env.trap.depth = depth;
                log(LogLevel::Info, "sweep point epsilon=", eps, " kappa_p=", kappa, " depth=", depth);
                out.push_back({eps, kappa, depth, run_experiment(point)});
            }
    return out;
}

RasterRecord record_raster(const std::vector<StepRecord>& steps, std::size_t num_states, std::size_t horizon,
                           std::vector<std::size_t> trace_units) {
    if (horizon == 0) throw Error("raster: horizon must be >= 1");
    if (steps.size() != horizon)
        throw Error("raster: " + std::to_string(steps.size()) + " epochs recorded for a horizon of " +
                    std::to_string(horizon));
    RasterRecord r;
    r.num_states = num_states;
    r.horizon = horizon;
    r.values.assign(num_states * horizon, {});
    for (std::size_t t = 0; t < horizon; ++t) {
        if (steps[t].belief.size() != num_states) throw Error("raster: belief size does not match the state count");
        if (steps[t].rollouts.empty()) throw Error("raster: epoch " + std::to_string(t) + " has no recorded rollouts");
        for (const auto& rollout : steps[t].rollouts) {
            r.column_epoch.push_back(t);
            for (std::size_t e = 0; e < horizon; ++e) {
                const Categorical* source = nullptr;
                if (e <= t) {
                    source = &steps[e].belief;
                } else {
                    for (const auto& step : rollout)
                        if (step.depth == e - t) source = &step.belief;
                }
                for (std::size_t s = 0; s < num_states; ++s)
                    r.values[e * num_states + s].push_back(source ? (*source)[s] : 0.0);
            }
        }
    }
    for (auto u : trace_units) {
        if (u >= num_states) throw Error("raster: trace unit out of range");
        r.traces.push_back(r.values[(horizon - 1) * num_states + u]);
    }
    r.trace_units = std::move(trace_units);
    return r;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << std::setprecision(17);
    return out;
}

}  // namespace

void write_steps_csv(const std::string& path, const MetricsBundle& bundle, double delta) {
    auto out = open_out(path);
    out << "execution_id,step,state,action,reward,adr\n";
    for (const auto& r : bundle.executions) {
        if (r.error) continue;
        double adr = 0.0, discount = 1.0;
        for (std::size_t t = 0; t < r.trace.steps.size(); ++t) {
            const auto& s = r.trace.steps[t];
            adr += discount * s.reward;
            discount *= delta;
            out << r.id << ',' << t << ',' << s.state << ',' << s.action << ',' << s.reward << ',' << adr << '\n';
        }
    }
}

void write_histogram_csv(const std::string& path, const std::vector<std::size_t>& counts) {
    auto out = open_out(path);
    out << "bin,count\n";
    for (std::size_t i = 0; i < counts.size(); ++i) out << i << ',' << counts[i] << '\n';
}

void write_values_csv(const std::string& path, const std::string& header, const std::vector<double>& values) {
    auto out = open_out(path);
    out << "index," << header << '\n';
    for (std::size_t i = 0; i < values.size(); ++i) out << i << ',' << values[i] << '\n';
}

void write_raster_csv(const std::string& path, const RasterRecord& raster) {
    auto out = open_out(path);
    out << "unit";
    for (std::size_t c = 0; c < raster.cols(); ++c) out << ",r" << c << "_e" << raster.column_epoch[c];
    out << '\n';
    for (std::size_t row = 0; row < raster.rows(); ++row) {
        out << row;
        for (double v : raster.values[row]) out << ',' << v;
        out << '\n';
    }
}

namespace {

nlohmann::ordered_json config_object(const ExperimentSpec& spec) {
    nlohmann::ordered_json c;
    c["env"] = to_string(spec.env.kind);
    switch (spec.env.kind) {
        case EnvKind::BinaryTrap: c["depth"] = spec.env.trap.depth; break;
        case EnvKind::GFunction: c["min_width"] = spec.env.gfunction.min_width; break;
        case EnvKind::RockSample: {
            const auto& rs = spec.env.rocksample;
            c["n"] = rs.n;
            c["k"] = rs.k;
            c["d0"] = rs.half_accuracy_distance();
            if (spec.env.random_rocks) {
                c["rocks"] = "random per execution";
            } else {
                auto rocks = nlohmann::ordered_json::array();
                for (const auto& cell : rs.rocks) rocks.push_back({cell.x, cell.y});
                c["rocks"] = rocks;
            }
            if (!rs.qualities.empty()) c["qualities"] = rs.qualities;
            c["preference"] = rs.preference;
            c["heuristic_bias"] = rs.heuristic_bias;
            break;
        }
        case EnvKind::Tiger:
            c["validity"] = spec.env.tiger.validity;
            c["utility"] = spec.env.tiger.utility;
            c["epochs"] = spec.env.tiger.epochs;
            break;
        case EnvKind::File: c["model"] = spec.env.model_path; break;
    }
    c["planner"] = to_string(spec.planner);
    if (spec.planner == PlannerKind::Uct) {
        c["delta"] = spec.uct.delta;
        c["c_p"] = spec.uct.c_p;
        c["playouts"] = spec.uct.playouts;
        c["rollout_depth"] = spec.uct.rollout_depth;
    } else {
        c["delta"] = spec.act.delta;
        c["epsilon"] = spec.act.epsilon;
        c["max_depth"] = spec.act.max_depth();
        c["kappa_p"] = spec.planner == PlannerKind::Fe ? 0.0 : spec.act.kappa_p;
        c["alpha"] = spec.act.alpha;
        c["beta"] = spec.act.beta;
        c["max_simulations"] = spec.act.max_simulations;
        c["final_action"] = to_string(spec.act.final_action);
        c["heuristic"] = spec.heuristic;
    }
    c["executions"] = spec.executions;
    c["seed"] = spec.base_seed;
    if (spec.step_limit) c["step_limit"] = *spec.step_limit;
    c["histogram_bins"] = spec.histogram_bins;
    if (!spec.sweep_epsilon.empty()) c["sweep_epsilon"] = spec.sweep_epsilon;
    if (!spec.sweep_kappa_p.empty()) c["sweep_kappa_p"] = spec.sweep_kappa_p;
    if (!spec.sweep_depth.empty()) c["sweep_depth"] = spec.sweep_depth;
    return c;
}

}  // namespace

std::string config_json(const ExperimentSpec& spec) { return config_object(spec).dump(2); }

std::string summary_json(const MetricsBundle& bundle, const ExperimentSpec& spec) {
    nlohmann::ordered_json j;
    j["adr_mean"] = bundle.adr_mean;
    j["adr_std"] = bundle.adr_std;
    j["n"] = bundle.n;
    j["failed_executions"] = bundle.failed_executions;
    if (!bundle.failure_rates.empty()) j["failure_rate_mean"] = bundle.failure_rate_mean;
    if (!bundle.nu_histogram.empty()) j["nu_entropy"] = histogram_entropy(bundle.nu_histogram);
    auto config = config_object(spec);
    if (spec.planner != PlannerKind::Uct && bundle.beta > 0.0) {
        config["alpha"] = bundle.alpha;
        config["beta"] = bundle.beta;
    }
    j["config"] = config;
    return j.dump(2);
}

}  // namespace act
