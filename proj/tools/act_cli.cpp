// act: run, sweep and inspect AcT / FE / UCT experiments.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "act/harness.hpp"
#include "act/log.hpp"
#include "act/model_io.hpp"

namespace fs = std::filesystem;
using namespace act;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string env = "binarytrap";
    std::string planner = "act";
    std::optional<double> delta;  // 0.95, or 0.9 for tiger
    double epsilon = 0.4;
    double kappa_p = 1.0;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::size_t sims = 1000;
    std::size_t depth = 10;
    int n = 7;
    int k = 8;
    double d0 = 0.0;
    std::string layout;
    std::optional<std::uint64_t> rock_seed;
    double preference = 3.0;
    double bias = 4.0;
    std::string heuristic = "on";
    std::size_t executions = 1;
    std::uint64_t seed = 0;
    std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
    std::string out = ".";
    std::string final_action = "argmax";
    std::size_t step_limit = 0;
    std::size_t bins = 20;
    std::size_t rollout_depth = 0;
    std::vector<std::string> params;
};

void add_experiment_flags(CLI::App& app, Options& o) {
    app.add_option("--env", o.env, "binarytrap | gfunction | rocksample | tiger | file:<path>");
    app.add_option("--planner", o.planner, "act | fe | uct")->check(CLI::IsMember({"act", "fe", "uct"}));
    app.add_option("--delta", o.delta, "discount factor (tiger default 0.9)");
    app.add_option("--epsilon", o.epsilon, "discount horizon");
    app.add_option("--kappa-p", o.kappa_p, "exploration factor (UCT: c_p)");
    app.add_option("--alpha", o.alpha, "precision prior shape (default: the model's)");
    app.add_option("--beta", o.beta, "precision prior rate (default: the model's)");
    app.add_option("--playouts,--max-sims", o.sims, "simulations per planning step");
    app.add_option("--depth", o.depth, "binary trap depth D");
    app.add_option("--n", o.n, "RockSample grid side");
    app.add_option("--k", o.k, "RockSample rock count");
    app.add_option("--d0", o.d0, "RockSample half-accuracy distance (default n/2)");
    app.add_option("--layout", o.layout, "RockSample layout JSON file");
    app.add_option("--rock-seed", o.rock_seed, "seed for one rock placement shared by all executions (default: each execution's seed)");
    app.add_option("--preference", o.preference, "RockSample reward preference c");
    app.add_option("--bias", o.bias, "RockSample heuristic bias");
    app.add_option("--heuristic", o.heuristic, "on | off")->check(CLI::IsMember({"on", "off"}));
    app.add_option("--executions", o.executions, "number of seeded executions");
    app.add_option("--seed", o.seed, "base seed");
    app.add_option("--jobs", o.jobs, "parallel executions");
    app.add_option("--out", o.out, "output directory");
    app.add_option("--final-action", o.final_action, "argmax | sample | min-efe")
        ->check(CLI::IsMember({"argmax", "sample", "min-efe"}));
    app.add_option("--step-limit", o.step_limit, "override the environment's step limit");
    app.add_option("--bins", o.bins, "histogram bins");
    app.add_option("--rollout-depth", o.rollout_depth, "UCT rollout depth limit (default: AcT max depth)");
}

EnvironmentSpec environment_spec(const Options& o) {
    EnvironmentSpec env;
    if (o.env == "binarytrap") {
        env.kind = EnvKind::BinaryTrap;
        env.trap.depth = o.depth;
    } else if (o.env == "gfunction") {
        env.kind = EnvKind::GFunction;
    } else if (o.env == "rocksample") {
        env.kind = EnvKind::RockSample;
        if (!o.layout.empty()) {
            std::ifstream in(o.layout);
            if (!in) throw ConfigError("cannot open layout file " + o.layout);
            std::stringstream buf;
            buf << in.rdbuf();
            env.rocksample = rocksample_layout_from_json(buf.str());
        } else if (o.rock_seed) {
            env.rocksample = rocksample_random_layout(o.n, o.k, *o.rock_seed);
        } else {
            env.rocksample = rocksample_random_layout(o.n, o.k, o.seed);
            env.random_rocks = true;
        }
        if (o.d0 > 0.0) env.rocksample.d0 = o.d0;
        env.rocksample.preference = o.preference;
        env.rocksample.heuristic_bias = o.bias;
        RockSampleLayout check(env.rocksample);
    } else if (o.env == "tiger") {
        env.kind = EnvKind::Tiger;
    } else if (o.env.rfind("file:", 0) == 0) {
        env.kind = EnvKind::File;
        env.model_path = o.env.substr(5);
    } else {
        throw ConfigError("unknown environment '" + o.env + "'");
    }
    return env;
}

ExperimentSpec experiment_spec(const Options& o) {
    ExperimentSpec spec;
    spec.env = environment_spec(o);
    spec.planner = o.planner == "uct" ? PlannerKind::Uct : o.planner == "fe" ? PlannerKind::Fe : PlannerKind::Act;
    const double delta = o.delta.value_or(spec.env.kind == EnvKind::Tiger ? 0.9 : 0.95);
    spec.act.delta = delta;
    spec.act.epsilon = o.epsilon;
    spec.act.kappa_p = o.kappa_p;
    spec.act.alpha = o.alpha.value_or(1.0);
    spec.act.beta = o.beta.value_or(1.0);
    spec.model_alpha = !o.alpha;
    spec.model_beta = !o.beta;
    spec.act.max_simulations = o.sims;
    spec.act.final_action = o.final_action == "sample"    ? FinalAction::Sample
                            : o.final_action == "min-efe" ? FinalAction::MinEfe
                                                          : FinalAction::Argmax;
    spec.uct.delta = delta;
    spec.uct.c_p = o.kappa_p;
    spec.uct.playouts = o.sims;
    spec.heuristic = o.heuristic == "on";
    spec.executions = o.executions;
    spec.base_seed = o.seed;
    spec.jobs = o.jobs;
    spec.histogram_bins = o.bins;
    if (o.step_limit > 0) spec.step_limit = o.step_limit;
    if (spec.planner == PlannerKind::Uct) {
        if (o.rollout_depth > 0) {
            spec.uct.rollout_depth = o.rollout_depth;
        } else {
            PlannerConfig horizon;
            horizon.delta = delta < 1.0 ? delta : 0.95;
            horizon.epsilon = o.epsilon;
            spec.uct.rollout_depth = horizon.max_depth();
        }
    }
    return spec;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << text << '\n';
}

void write_bundle(const fs::path& dir, const MetricsBundle& m, const ExperimentSpec& spec) {
    fs::create_directories(dir);
    write_text(dir / "summary.json", summary_json(m, spec));
    write_steps_csv((dir / "steps.csv").string(), m, spec.delta());
    write_histogram_csv((dir / "occupancy.csv").string(), m.occupancy);
    std::vector<double> modes(m.modal_states.begin(), m.modal_states.end());
    write_values_csv((dir / "modal_states.csv").string(), "state", modes);
    if (!m.failure_rates.empty()) write_values_csv((dir / "failure_rate.csv").string(), "failure_rate", m.failure_rates);
    if (!m.nu_histogram.empty()) write_histogram_csv((dir / "nu_histogram.csv").string(), m.nu_histogram);
    if (spec.env.kind == EnvKind::RockSample) {
        std::ofstream out(dir / "rocks.csv");
        out << "execution_id,rock,x,y\n";
        for (const auto& r : m.executions)
            for (std::size_t i = 0; i < r.rocks.size(); ++i)
                out << r.id << ',' << i << ',' << r.rocks[i].x << ',' << r.rocks[i].y << '\n';
    }
}

int cmd_run(const Options& o) {
    const auto spec = experiment_spec(o);
    spec.check();
    const auto m = run_experiment(spec);
    write_bundle(o.out, m, spec);
    std::cout << "adr_mean " << m.adr_mean << " adr_std " << m.adr_std << " n " << m.n;
    if (!m.failure_rates.empty()) std::cout << " failure_rate " << m.failure_rate_mean;
    if (!m.nu_histogram.empty()) std::cout << " nu_entropy " << histogram_entropy(m.nu_histogram);
    std::cout << '\n';
    return m.failed_executions == 0 ? 0 : 2;
}

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError("bad sweep value '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError("empty sweep list");
    return out;
}

int cmd_sweep(const Options& o) {
    auto spec = experiment_spec(o);
    if (o.params.empty()) throw ConfigError("sweep needs at least one --param name=v1,v2,...");
    for (const auto& p : o.params) {
        const auto eq = p.find('=');
        if (eq == std::string::npos) throw ConfigError("--param expects name=v1,v2,...");
        const std::string name = p.substr(0, eq);
        const auto values = parse_list(p.substr(eq + 1));
        if (name == "epsilon") {
            spec.sweep_epsilon = values;
        } else if (name == "kappa_p" || name == "kappa-p") {
            spec.sweep_kappa_p = values;
        } else if (name == "depth") {
            for (double v : values) {
                if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v)))
                    throw ConfigError("depth values must be positive integers");
                spec.sweep_depth.push_back(static_cast<std::size_t>(v));
            }
        } else {
            throw ConfigError("unknown sweep parameter '" + name + "' (epsilon, kappa_p, depth)");
        }
    }
    spec.check();
    for (double eps : spec.sweep_epsilon) {
        PlannerConfig c = spec.act;
        c.epsilon = eps;
        c.max_depth();
    }
    const auto points = run_sweep(spec);

    fs::create_directories(o.out);
    std::ofstream table(fs::path(o.out) / "sweep.csv");
    table << std::setprecision(17) << "epsilon,kappa_p,depth,adr_mean,adr_std,n,failure_rate,nu_entropy\n";
    nlohmann::ordered_json summary;
    summary["points"] = nlohmann::ordered_json::array();
    std::cout << "epsilon\tkappa_p\tdepth\tadr_mean\tadr_std\tn\n";
    bool ok = true;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        const double nu = p.metrics.nu_histogram.empty() ? 0.0 : histogram_entropy(p.metrics.nu_histogram);
        table << p.epsilon << ',' << p.kappa_p << ',' << p.depth << ',' << p.metrics.adr_mean << ','
              << p.metrics.adr_std << ',' << p.metrics.n << ',' << p.metrics.failure_rate_mean << ',' << nu << '\n';
        std::cout << p.epsilon << '\t' << p.kappa_p << '\t' << p.depth << '\t' << p.metrics.adr_mean << '\t'
                  << p.metrics.adr_std << '\t' << p.metrics.n << '\n';
        ExperimentSpec point = spec;
        point.act.epsilon = p.epsilon;
        point.act.kappa_p = p.kappa_p;
        point.uct.c_p = p.kappa_p;
        point.env.trap.depth = p.depth;
        point.sweep_epsilon.clear();
        point.sweep_kappa_p.clear();
        point.sweep_depth.clear();
        write_bundle(fs::path(o.out) / ("point_" + std::to_string(i)), p.metrics, point);
        summary["points"].push_back(nlohmann::ordered_json::parse(summary_json(p.metrics, point)));
        ok &= p.metrics.failed_executions == 0;
    }
    summary["config"] = nlohmann::ordered_json::parse(config_json(spec));
    write_text(fs::path(o.out) / "summary.json", summary.dump(2));
    return ok ? 0 : 2;
}

int cmd_build_model(const Options& o) {
    const auto spec = environment_spec(o);
    const Environment env = build_environment(spec);
    fs::create_directories(o.out);
    const fs::path path = fs::path(o.out) / (env.name + ".model.json");
    save_model_file(*env.model, path.string());
    if (spec.kind == EnvKind::RockSample)
        write_text(fs::path(o.out) / "rocksample.layout.json", rocksample_layout_to_json(spec.rocksample));
    std::cout << path.string() << '\n';
    return 0;
}

int cmd_validate_model(const std::string& path) {
    try {
        const auto model = load_model_file(path);
        std::cout << path << ": valid (" << model.num_states << " states, " << model.num_obs << " observations, "
                  << model.num_actions << " actions)\n";
        return 0;
    } catch (const ModelError& e) {
        std::cerr << path << ": invalid\n";
        for (const auto& v : e.violations()) std::cerr << "  " << v.describe() << '\n';
        return 1;
    }
}

int cmd_raster(const Options& o) {
    auto spec = experiment_spec(o);
    if (spec.planner == PlannerKind::Uct) throw ConfigError("raster needs a tree-search planner (act or fe)");
    spec.check();
    const Environment env = build_environment(spec.env);
    Rng rng(spec.base_seed);
    auto process = env.make_process(rng);
    PlannerConfig cfg = spec.act;
    cfg.record_rollouts = true;
    cfg.rng_seed = spec.base_seed;
    if (spec.planner == PlannerKind::Fe) cfg.kappa_p = 0.0;
    if (spec.heuristic && env.heuristic) cfg.heuristic = env.heuristic;
    const std::size_t horizon = spec.step_limit.value_or(env.step_limit);
    const EpisodeTrace trace = act_episode(*env.model, *process, cfg, rng, horizon);

    std::vector<std::size_t> units;
    if (spec.env.kind == EnvKind::Tiger)
        units = {tiger::state(tiger::kLeft, trace.steps.front().state % 2),
                 tiger::state(tiger::kRight, trace.steps.front().state % 2)};
    const RasterRecord raster = record_raster(trace.steps, env.model->num_states, trace.steps.size(), units);

    fs::create_directories(o.out);
    write_raster_csv((fs::path(o.out) / "raster.csv").string(), raster);
    {
        std::ofstream traces(fs::path(o.out) / "traces.csv");
        traces << std::setprecision(17) << "column";
        for (auto u : raster.trace_units) traces << ",unit_" << u;
        traces << '\n';
        for (std::size_t c = 0; c < raster.cols(); ++c) {
            traces << c;
            for (const auto& t : raster.traces) traces << ',' << t[c];
            traces << '\n';
        }
    }
    nlohmann::ordered_json j;
    j["rows"] = raster.rows();
    j["cols"] = raster.cols();
    j["epochs"] = trace.steps.size();
    auto states = nlohmann::ordered_json::array(), actions = nlohmann::ordered_json::array();
    for (const auto& s : trace.steps) {
        states.push_back(s.state);
        actions.push_back(s.action);
    }
    j["states"] = states;
    j["actions"] = actions;
    j["final_state"] = trace.final_state;
    j["config"] = nlohmann::ordered_json::parse(config_json(spec));
    write_text(fs::path(o.out) / "summary.json", j.dump(2));
    std::cout << "raster " << raster.rows() << " x " << raster.cols() << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Active Inference Tree Search experiments"};
    app.require_subcommand(1);
    Options o;

    auto* run = app.add_subcommand("run", "run seeded executions and write metrics");
    add_experiment_flags(*run, o);
    auto* sweep = app.add_subcommand("sweep", "run a parameter sweep");
    add_experiment_flags(*sweep, o);
    sweep->add_option("--param", o.params, "name=v1,v2,... with name in {epsilon, kappa_p, depth}")->required();
    auto* build = app.add_subcommand("build-model", "write an environment's generative model as JSON");
    add_experiment_flags(*build, o);
    std::string model_path;
    auto* validate_cmd = app.add_subcommand("validate-model", "check a model JSON file");
    validate_cmd->add_option("model", model_path, "model file")->required();
    auto* raster = app.add_subcommand("raster", "record the belief raster of one episode");
    add_experiment_flags(*raster, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }
    if (raster->parsed() && !raster->count("--env")) o.env = "tiger";

    // Configuration problems exit 1, failures while running exit 2.
    try {
        if (validate_cmd->parsed()) return cmd_validate_model(model_path);
        experiment_spec(o).check();
        if (o.env.rfind("file:", 0) == 0) load_model_file(o.env.substr(5));
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    }
    try {
        if (run->parsed()) return cmd_run(o);
        if (sweep->parsed()) return cmd_sweep(o);
        if (build->parsed()) return cmd_build_model(o);
        if (raster->parsed()) return cmd_raster(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
