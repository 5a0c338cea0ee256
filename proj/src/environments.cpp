#include "act/environments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "act/efe.hpp"

namespace act {

std::unique_ptr<GenerativeProcess> Environment::make_process(Rng& rng) const {
    return std::make_unique<ModelProcess>(model, initial_state(rng), reward, terminal, observation_reward);
}

std::vector<bool> Environment::terminal_states() const {
    std::vector<bool> out(model->num_states, false);
    if (terminal)
        for (std::size_t s = 0; s < out.size(); ++s) out[s] = terminal(s);
    return out;
}

namespace {

StochasticMatrix deterministic(std::size_t n, const std::function<std::size_t(std::size_t)>& next) {
    std::vector<std::vector<Entry>> cols(n);
    for (std::size_t s = 0; s < n; ++s) cols[s].push_back({static_cast<std::uint32_t>(next(s)), 1.0});
    return StochasticMatrix::from_columns(n, std::move(cols));
}

std::shared_ptr<GenerativeModel> fully_observed(std::size_t n, std::vector<StochasticMatrix> transitions,
                                                const std::vector<double>& utilities, std::size_t start) {
    auto m = std::make_shared<GenerativeModel>();
    m->num_states = n;
    m->num_obs = n;
    m->num_actions = transitions.size();
    m->set_shared_likelihood(StochasticMatrix::identity(n));
    m->transitions = std::move(transitions);
    m->set_preferences(softmax(utilities));
    m->initial_belief = Categorical::point(n, start);
    m->beta = suggested_beta(*m);
    require_valid(*m);
    return m;
}

}  // namespace

// ---------------------------------------------------------------- binary trap

std::vector<double> binary_trap_rewards(const BinaryTrapSpec& spec) {
    const std::size_t d_max = spec.depth;
    std::vector<double> r(2 * d_max + 1, 0.0);
    for (std::size_t d = 1; d <= d_max; ++d)
        r[d_max + d - 1] = static_cast<double>(d_max - d) / static_cast<double>(d_max);
    r[2 * d_max] = 1.0;
    return r;
}

std::size_t binary_trap_depth_reached(const BinaryTrapSpec& spec, std::size_t state) {
    const std::size_t d_max = spec.depth;
    if (state < d_max) return state;
    if (state < 2 * d_max) return state - d_max;
    return d_max;
}

Environment build_binary_trap(const BinaryTrapSpec& spec) {
    const std::size_t d_max = spec.depth;
    if (d_max < 1) throw Error("binary trap: depth must be >= 1");
    const std::size_t n = 2 * d_max + 1;
    auto advance = deterministic(n, [&](std::size_t s) {
        if (s + 1 < d_max) return s + 1;
        return s + 1 == d_max ? 2 * d_max : s;
    });
    auto trap = deterministic(n, [&](std::size_t s) { return s < d_max ? d_max + s : s; });
    const auto rewards = binary_trap_rewards(spec);

    Environment env;
    env.name = "binarytrap";
    env.model = fully_observed(n, {std::move(advance), std::move(trap)}, rewards, 0);
    env.reward = [rewards, d_max](std::size_t from, std::size_t, std::size_t to) {
        return from != to && to >= d_max ? rewards[to] : 0.0;
    };
    env.terminal = [d_max](std::size_t s) { return s >= d_max; };
    env.initial_state = [](Rng&) { return std::size_t{0}; };
    env.step_limit = d_max + 1;
    return env;
}

// ------------------------------------------------------------------ g-function

double g_function(double x) {
    if (!(x > 0.0 && x <= 1.0)) throw Error("g: x must lie in (0, 1]");
    const double wave = 0.5 * std::abs(std::sin(1.0 / std::pow(x, 5)));
    return (x < 0.5 ? 0.5 : 0.35) + wave;
}

std::size_t g_function_depth(const GFunctionSpec& spec) {
    if (!(spec.min_width > 0.0 && spec.min_width < 1.0)) throw Error("g-function: min_width must lie in (0, 1)");
    std::size_t d = 0;
    double width = 1.0;
    while (!(width < spec.min_width)) {
        width *= 0.5;
        ++d;
    }
    return d;
}

Interval g_function_interval(std::size_t state) {
    std::size_t depth = 0;
    while ((std::size_t{2} << depth) - 1 <= state) ++depth;
    const std::size_t pos = state + 1 - (std::size_t{1} << depth);
    const double width = std::ldexp(1.0, -static_cast<int>(depth));
    return {static_cast<double>(pos) * width, static_cast<double>(pos + 1) * width};
}

Environment build_g_function(const GFunctionSpec& spec) {
    const std::size_t depth = g_function_depth(spec);
    if (depth > 24) throw Error("g-function: resolution too fine");
    const std::size_t n = (std::size_t{2} << depth) - 1;
    const std::size_t first_leaf = (std::size_t{1} << depth) - 1;
    auto left = deterministic(n, [&](std::size_t s) { return s < first_leaf ? 2 * s + 1 : s; });
    auto right = deterministic(n, [&](std::size_t s) { return s < first_leaf ? 2 * s + 2 : s; });
    std::vector<double> values(n);
    for (std::size_t s = 0; s < n; ++s) values[s] = g_function(g_function_interval(s).mid());

    Environment env;
    env.name = "gfunction";
    env.model = fully_observed(n, {std::move(left), std::move(right)}, values, 0);
    env.reward = [values, first_leaf](std::size_t from, std::size_t, std::size_t to) {
        return from != to && to >= first_leaf ? values[to] : 0.0;
    };
    env.terminal = [first_leaf](std::size_t s) { return s >= first_leaf; };
    env.initial_state = [](Rng&) { return std::size_t{0}; };
    env.step_limit = depth + 1;
    return env;
}

// ------------------------------------------------------------------ RockSample

RockSampleSpec rocksample_random_layout(int n, int k, std::uint64_t seed) {
    if (n < 1 || k < 0 || k > n * n) throw Error("rocksample: cannot place " + std::to_string(k) + " rocks");
    std::vector<Cell> cells;
    for (int y = 0; y < n; ++y)
        for (int x = 0; x < n; ++x) cells.push_back({x, y});
    Rng rng(seed);
    std::shuffle(cells.begin(), cells.end(), rng);
    RockSampleSpec spec;
    spec.n = n;
    spec.k = k;
    spec.rocks.assign(cells.begin(), cells.begin() + k);
    return spec;
}

RockSampleSpec rocksample_layout_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(std::string("rocksample layout: ") + e.what());
    }
    RockSampleSpec spec;
    try {
        spec.n = j.at("n").get<int>();
        spec.k = j.at("k").get<int>();
        for (const auto& c : j.at("rocks")) spec.rocks.push_back({c.at(0).get<int>(), c.at(1).get<int>()});
        if (j.contains("qualities"))
            for (const auto& q : j.at("qualities")) spec.qualities.push_back(q.get<bool>());
        if (j.contains("d0")) spec.d0 = j.at("d0").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("rocksample layout: ") + e.what());
    }
    RockSampleLayout check(spec);
    return spec;
}

std::string rocksample_layout_to_json(const RockSampleSpec& spec) {
    nlohmann::json j;
    j["n"] = spec.n;
    j["k"] = spec.k;
    j["rocks"] = nlohmann::json::array();
    for (const auto& c : spec.rocks) j["rocks"].push_back({c.x, c.y});
    if (!spec.qualities.empty()) {
        j["qualities"] = nlohmann::json::array();
        for (bool q : spec.qualities) j["qualities"].push_back(q);
    }
    j["d0"] = spec.half_accuracy_distance();
    return j.dump(2);
}

RockSampleLayout::RockSampleLayout(const RockSampleSpec& spec) : spec_(spec), rocks_(spec.rocks) {
    if (spec.n < 1) throw Error("rocksample: n must be >= 1");
    if (spec.k < 0 || static_cast<std::size_t>(spec.k) != rocks_.size())
        throw Error("rocksample: k does not match the number of rock cells");
    if (spec.k > 16) throw Error("rocksample: at most 16 rocks are supported");
    if (!spec.qualities.empty() && spec.qualities.size() != rocks_.size())
        throw Error("rocksample: qualities must list one entry per rock");
    for (std::size_t i = 0; i < rocks_.size(); ++i) {
        const Cell c = rocks_[i];
        if (c.x < 0 || c.y < 0 || c.x >= spec.n || c.y >= spec.n)
            throw Error("rocksample: rock " + std::to_string(i) + " lies off the grid");
        for (std::size_t j = 0; j < i; ++j)
            if (rocks_[j] == c) throw Error("rocksample: rocks " + std::to_string(j) + " and " + std::to_string(i) +
                                            " share a cell");
    }
    cells_ = static_cast<std::size_t>(spec.n) * static_cast<std::size_t>(spec.n);
    configs_ = std::size_t{1} << rocks_.size();
}

std::size_t RockSampleLayout::num_states() const { return cells_ * configs_ + configs_ + 1; }

std::size_t RockSampleLayout::grid_state(Cell c, std::size_t config) const {
    return (static_cast<std::size_t>(c.y) * spec_.n + c.x) * configs_ + config;
}
std::size_t RockSampleLayout::exit_state(std::size_t config) const { return cells_ * configs_ + config; }
std::size_t RockSampleLayout::border_state() const { return cells_ * configs_ + configs_; }

std::size_t RockSampleLayout::location(std::size_t s) const {
    if (is_grid(s)) return s / configs_;
    return is_border(s) ? cells_ + 1 : cells_;
}

std::size_t RockSampleLayout::config(std::size_t s) const {
    if (is_border(s)) return 0;
    return s % configs_;
}

Cell RockSampleLayout::cell(std::size_t loc) const {
    return {static_cast<int>(loc % spec_.n), static_cast<int>(loc / spec_.n)};
}

Cell RockSampleLayout::start_cell() const { return {0, spec_.n - 1 - (spec_.n - 1) / 2}; }

std::optional<std::size_t> RockSampleLayout::rock_at(Cell c) const {
    for (std::size_t i = 0; i < rocks_.size(); ++i)
        if (rocks_[i] == c) return i;
    return std::nullopt;
}

double RockSampleLayout::check_accuracy(Cell c, std::size_t rock) const {
    const Cell r = rocks_.at(rock);
    const double d = std::hypot(static_cast<double>(c.x - r.x), static_cast<double>(c.y - r.y));
    return 0.5 * (1.0 + std::exp2(-d / spec_.half_accuracy_distance()));
}

std::size_t RockSampleLayout::next(std::size_t s, std::size_t a) const {
    if (!is_grid(s)) return s;
    const std::size_t q = config(s);
    Cell c = cell(location(s));
    if (a < 4) {
        switch (static_cast<Move>(a)) {
            case Move::North: ++c.y; break;
            case Move::South: --c.y; break;
            case Move::West: --c.x; break;
            case Move::East: ++c.x; break;
        }
        if (c.x == spec_.n && c.y >= 0 && c.y < spec_.n) return exit_state(q);
        if (c.x < 0 || c.y < 0 || c.x >= spec_.n || c.y >= spec_.n) return border_state();
        return grid_state(c, q);
    }
    if (a == sample_action()) {
        if (const auto rock = rock_at(c)) return grid_state(c, q & ~(std::size_t{1} << *rock));
        return s;
    }
    if (a < sample_action()) return s;
    throw Error("rocksample: action out of range");
}

RockSampleFactors rocksample_factors(const RockSampleLayout& layout, std::size_t action) {
    if (action >= layout.num_actions()) throw Error("rocksample: action out of range");
    const std::size_t n_states = layout.num_states();
    const std::size_t n_configs = layout.num_configs();
    const bool sampling = action == layout.sample_action();
    const bool checking = action >= 4 && !sampling;
    const std::size_t rock = checking ? action - 4 : 0;

    std::vector<std::vector<Entry>> loc(n_states), conf(n_states), util(n_states);
    auto put = [](std::vector<Entry>& col, std::size_t i, double p) {
        if (p > 0.0) col.push_back({static_cast<std::uint32_t>(i), p});
    };
    for (std::size_t s = 0; s < n_states; ++s) {
        put(loc[s], layout.location(s), 1.0);

        const std::size_t q = layout.config(s);
        if (layout.is_border(s)) {
            for (std::size_t c = 0; c < n_configs; ++c) put(conf[s], c, 1.0 / static_cast<double>(n_configs));
        } else if (checking && layout.is_grid(s)) {
            const double acc = layout.check_accuracy(layout.cell(layout.location(s)), rock);
            put(conf[s], q, acc);
            put(conf[s], q ^ (std::size_t{1} << rock), 1.0 - acc);
        } else {
            put(conf[s], q, 1.0);
        }

        if (sampling) {
            if (layout.is_grid(s)) {
                const auto here = layout.rock_at(layout.cell(layout.location(s)));
                const bool good = here && ((q >> *here) & 1u);
                put(util[s], good ? 0 : 1, 1.0);
            } else {
                put(util[s], 0, 0.5);
                put(util[s], 1, 0.5);
            }
        } else if (layout.is_grid(s)) {
            put(util[s], 0, 0.5);
            put(util[s], 1, 0.5);
        } else if (layout.is_exit(s)) {
            put(util[s], q == 0 ? 0 : 1, 1.0);
        } else {
            put(util[s], 1, 1.0);
        }
    }
    return {StochasticMatrix::from_columns(layout.num_locations(), std::move(loc)),
            StochasticMatrix::from_columns(n_configs, std::move(conf)),
            StochasticMatrix::from_columns(2, std::move(util))};
}

Environment build_rocksample(const RockSampleSpec& spec) {
    auto layout = std::make_shared<const RockSampleLayout>(spec);
    const std::size_t n_states = layout->num_states();
    const std::size_t n_actions = layout->num_actions();
    const std::size_t n_configs = layout->num_configs();

    auto m = std::make_shared<GenerativeModel>();
    m->num_states = n_states;
    m->num_obs = layout->num_obs();
    m->num_actions = n_actions;
    auto compose = [&](std::size_t a) {
        auto f = rocksample_factors(*layout, a);
        const std::vector<StochasticMatrix> parts{std::move(f.location), std::move(f.configuration),
                                                  std::move(f.utility)};
        return column_kron(parts);
    };
    // Moves share one likelihood; each check and the sample action get their own.
    m->likelihoods.push_back(compose(0));
    for (std::size_t a = 4; a < n_actions; ++a) m->likelihoods.push_back(compose(a));
    for (std::size_t a = 0; a < n_actions; ++a) {
        m->likelihood_of_action.push_back(a < 4 ? 0 : a - 3);
        m->transitions.push_back(deterministic(n_states, [&](std::size_t s) { return layout->next(s, a); }));
    }
    m->observe_before_transition.assign(n_actions, false);
    m->observe_before_transition[layout->sample_action()] = true;

    const std::vector<Categorical> c_factors{Categorical::uniform(layout->num_locations()),
                                             Categorical::uniform(n_configs),
                                             softmax(std::vector<double>{spec.preference, -spec.preference})};
    m->set_preferences(kron(c_factors));

    std::vector<Entry> d;
    for (std::size_t q = 0; q < n_configs; ++q)
        d.push_back({static_cast<std::uint32_t>(layout->grid_state(layout->start_cell(), q)),
                     1.0 / static_cast<double>(n_configs)});
    m->initial_belief = Categorical::from_entries(n_states, std::move(d));
    m->beta = suggested_beta(*m);
    m->alpha = m->beta;
    require_valid(*m);

    Environment env;
    env.name = "rocksample";
    env.model = m;
    env.reward = [layout](std::size_t from, std::size_t action, std::size_t to) {
        const auto& sp = layout->spec();
        if (!layout->is_grid(from)) return 0.0;
        if (action == layout->sample_action()) {
            const auto here = layout->rock_at(layout->cell(layout->location(from)));
            const bool good = here && ((layout->config(from) >> *here) & 1u);
            return good ? sp.good_reward : sp.bad_reward;
        }
        return layout->is_exit(to) ? sp.exit_reward : 0.0;
    };
    env.terminal = [layout](std::size_t s) { return !layout->is_grid(s); };
    env.initial_state = [layout](Rng& rng) {
        const auto& sp = layout->spec();
        std::size_t q = 0;
        if (!sp.qualities.empty()) {
            for (std::size_t i = 0; i < sp.qualities.size(); ++i)
                if (sp.qualities[i]) q |= std::size_t{1} << i;
        } else {
            q = std::uniform_int_distribution<std::size_t>(0, layout->num_configs() - 1)(rng);
        }
        return layout->grid_state(layout->start_cell(), q);
    };
    env.step_limit = spec.step_limit;
    env.heuristic = rocksample_heuristic(spec);
    return env;
}

HeuristicFn rocksample_heuristic(const RockSampleSpec& spec) {
    auto layout = std::make_shared<const RockSampleLayout>(spec);
    const double bias = spec.heuristic_bias;
    return [layout, bias](const Categorical& belief, std::size_t action) -> double {
        const std::size_t k = layout->rocks().size();
        std::vector<double> loc_mass(layout->num_locations(), 0.0);
        std::vector<double> p_good(k, 0.0);
        for (const auto& e : belief.support()) {
            loc_mass[layout->location(e.index)] += e.value;
            const std::size_t q = layout->config(e.index);
            for (std::size_t i = 0; i < k; ++i)
                if ((q >> i) & 1u) p_good[i] += e.value;
        }
        const std::size_t loc = static_cast<std::size_t>(
            std::max_element(loc_mass.begin(), loc_mass.end()) - loc_mass.begin());
        if (loc >= layout->num_locations() - 2) return 1.0;
        const Cell here = layout->cell(loc);

        if (action == layout->sample_action()) {
            const auto rock = layout->rock_at(here);
            return rock && p_good[*rock] > 0.5 ? bias : 1.0;
        }
        if (action >= 4) {
            const double p = p_good[action - 4];
            return p >= 0.4 && p <= 0.6 ? bias : 1.0;
        }

        auto manhattan = [](Cell a, Cell b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); };
        int best = -1;
        for (std::size_t i = 0; i < k; ++i) {
            if (p_good[i] <= 0.5) continue;
            const int d = manhattan(here, layout->rocks()[i]);
            if (best < 0 || d < best) best = d;
        }
        Cell to = here;
        switch (static_cast<RockSampleLayout::Move>(action)) {
            case RockSampleLayout::Move::North: ++to.y; break;
            case RockSampleLayout::Move::South: --to.y; break;
            case RockSampleLayout::Move::West: --to.x; break;
            case RockSampleLayout::Move::East: ++to.x; break;
        }
        if (best < 0) return action == static_cast<std::size_t>(RockSampleLayout::Move::East) ? bias : 1.0;
        if (to.x < 0 || to.y < 0 || to.x >= layout->spec().n || to.y >= layout->spec().n) return 1.0;
        for (std::size_t i = 0; i < k; ++i) {
            if (p_good[i] <= 0.5) continue;
            if (manhattan(to, layout->rocks()[i]) < best) return bias;
        }
        return 1.0;
    };
}

// ----------------------------------------------------------------------- Tiger

Environment build_tiger_tmaze(const TigerTMazeSpec& spec) {
    using namespace tiger;
    const double p = spec.validity;
    if (!(p >= 0.0 && p <= 1.0)) throw Error("tiger: validity must lie in [0, 1]");
    if (spec.epochs < 1) throw Error("tiger: epochs must be >= 1");

    auto m = std::make_shared<GenerativeModel>();
    m->num_states = 8;
    m->num_obs = 16;
    m->num_actions = 4;

    std::vector<std::vector<Entry>> a(8);
    auto put = [](std::vector<Entry>& col, std::size_t i, double v) {
        if (v > 0.0) col.push_back({static_cast<std::uint32_t>(i), v});
    };
    for (std::size_t loc = 0; loc < 4; ++loc)
        for (std::size_t ctx = 0; ctx < 2; ++ctx) {
            auto& col = a[state(loc, ctx)];
            if (loc == kCentre) {
                put(col, obs(loc, kCue0), 0.5);
                put(col, obs(loc, kCue1), 0.5);
            } else if (loc == kLower) {
                put(col, obs(loc, ctx == 0 ? kCue0 : kCue1), p);
                put(col, obs(loc, ctx == 0 ? kCue1 : kCue0), 1.0 - p);
            } else {
                const bool rewarded = loc == rewarded_arm(ctx);
                put(col, obs(loc, kReward), rewarded ? p : 1.0 - p);
                put(col, obs(loc, kPenalty), rewarded ? 1.0 - p : p);
            }
        }
    m->set_shared_likelihood(StochasticMatrix::from_columns(16, std::move(a)));
    for (std::size_t u = 0; u < 4; ++u)
        m->transitions.push_back(deterministic(8, [u](std::size_t s) {
            const std::size_t loc = s / 2;
            return loc == kLeft || loc == kRight ? s : state(u, s % 2);
        }));

    std::vector<double> utility(16, 0.0);
    for (std::size_t pos = 0; pos < 4; ++pos) {
        utility[obs(pos, kReward)] = spec.utility;
        utility[obs(pos, kPenalty)] = -spec.utility;
    }
    m->set_preferences(softmax(utility));
    m->initial_belief = Categorical::from_entries(8, {{static_cast<std::uint32_t>(state(kCentre, 0)), 0.5},
                                                      {static_cast<std::uint32_t>(state(kCentre, 1)), 0.5}});
    require_valid(*m);

    Environment env;
    env.name = "tiger";
    env.model = m;
    env.observation_reward = [](std::size_t o) {
        const std::size_t outcome = o % 4;
        return outcome == kReward ? 1.0 : outcome == kPenalty ? -1.0 : 0.0;
    };
    env.initial_state = [](Rng& rng) { return state(kCentre, std::uniform_int_distribution<std::size_t>(0, 1)(rng)); };
    env.step_limit = spec.epochs;
    return env;
}

}  // namespace act
