#include <doctest.h>

#include <json.hpp>

#include "act/environments.hpp"
#include "act/model_io.hpp"
#include "test_support.hpp"

using namespace act;

namespace {

GenerativeModel two_state_model() {
    GenerativeModel m;
    m.num_states = 2;
    m.num_obs = 2;
    m.num_actions = 2;
    m.set_shared_likelihood(StochasticMatrix::identity(2));
    m.transitions = {StochasticMatrix::identity(2), StochasticMatrix::from_dense({{0, 1}, {1, 0}})};
    m.set_preferences(Categorical{0.5, 0.5});
    m.initial_belief = Categorical{1, 0};
    return m;
}

bool same_numbers(const GenerativeModel& a, const GenerativeModel& b) {
    if (a.num_states != b.num_states || a.num_obs != b.num_obs || a.num_actions != b.num_actions) return false;
    for (std::size_t u = 0; u < a.num_actions; ++u) {
        if (a.likelihood(u).dense() != b.likelihood(u).dense()) return false;
        if (a.transition(u).dense() != b.transition(u).dense()) return false;
    }
    for (std::size_t o = 0; o < a.num_obs; ++o)
        if (std::abs(a.log_preferences[o] - b.log_preferences[o]) > 1e-12) return false;
    return a.initial_belief.dense() == b.initial_belief.dense() && a.alpha == b.alpha && a.beta == b.beta &&
           a.observe_before_transition == b.observe_before_transition;
}

}  // namespace

TEST_CASE("validate accepts well-formed models") {
    CHECK(validate(two_state_model()).empty());
    CHECK(validate(*build_tiger_tmaze({}).model).empty());
}

TEST_CASE("validate names a defective B column") {
    auto m = two_state_model();
    m.transitions[0] = StochasticMatrix::unchecked({{0.9, 0.0}, {0.0, 1.0}});
    const auto v = validate(m);
    REQUIRE(v.size() == 1);
    CHECK(v[0].tensor == "B");
    CHECK(v[0].action == std::optional<std::size_t>(0));
    CHECK(v[0].index == std::optional<std::size_t>(0));
    CHECK(v[0].describe().find("B") != std::string::npos);
}

TEST_CASE("validate reports a D of the wrong length") {
    auto m = two_state_model();
    m.initial_belief = Categorical{0.2, 0.3, 0.5};
    const auto v = validate(m);
    REQUIRE(v.size() == 1);
    CHECK(v[0].tensor == "D");
}

TEST_CASE("validate checks alpha, beta and habit prior") {
    auto m = two_state_model();
    m.alpha = 0.0;
    m.habit_prior = Categorical{1.0, 0.0, 0.0};
    const auto v = validate(m);
    CHECK(v.size() == 2);
}

TEST_CASE("tiger model round-trips through JSON") {
    const auto env = build_tiger_tmaze({});
    const auto& tiger = *env.model;
    const auto back = load_model(save_model(tiger));
    CHECK(same_numbers(tiger, back));
    CHECK(validate(back).empty());
}

TEST_CASE("random models round-trip through JSON") {
    Rng rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        auto r = testing::random_model(rng, 6, 5, 4);
        r.model.habit_prior = Categorical(testing::random_distribution(r.model.num_actions, rng));
        r.model.alpha = 2.5;
        const auto back = load_model(save_model(r.model));
        CHECK(same_numbers(r.model, back));
        REQUIRE(back.habit_prior);
        for (std::size_t u = 0; u < r.model.num_actions; ++u)
            CHECK(std::abs((*back.habit_prior)[u] - (*r.model.habit_prior)[u]) <= 1e-12);
    }
}

TEST_CASE("large models use the sparse matrix form") {
    RockSampleSpec spec = rocksample_random_layout(5, 4, 1);
    const auto env = build_rocksample(spec);
    const auto& m = *env.model;
    const std::string text = save_model(m);
    const auto doc = nlohmann::json::parse(text);
    CHECK(doc["transitions"][0].is_object());
    const auto back = load_model(text);
    CHECK(same_numbers(m, back));
}

TEST_CASE("missing fields are reported by name") {
    auto doc = nlohmann::json::parse(save_model(two_state_model()));
    doc.erase("transitions");
    try {
        load_model(doc.dump());
        FAIL("expected a ModelError");
    } catch (const ModelError& e) {
        CHECK(std::string(e.what()).find("transitions") != std::string::npos);
    }
}

TEST_CASE("load reports validation problems") {
    auto doc = nlohmann::json::parse(save_model(two_state_model()));
    doc["transitions"][0] = {{0.9, 0.0}, {0.0, 1.0}};
    doc["initial_belief"] = {0.5, 0.6};
    try {
        load_model(doc.dump());
        FAIL("expected a ModelError");
    } catch (const ModelError& e) {
        CHECK(e.violations().size() == 2);
    }
    CHECK_THROWS_AS(load_model("{not json"), ModelError);
}

TEST_CASE("the RockSample(2,1) document passes validation") {
    RockSampleSpec spec;
    spec.n = 2;
    spec.k = 1;
    spec.rocks = {{1, 0}};
    spec.qualities = {true};
    spec.d0 = 1.0;
    const auto back = load_model(save_model(*build_rocksample(spec).model));
    CHECK(validate(back).empty());
    CHECK(back.num_states == 11);
}

TEST_CASE("model process samples the generative model") {
    auto model = std::make_shared<const GenerativeModel>(two_state_model());
    ModelProcess process(model, 0, [](std::size_t, std::size_t a, std::size_t) { return a == 1 ? 1.0 : 0.0; },
                         [](std::size_t s) { return s == 1; });
    Rng rng(1);
    CHECK(process.initial_observation(rng) == 0);
    auto out = process.step(0, rng);
    CHECK(out.state == 0);
    CHECK(!out.terminal);
    out = process.step(1, rng);
    CHECK(out.state == 1);
    CHECK(out.observation == 1);
    CHECK(out.reward == 1.0);
    CHECK(out.terminal);
    CHECK_THROWS_AS(process.step(2, rng), Error);
}

TEST_CASE("absorbing states") {
    const auto env = build_binary_trap({3});
    const auto absorbing = absorbing_states(*env.model);
    for (std::size_t s = 0; s < 7; ++s) CHECK(absorbing[s] == (s >= 3));
}
