#include "act/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace act {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& rule) {
    throw ModelError({Violation{field, {}, {}, rule}});
}

const json& field(const json& doc, const char* name) {
    auto it = doc.find(name);
    if (it == doc.end()) fail(name, "missing field \"" + std::string(name) + "\"");
    return *it;
}

std::size_t count_field(const json& doc, const char* name) {
    const auto& v = field(doc, name);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        fail(name, "must be a nonnegative integer");
    return v.get<std::size_t>();
}

std::vector<double> vector_field(const json& v, const std::string& name) {
    if (!v.is_array()) fail(name, "must be an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& x : v) {
        if (!x.is_number()) fail(name, "must be an array of numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

// {"rows": R, "cols": C, "columns": [[[row, value], ...], ...]}
StochasticMatrix sparse_matrix_field(const json& v, const std::string& name) {
    try {
        const auto rows = v.at("rows").get<std::size_t>();
        const auto cols = v.at("cols").get<std::size_t>();
        const auto& columns = v.at("columns");
        if (!columns.is_array() || columns.size() != cols) fail(name, "sparse matrix must list \"cols\" columns");
        std::vector<std::vector<Entry>> out(cols);
        for (std::size_t j = 0; j < cols; ++j)
            for (const auto& e : columns[j]) {
                const auto i = e.at(0).get<std::size_t>();
                if (i >= rows) fail(name, "sparse matrix row index out of range");
                out[j].push_back({static_cast<std::uint32_t>(i), e.at(1).get<double>()});
            }
        return StochasticMatrix::unchecked_columns(rows, std::move(out));
    } catch (const json::exception& e) {
        fail(name, std::string("malformed sparse matrix: ") + e.what());
    } catch (const ModelError&) {
        throw;
    } catch (const Error& e) {
        fail(name, e.what());
    }
}

StochasticMatrix matrix_field(const json& v, const std::string& name) {
    if (v.is_object()) return sparse_matrix_field(v, name);
    if (!v.is_array()) fail(name, "must be an array of rows");
    std::vector<std::vector<double>> rows;
    rows.reserve(v.size());
    for (const auto& row : v) rows.push_back(vector_field(row, name));
    try {
        return StochasticMatrix::unchecked(rows);
    } catch (const Error& e) {
        fail(name, e.what());
    }
}

constexpr std::size_t kDenseLimit = 1u << 16;

json matrix_json(const StochasticMatrix& m) {
    if (m.rows() * m.cols() <= kDenseLimit) return json(m.dense());
    json columns = json::array();
    for (std::size_t j = 0; j < m.cols(); ++j) {
        json col = json::array();
        for (const auto& e : m.column(j)) col.push_back({e.index, e.value});
        columns.push_back(std::move(col));
    }
    return {{"rows", m.rows()}, {"cols", m.cols()}, {"columns", std::move(columns)}};
}

}  // namespace

GenerativeModel load_model(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail("model", std::string("JSON parse error: ") + e.what());
    }
    if (!doc.is_object()) fail("model", "document must be a JSON object");

    GenerativeModel m;
    m.num_states = count_field(doc, "num_states");
    m.num_obs = count_field(doc, "num_obs");
    m.num_actions = count_field(doc, "num_actions");

    const auto& a = field(doc, "likelihood");
    if (!a.is_array() || a.empty()) fail("likelihood", "must be a non-empty array of matrices");
    for (const auto& mat : a) m.likelihoods.push_back(matrix_field(mat, "likelihood"));
    if (auto it = doc.find("likelihood_of_action"); it != doc.end()) {
        if (!it->is_array() || it->size() != m.num_actions) fail("likelihood_of_action", "must list one index per action");
        for (const auto& x : *it) {
            if (!x.is_number_unsigned() || x.get<std::size_t>() >= m.likelihoods.size())
                fail("likelihood_of_action", "entries must index into \"likelihood\"");
            m.likelihood_of_action.push_back(x.get<std::size_t>());
        }
    } else if (m.likelihoods.size() == 1) {
        m.likelihood_of_action.assign(m.num_actions, 0);
    } else if (m.likelihoods.size() == m.num_actions) {
        for (std::size_t u = 0; u < m.num_actions; ++u) m.likelihood_of_action.push_back(u);
    } else {
        fail("likelihood", "must hold 1 shared matrix or one per action");
    }

    const auto& b = field(doc, "transitions");
    if (!b.is_array()) fail("transitions", "must be an array of matrices");
    for (const auto& mat : b) m.transitions.push_back(matrix_field(mat, "transitions"));

    std::vector<Violation> problems;
    auto take_distribution = [&](const std::vector<double>& values, std::size_t n, const char* name) {
        auto v = distribution_violations(values, n, name);
        problems.insert(problems.end(), v.begin(), v.end());
        return v.empty() ? Categorical(values) : Categorical::uniform(std::max<std::size_t>(n, 1));
    };
    m.set_preferences(take_distribution(vector_field(field(doc, "preferences"), "preferences"), m.num_obs, "C"));
    m.initial_belief =
        take_distribution(vector_field(field(doc, "initial_belief"), "initial_belief"), m.num_states, "D");
    if (auto it = doc.find("habit_prior"); it != doc.end() && !it->is_null())
        m.habit_prior = take_distribution(vector_field(*it, "habit_prior"), m.num_actions, "E");

    if (auto it = doc.find("alpha"); it != doc.end()) m.alpha = it->get<double>();
    if (auto it = doc.find("beta"); it != doc.end()) m.beta = it->get<double>();
    if (auto it = doc.find("observe_before_transition"); it != doc.end()) {
        if (!it->is_array()) fail("observe_before_transition", "must be an array of booleans");
        for (const auto& x : *it) {
            if (!x.is_boolean()) fail("observe_before_transition", "must be an array of booleans");
            m.observe_before_transition.push_back(x.get<bool>());
        }
    }

    auto structural = validate(m);
    problems.insert(problems.end(), structural.begin(), structural.end());
    if (!problems.empty()) throw ModelError(std::move(problems));
    return m;
}

std::string save_model(const GenerativeModel& model) {
    json doc;
    doc["num_states"] = model.num_states;
    doc["num_obs"] = model.num_obs;
    doc["num_actions"] = model.num_actions;

    json a = json::array();
    for (const auto& l : model.likelihoods) a.push_back(matrix_json(l));
    doc["likelihood"] = std::move(a);
    if (model.likelihoods.size() != 1 && model.likelihoods.size() != model.num_actions) {
        doc["likelihood_of_action"] = model.likelihood_of_action;
    } else if (model.likelihoods.size() == model.num_actions) {
        bool identity_map = true;
        for (std::size_t u = 0; u < model.num_actions; ++u) identity_map &= model.likelihood_of_action[u] == u;
        if (!identity_map) doc["likelihood_of_action"] = model.likelihood_of_action;
    }

    json b = json::array();
    for (const auto& t : model.transitions) b.push_back(matrix_json(t));
    doc["transitions"] = std::move(b);

    doc["preferences"] = model.log_preferences.exp();
    doc["initial_belief"] = model.initial_belief.dense();
    doc["habit_prior"] = model.habit_prior ? json(model.habit_prior->dense()) : json(nullptr);
    doc["alpha"] = model.alpha;
    doc["beta"] = model.beta;
    if (!model.observe_before_transition.empty())
        doc["observe_before_transition"] = model.observe_before_transition;
    return doc.dump();
}

GenerativeModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open model file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return load_model(buf.str());
}

void save_model_file(const GenerativeModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write model file: " + path);
    out << save_model(model) << '\n';
}

}  // namespace act
