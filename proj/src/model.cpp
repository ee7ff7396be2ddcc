#include "bml/model.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace bml {

namespace {

constexpr double kRowTolerance = 1e-9;

using json = nlohmann::json;

void add(ValidationReport& r, std::string path, std::string what, double magnitude) {
    r.ok = false;
    r.violations.push_back({std::move(path), std::move(what), magnitude});
}

template <typename Row>
void check_distribution(ValidationReport& r, const std::string& path, const Row& row) {
    for (Eigen::Index k = 0; k < row.size(); ++k) {
        const double v = row(k);
        if (!std::isfinite(v))
            add(r, path + "[" + std::to_string(k) + "]", "non-finite probability", v);
        else if (v < 0.0)
            add(r, path + "[" + std::to_string(k) + "]", "negative probability", v);
    }
    const double total = row.sum();
    if (!(std::abs(total - 1.0) <= kRowTolerance))
        add(r, path, "row does not sum to 1", total - 1.0);
}

double number_at(const json& j, const std::string& path) {
    if (!j.is_number()) throw ParseError("expected a number at " + path);
    return j.get<double>();
}

std::size_t count_at(const json& doc, const char* key) {
    if (!doc.contains(key)) throw ParseError(std::string("missing key '") + key + "'");
    const json& j = doc.at(key);
    if (!j.is_number_integer() || j.get<long long>() <= 0)
        throw ParseError(std::string("'") + key + "' must be a positive integer");
    return static_cast<std::size_t>(j.get<long long>());
}

const json& array_at(const json& doc, const char* key) {
    if (!doc.contains(key)) throw ParseError(std::string("missing key '") + key + "'");
    const json& j = doc.at(key);
    if (!j.is_array()) throw ParseError(std::string("'") + key + "' must be an array");
    return j;
}

// Reads a vector, recording a shape violation if the length is wrong.
Eigen::VectorXd read_vector(const json& j, const std::string& path, std::size_t n,
                            ValidationReport& shape) {
    if (!j.is_array()) throw ParseError("expected an array at " + path);
    if (j.size() != n) {
        add(shape, path,
            "expected length " + std::to_string(n) + ", got " + std::to_string(j.size()),
            static_cast<double>(j.size()));
        return {};
    }
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k)
        v(static_cast<Eigen::Index>(k)) = number_at(j[k], path + "[" + std::to_string(k) + "]");
    return v;
}

Eigen::MatrixXd read_matrix(const json& j, const std::string& path, std::size_t rows,
                            std::size_t cols, ValidationReport& shape) {
    if (!j.is_array()) throw ParseError("expected an array at " + path);
    if (j.size() != rows) {
        add(shape, path,
            "expected " + std::to_string(rows) + " rows, got " + std::to_string(j.size()),
            static_cast<double>(j.size()));
        return {};
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    bool good = true;
    for (std::size_t r = 0; r < rows; ++r) {
        const std::string row_path = path + "[" + std::to_string(r) + "]";
        if (j[r].is_array() && !j[r].empty() && j[r][0].is_array()) {
            add(shape, row_path, "nested array where a number row was expected", 0.0);
            good = false;
            continue;
        }
        Eigen::VectorXd row = read_vector(j[r], row_path, cols, shape);
        if (row.size() == 0) {
            good = false;
            continue;
        }
        out.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return good ? out : Eigen::MatrixXd{};
}

json to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
    return out;
}

json to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(to_json(Eigen::VectorXd(m.row(r).transpose())));
    return out;
}

}  // namespace

double PomdpModel::r_max() const {
    return reward.size() == 0 ? 0.0 : reward.cwiseAbs().maxCoeff();
}

Eigen::VectorXd PomdpModel::log_preference(PreferenceConvention convention) const {
    Eigen::VectorXd scaled = lambda * preference_logits;
    if (convention == PreferenceConvention::SelfNormalized) return scaled;
    const double top = scaled.maxCoeff();
    const double log_z = top + std::log((scaled.array() - top).exp().sum());
    return scaled.array() - log_z;
}

std::string ValidationReport::summary() const {
    if (ok) return "ok";
    std::ostringstream out;
    for (std::size_t k = 0; k < violations.size(); ++k) {
        if (k) out << "; ";
        out << violations[k].path << ": " << violations[k].description << " ("
            << violations[k].magnitude << ")";
    }
    return out.str();
}

ValidationError::ValidationError(ValidationReport report)
    : std::runtime_error("model validation failed: " + report.summary()),
      report_(std::move(report)) {}

ValidationReport validate_model(const PomdpModel& m) {
    ValidationReport r;
    const auto S = static_cast<Eigen::Index>(m.num_states);
    const auto A = static_cast<Eigen::Index>(m.num_actions);
    const auto O = static_cast<Eigen::Index>(m.num_observations);

    if (S == 0) add(r, "num_states", "must be positive", 0.0);
    if (A == 0) add(r, "num_actions", "must be positive", 0.0);
    if (O == 0) add(r, "num_observations", "must be positive", 0.0);

    if (m.transition.size() != m.num_actions) {
        add(r, "transition", "expected one matrix per action",
            static_cast<double>(m.transition.size()));
    } else {
        for (Eigen::Index a = 0; a < A; ++a) {
            const auto& t = m.transition[static_cast<std::size_t>(a)];
            const std::string path = "transition[" + std::to_string(a) + "]";
            if (t.rows() != S || t.cols() != S) {
                add(r, path, "expected an S x S matrix", static_cast<double>(t.rows()));
                continue;
            }
            for (Eigen::Index s = 0; s < S; ++s)
                check_distribution(r, path + "[" + std::to_string(s) + "]", t.row(s));
        }
    }

    if (m.emission.rows() != S || m.emission.cols() != O) {
        add(r, "emission", "expected an S x O matrix", static_cast<double>(m.emission.rows()));
    } else {
        for (Eigen::Index s = 0; s < S; ++s)
            check_distribution(r, "emission[" + std::to_string(s) + "]", m.emission.row(s));
    }

    if (m.reward.rows() != S || m.reward.cols() != A) {
        add(r, "reward", "expected an S x A matrix", static_cast<double>(m.reward.rows()));
    } else if (!m.reward.allFinite()) {
        add(r, "reward", "non-finite reward", 0.0);
    }

    if (m.preference_logits.size() != O)
        add(r, "preference_logits", "expected length O",
            static_cast<double>(m.preference_logits.size()));
    else if (!m.preference_logits.allFinite())
        add(r, "preference_logits", "non-finite logit", 0.0);

    if (!(m.lambda > 0.0) || !std::isfinite(m.lambda))
        add(r, "lambda", "preference temperature must be positive", m.lambda);

    if (m.initial_belief.size() != S)
        add(r, "initial_belief", "expected length S",
            static_cast<double>(m.initial_belief.size()));
    else
        check_distribution(r, "initial_belief", m.initial_belief);

    if (!(m.discount > 0.0 && m.discount < 1.0))
        add(r, "discount", "discount not in (0,1)", m.discount);

    return r;
}

PomdpModel parse_model(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("malformed model document: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("model document must be a JSON object");

    static const std::set<std::string> known = {
        "name",     "num_states",        "num_actions", "num_observations",
        "transition", "emission",        "reward",      "preference_logits",
        "lambda",   "initial_belief",    "discount"};
    for (const auto& item : doc.items())
        if (!known.count(item.key())) throw ParseError("unknown key '" + item.key() + "'");

    PomdpModel m;
    if (!doc.contains("name") || !doc.at("name").is_string())
        throw ParseError("'name' must be a string");
    m.name = doc.at("name").get<std::string>();
    m.num_states = count_at(doc, "num_states");
    m.num_actions = count_at(doc, "num_actions");
    m.num_observations = count_at(doc, "num_observations");
    const std::size_t S = m.num_states, A = m.num_actions, O = m.num_observations;

    ValidationReport shape;

    const json& t = array_at(doc, "transition");
    if (t.size() != A) {
        add(shape, "transition",
            "expected " + std::to_string(A) + " action matrices, got " + std::to_string(t.size()),
            static_cast<double>(t.size()));
    } else {
        for (std::size_t a = 0; a < A; ++a)
            m.transition.push_back(
                read_matrix(t[a], "transition[" + std::to_string(a) + "]", S, S, shape));
    }

    const json& e = array_at(doc, "emission");
    if (!e.empty() && e[0].is_array() && !e[0].empty() && e[0][0].is_array())
        add(shape, "emission", "action-dependent emission is not supported; expected [S][O]", 0.0);
    else
        m.emission = read_matrix(e, "emission", S, O, shape);

    m.reward = read_matrix(array_at(doc, "reward"), "reward", S, A, shape);
    m.preference_logits =
        read_vector(array_at(doc, "preference_logits"), "preference_logits", O, shape);
    m.initial_belief = read_vector(array_at(doc, "initial_belief"), "initial_belief", S, shape);

    if (doc.contains("lambda")) m.lambda = number_at(doc.at("lambda"), "lambda");
    if (!doc.contains("discount")) throw ParseError("missing key 'discount'");
    m.discount = number_at(doc.at("discount"), "discount");

    if (!shape.ok) throw ValidationError(std::move(shape));
    ValidationReport report = validate_model(m);
    if (!report.ok) throw ValidationError(std::move(report));
    return m;
}

PomdpModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_model(buf.str());
}

std::string serialize_model(const PomdpModel& m) {
    json doc;
    doc["name"] = m.name;
    doc["num_states"] = m.num_states;
    doc["num_actions"] = m.num_actions;
    doc["num_observations"] = m.num_observations;
    json t = json::array();
    for (const auto& ta : m.transition) t.push_back(to_json(ta));
    doc["transition"] = std::move(t);
    doc["emission"] = to_json(m.emission);
    doc["reward"] = to_json(m.reward);
    doc["preference_logits"] = to_json(m.preference_logits);
    doc["lambda"] = m.lambda;
    doc["initial_belief"] = to_json(m.initial_belief);
    doc["discount"] = m.discount;
    return doc.dump(2) + "\n";
}

void save_model(const PomdpModel& m, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write model file " + path.string());
    out << serialize_model(m);
}

PomdpModel with_lambda(PomdpModel m, double lambda) {
    m.lambda = lambda;
    return m;
}

}  // namespace bml
