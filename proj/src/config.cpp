#include "twostep/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

#include "twostep/errors.hpp"

namespace twostep {

namespace {

using json = nlohmann::ordered_json;

constexpr double kSumTolerance = 1e-12;
constexpr double kRowTolerance = 1e-10;

std::size_t read_count(const json& v, const std::string& key) {
    if (!v.is_number_unsigned()) {
        throw ValidationError(key, "must be a positive integer");
    }
    return v.get<std::size_t>();
}

double read_real(const json& v, const std::string& key) {
    if (!v.is_number()) {
        throw ValidationError(key, "must be a number");
    }
    return v.get<double>();
}

EntityValues read_entity(const json& v, const std::string& key) {
    if (v.is_number()) {
        return EntityValues(v.get<double>());
    }
    if (!v.is_array() || v.empty()) {
        throw ValidationError(key, "must be a number or a nonempty array of numbers");
    }
    std::vector<double> out;
    for (const auto& e : v) {
        out.push_back(read_real(e, key));
    }
    return EntityValues(std::move(out));
}

Matrix read_matrix(const json& v, const std::string& key) {
    if (!v.is_array() || v.empty() || !v.front().is_array()) {
        throw ValidationError(key, "must be an array of rows");
    }
    const auto rows = static_cast<Eigen::Index>(v.size());
    const auto cols = static_cast<Eigen::Index>(v.front().size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = v[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw ValidationError(key, "rows must all have " + std::to_string(cols) + " entries");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = read_real(row[static_cast<std::size_t>(c)], key);
        }
    }
    return m;
}

json entity_json(const EntityValues& e) {
    if (e.is_scalar()) {
        return e.values.front();
    }
    return e.values;
}

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

void require_positive(double v, const char* field) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw ValidationError(field, "must be positive and finite (got " + std::to_string(v) + ")");
    }
}

void require_unit_values(const EntityValues& e, const char* field, std::size_t entities) {
    if (e.values.empty()) {
        throw ValidationError(field, "needs at least one value");
    }
    if (!e.is_scalar() && e.values.size() != entities) {
        throw ValidationError(field, "has " + std::to_string(e.values.size()) +
                                         " entries, expected 1 or " + std::to_string(entities));
    }
    for (double v : e.values) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw ValidationError(field, "values must lie in [0, 1] (got " + std::to_string(v) + ")");
        }
    }
}

void require_row_stochastic(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                            const char* field) {
    if (m.rows() != rows || m.cols() != cols) {
        throw ValidationError(field, "must be " + std::to_string(rows) + " x " +
                                         std::to_string(cols));
    }
    if ((m.array() < 0.0).any() || !m.allFinite()) {
        throw ValidationError(field, "entries must be nonnegative");
    }
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (std::abs(m.row(r).sum() - 1.0) > kRowTolerance) {
            throw ValidationError(field, "row " + std::to_string(r) + " does not sum to 1");
        }
    }
}

using Setter = std::function<void(ExperimentConfig&, const json&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table{
        {"n", [](auto& c, const json& v) { c.n = read_count(v, "n"); }},
        {"p", [](auto& c, const json& v) { c.p = read_count(v, "p"); }},
        {"q", [](auto& c, const json& v) { c.q = read_count(v, "q"); }},
        {"T", [](auto& c, const json& v) { c.T = read_count(v, "T"); }},
        {"a", [](auto& c, const json& v) { c.a = read_real(v, "a"); }},
        {"b", [](auto& c, const json& v) { c.b = read_real(v, "b"); }},
        {"a_m", [](auto& c, const json& v) { c.a_m = read_real(v, "a_m"); }},
        {"b_m", [](auto& c, const json& v) { c.b_m = read_real(v, "b_m"); }},
        {"a_x", [](auto& c, const json& v) { c.a_x = read_real(v, "a_x"); }},
        {"b_x", [](auto& c, const json& v) { c.b_x = read_real(v, "b_x"); }},
        {"sigma", [](auto& c, const json& v) { c.sigma = read_entity(v, "sigma"); }},
        {"rho", [](auto& c, const json& v) { c.rho = read_entity(v, "rho"); }},
        {"pi", [](auto& c, const json& v) { c.pi = read_entity(v, "pi"); }},
        {"theta", [](auto& c, const json& v) { c.theta = read_entity(v, "theta"); }},
        {"alpha", [](auto& c, const json& v) { c.alpha = read_real(v, "alpha"); }},
        {"beta", [](auto& c, const json& v) { c.beta = read_real(v, "beta"); }},
        {"lambda", [](auto& c, const json& v) { c.lambda = read_real(v, "lambda"); }},
        {"kappa", [](auto& c, const json& v) { c.kappa = read_real(v, "kappa"); }},
        {"matrix_mode",
         [](auto& c, const json& v) {
             if (!v.is_string()) {
                 throw ValidationError("matrix_mode", "must be a string");
             }
             c.matrix_mode = parse_matrix_mode(v.get<std::string>());
         }},
        {"W", [](auto& c, const json& v) { c.W = read_matrix(v, "W"); }},
        {"U", [](auto& c, const json& v) { c.U = read_matrix(v, "U"); }},
        {"master_seed",
         [](auto& c, const json& v) {
             if (!v.is_number_unsigned()) {
                 throw ValidationError("master_seed", "must be a nonnegative integer");
             }
             c.master_seed = v.get<std::uint64_t>();
         }},
    };
    return table;
}

json parse_json(std::string_view text) {
    try {
        return json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

double& scalar_field(ExperimentConfig& c, const std::string& name) {
    static const std::map<std::string, double ExperimentConfig::*> fields{
        {"a", &ExperimentConfig::a},         {"b", &ExperimentConfig::b},
        {"a_m", &ExperimentConfig::a_m},     {"b_m", &ExperimentConfig::b_m},
        {"a_x", &ExperimentConfig::a_x},     {"b_x", &ExperimentConfig::b_x},
        {"alpha", &ExperimentConfig::alpha}, {"beta", &ExperimentConfig::beta},
        {"lambda", &ExperimentConfig::lambda}, {"kappa", &ExperimentConfig::kappa},
    };
    return c.*fields.at(name);
}

}  // namespace

std::string_view to_string(MatrixMode mode) noexcept {
    switch (mode) {
        case MatrixMode::uniform:
            return "uniform";
        case MatrixMode::random_row_normalized:
            return "random_row_normalized";
        case MatrixMode::explicit_matrices:
            return "explicit";
    }
    return "unknown";
}

MatrixMode parse_matrix_mode(std::string_view name) {
    for (auto mode : {MatrixMode::uniform, MatrixMode::random_row_normalized,
                      MatrixMode::explicit_matrices}) {
        if (to_string(mode) == name) {
            return mode;
        }
    }
    throw ValidationError("matrix_mode", "expected uniform, random_row_normalized or explicit, got '" +
                                             std::string(name) + "'");
}

Vector EntityValues::expand(std::size_t k, std::string_view field) const {
    if (is_scalar()) {
        return Vector::Constant(static_cast<Eigen::Index>(k), values.front());
    }
    if (values.size() != k) {
        throw DimensionMismatch(std::string(field) + ": " + std::to_string(values.size()) +
                                " values for " + std::to_string(k) + " entities");
    }
    return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(k));
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
    auto same_matrix = [](const std::optional<Matrix>& x, const std::optional<Matrix>& y) {
        if (x.has_value() != y.has_value()) {
            return false;
        }
        return !x || (x->rows() == y->rows() && x->cols() == y->cols() && *x == *y);
    };
    return n == o.n && p == o.p && q == o.q && T == o.T && a == o.a && b == o.b &&
           a_m == o.a_m && b_m == o.b_m && a_x == o.a_x && b_x == o.b_x && sigma == o.sigma &&
           rho == o.rho && pi == o.pi && theta == o.theta && alpha == o.alpha &&
           beta == o.beta && lambda == o.lambda && kappa == o.kappa &&
           matrix_mode == o.matrix_mode && same_matrix(W, o.W) && same_matrix(U, o.U) &&
           master_seed == o.master_seed;
}

void validate(const ExperimentConfig& c) {
    if (c.n < 1) throw ValidationError("n", "must be at least 1");
    if (c.p < 1) throw ValidationError("p", "must be at least 1");
    if (c.q < 1) throw ValidationError("q", "must be at least 1");
    if (c.T < 1) throw ValidationError("T", "must be at least 1");
    require_positive(c.a, "a");
    require_positive(c.b, "b");
    require_positive(c.a_m, "a_m");
    require_positive(c.b_m, "b_m");
    require_positive(c.a_x, "a_x");
    require_positive(c.b_x, "b_x");
    require_unit_values(c.sigma, "sigma", c.p);
    require_unit_values(c.rho, "rho", c.q);
    require_unit_values(c.pi, "pi", c.q);
    require_unit_values(c.theta, "theta", c.q);
    const Vector rho = c.rho.expand(c.q, "rho");
    const Vector pi = c.pi.expand(c.q, "pi");
    const Vector theta = c.theta.expand(c.q, "theta");
    for (Eigen::Index i = 0; i < rho.size(); ++i) {
        if (std::abs(rho[i] + pi[i] + theta[i] - 1.0) > kSumTolerance) {
            throw ValidationError("rho", "rho + pi + theta must equal 1 for agent " +
                                             std::to_string(i));
        }
        if (!(pi[i] < 1.0)) {
            throw ValidationError("pi", "must be below 1 so that agent steady states exist");
        }
    }
    validate_preference(c.alpha, c.beta);
    require_positive(c.lambda, "lambda");
    require_positive(c.kappa, "kappa");
    const auto p = static_cast<Eigen::Index>(c.p);
    const auto q = static_cast<Eigen::Index>(c.q);
    if (c.matrix_mode == MatrixMode::explicit_matrices) {
        if (!c.W) throw ValidationError("W", "required when matrix_mode is explicit");
        if (!c.U) throw ValidationError("U", "required when matrix_mode is explicit");
        require_row_stochastic(*c.W, q, q, "W");
        require_row_stochastic(*c.U, q, p, "U");
    } else {
        if (c.W) throw ValidationError("W", "only allowed when matrix_mode is explicit");
        if (c.U) throw ValidationError("U", "only allowed when matrix_mode is explicit");
    }
}

ExperimentConfig parse_config(std::string_view json_text) {
    const json doc = parse_json(json_text);
    if (!doc.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    ExperimentConfig config;
    const auto& table = setters();
    for (const auto& [key, value] : doc.items()) {
        const auto it = table.find(key);
        if (it == table.end()) {
            throw ConfigError("unknown config key '" + key + "'");
        }
        if (value.is_null()) {
            continue;
        }
        it->second(config, value);
    }
    validate(config);
    return config;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config '" + path + "'");
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

bool config_sets_seed(std::string_view json_text) {
    const json doc = parse_json(json_text);
    return doc.is_object() && doc.contains("master_seed") && !doc["master_seed"].is_null();
}

std::string dump_config(const ExperimentConfig& c) {
    json doc = json::object();
    doc["n"] = c.n;
    doc["p"] = c.p;
    doc["q"] = c.q;
    doc["T"] = c.T;
    doc["a"] = c.a;
    doc["b"] = c.b;
    doc["a_m"] = c.a_m;
    doc["b_m"] = c.b_m;
    doc["a_x"] = c.a_x;
    doc["b_x"] = c.b_x;
    doc["sigma"] = entity_json(c.sigma);
    doc["rho"] = entity_json(c.rho);
    doc["pi"] = entity_json(c.pi);
    doc["theta"] = entity_json(c.theta);
    doc["alpha"] = c.alpha;
    doc["beta"] = c.beta;
    doc["lambda"] = c.lambda;
    doc["kappa"] = c.kappa;
    doc["matrix_mode"] = std::string(to_string(c.matrix_mode));
    if (c.W) doc["W"] = matrix_json(*c.W);
    if (c.U) doc["U"] = matrix_json(*c.U);
    doc["master_seed"] = c.master_seed;
    return doc.dump(2) + "\n";
}

void save_config(const ExperimentConfig& config, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write '" + path + "'");
    }
    out << dump_config(config);
}

std::vector<std::string> sweepable_parameters() {
    return {"n",  "p",     "q",     "T",     "a",    "b",     "a_m",    "b_m",   "a_x",
            "b_x", "sigma", "rho",  "pi",    "theta", "alpha", "beta", "lambda", "kappa",
            "mu"};
}

void set_parameter(ExperimentConfig& c, const std::string& name, double value) {
    if (!std::isfinite(value)) {
        throw ValidationError(name, "sweep value must be finite");
    }
    if (name == "n" || name == "p" || name == "q" || name == "T") {
        if (!(value >= 1.0) || value != std::floor(value)) {
            throw ValidationError(name, "must be a positive integer");
        }
        const auto count = static_cast<std::size_t>(value);
        if (name == "n") c.n = count;
        if (name == "p") c.p = count;
        if (name == "q") c.q = count;
        if (name == "T") c.T = count;
    } else if (name == "mu") {
        if (!(value > 0.0 && value < 1.0)) {
            throw ValidationError("mu", "must lie in (0, 1)");
        }
        const double total = c.a + c.b;
        c.a = value * total;
        c.b = (1.0 - value) * total;
    } else if (name == "sigma") {
        c.sigma = EntityValues(value);
    } else if (name == "rho") {
        if (!(value >= 0.0 && value <= 1.0)) {
            throw ValidationError("rho", "must lie in [0, 1]");
        }
        const Vector pi = c.pi.expand(c.q, "pi");
        const Vector theta = c.theta.expand(c.q, "theta");
        if (!c.pi.is_scalar() || !c.theta.is_scalar()) {
            throw ValidationError("rho", "can only be swept when pi and theta are scalars");
        }
        const double rest = pi[0] + theta[0];
        const double share = rest > 0.0 ? theta[0] / rest : 0.5;
        c.rho = EntityValues(value);
        c.theta = EntityValues((1.0 - value) * share);
        c.pi = EntityValues(1.0 - value - (1.0 - value) * share);
    } else if (name == "pi") {
        c.pi = EntityValues(value);
    } else if (name == "theta") {
        c.theta = EntityValues(value);
    } else {
        static const std::vector<std::string> reals{"a",    "b",      "a_m",  "b_m",  "a_x",
                                                    "b_x",  "alpha",  "beta", "lambda", "kappa"};
        if (std::find(reals.begin(), reals.end(), name) == reals.end()) {
            throw ValidationError(name, "is not a sweepable parameter");
        }
        scalar_field(c, name) = value;
    }
    validate(c);
}

}  // namespace twostep
