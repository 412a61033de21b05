#ifndef TWOSTEP_CONFIG_HPP
#define TWOSTEP_CONFIG_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "twostep/model.hpp"
#include "twostep/steady_state.hpp"

namespace twostep {

enum class MatrixMode { uniform, random_row_normalized, explicit_matrices };

std::string_view to_string(MatrixMode mode) noexcept;
MatrixMode parse_matrix_mode(std::string_view name);

/// A per-entity parameter: one value broadcast to everyone, or one value per
/// entity.
struct EntityValues {
    std::vector<double> values;

    EntityValues() = default;
    EntityValues(double v) : values{v} {}  // NOLINT(google-explicit-constructor)
    EntityValues(std::vector<double> v) : values(std::move(v)) {}  // NOLINT

    bool is_scalar() const noexcept { return values.size() == 1; }
    /// Length-k vector; throws DimensionMismatch unless scalar or of length k.
    Vector expand(std::size_t k, std::string_view field) const;

    friend bool operator==(const EntityValues&, const EntityValues&) = default;
};

/// Experiment parameters. Field defaults are the reference settings:
/// n = 10^4, p = q = 10^3, T = 100, sigma = 1/2, rho = pi = theta = 1/3,
/// alpha = 1, beta = 2, all Beta parameters 1.
struct ExperimentConfig {
    std::size_t n = 10000;  // messages per step
    std::size_t p = 1000;   // leaders
    std::size_t q = 1000;   // agents
    std::size_t T = 100;    // steps
    double a = 1.0;         // message law Beta(a, b)
    double b = 1.0;
    double a_m = 1.0;       // leader initial opinions Beta(a_m, b_m)
    double b_m = 1.0;
    double a_x = 1.0;       // agent initial opinions Beta(a_x, b_x)
    double b_x = 1.0;
    EntityValues sigma{0.5};
    EntityValues rho{1.0 / 3.0};
    EntityValues pi{1.0 / 3.0};
    EntityValues theta{1.0 / 3.0};
    double alpha = 1.0;
    double beta = 2.0;
    double lambda = 1.15;
    double kappa = 0.18;
    MatrixMode matrix_mode = MatrixMode::uniform;
    std::optional<Matrix> W;  // explicit mode only, q x q
    std::optional<Matrix> U;  // explicit mode only, q x p
    std::uint64_t master_seed = 0;

    LeaderConstants constants() const { return {lambda, kappa}; }

    bool operator==(const ExperimentConfig& other) const;
};

/// Field-level checks; throws ValidationError naming the field.
void validate(const ExperimentConfig& config);

/// Parses a JSON document. Missing keys keep their defaults, unknown keys
/// raise ConfigError naming the key, syntax errors raise ConfigError with
/// line and column.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::string& path);

/// True when the document sets master_seed explicitly.
bool config_sets_seed(std::string_view json_text);

std::string dump_config(const ExperimentConfig& config);
void save_config(const ExperimentConfig& config, const std::string& path);

/// Names accepted by set_parameter: every numeric field plus "mu", which
/// moves the message mean with a + b held fixed.
std::vector<std::string> sweepable_parameters();

/// Sets one numeric parameter. "rho" rescales pi and theta so that their
/// ratio is kept and rho + pi + theta stays 1. Throws ValidationError naming
/// the parameter when it is unknown or the value is out of range.
void set_parameter(ExperimentConfig& config, const std::string& name, double value);

}  // namespace twostep

#endif  // TWOSTEP_CONFIG_HPP
