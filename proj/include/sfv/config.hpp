#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sfv/flux.hpp"
#include "sfv/grid.hpp"
#include "sfv/noise.hpp"

namespace sfv {

/// Value in the TOML-like config subset: numbers, strings, booleans, arrays and
/// inline tables `{ key = value, ... }`.
struct ConfigValue {
    enum class Kind { number, string, boolean, array, table };
    Kind kind = Kind::number;
    double number = 0.0;
    std::string text;  ///< string payload, or the raw token for numbers
    bool boolean = false;
    std::vector<ConfigValue> items;
    std::vector<std::pair<std::string, ConfigValue>> fields;
    std::size_t line = 0;

    const ConfigValue* find(std::string_view key) const;
};

using ConfigTable = std::vector<std::pair<std::string, ConfigValue>>;

/// Parses `key = value` lines; `#` starts a comment. Later keys override earlier ones.
/// Throws ConfigError with the line number and key on malformed input.
ConfigTable parse_config(std::string_view text);

struct FluxSpec {
    std::string kind = "burgers";
    std::optional<double> alpha;  ///< unset = nu^{3/2}
    std::vector<double> coeffs;   ///< polynomial: A(v) = sum c_k v^k
    std::optional<std::vector<double>> roots;
};

/// Every parameter of every subcommand, with defaults.
struct RunConfig {
    std::size_t n_cells = 32;
    double nu = 0.1;
    double dt = 1.0 / 1024.0;
    double t_final = 1.0;
    std::uint64_t seed = 0;
    FluxSpec flux;
    NoiseModel noise = NoiseModel::single_sine();
    std::optional<Sinusoid> u0;  ///< unset = zero initial state

    // simulate
    std::uint64_t stride = 1;

    // ergodic / weak-error
    std::size_t replicas = 200;
    std::optional<double> burn_in;
    double z = 1.96;
    double record_dt = 1.0;
    std::optional<std::vector<double>> regimes;  ///< alpha values; unset = {0, .01, 1, 100} nu^{3/2}
    std::vector<double> dt_grid;                 ///< default 2^-8 .. 2^-1
    double dt_ref = 1.0 / 1024.0;
    /// weak-error: drive dt and dt_ref with one Brownian path per replica when dt_ref divides dt
    bool couple_paths = true;

    // space-rate
    std::vector<std::size_t> n_grid{8, 16, 32, 64, 128};
    bool monte_carlo = false;
    std::size_t refine_ratio = 8;
    double refine_dt = 1.0 / 64.0;
    double refine_t = 1.0;
    std::size_t refine_replicas = 32;

    RunConfig();

    double alpha() const;
    std::vector<double> regime_alphas() const;
    FluxModel flux_model(double alpha) const;
    /// Throws ConfigError (field named) for out-of-range values.
    void validate() const;
    /// Effective configuration as `key = value` lines.
    std::string echo() const;
};

/// Applies a parsed table on top of `cfg`. Unknown keys are errors.
void apply_config(RunConfig& cfg, const ConfigTable& table);
/// Applies one `key=value` override (same value syntax as the file).
void apply_override(RunConfig& cfg, std::string_view assignment);

/// 17 significant digits (%.17g), enough to round-trip.
std::string format_double(double x);

}  // namespace sfv
