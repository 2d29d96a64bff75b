#pragma once

#include <json.hpp>
#include <optional>

#include "qifs/amplitude.hpp"
#include "qifs/entropy_pressure.hpp"
#include "qifs/process_measure.hpp"

namespace qifs {

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("config: " + what) {}
};

/// Declarative system description (schema 1). Exactly one of kraus_v,
/// stochastic_p or builder supplies the dynamics; matrices are row-major
/// arrays of [re, im] pairs.
struct SystemConfig {
    int schema = 1;
    long dimension = 0;
    std::optional<std::vector<Matrix>> kraus_v;
    std::optional<std::vector<Matrix>> kraus_w;
    std::optional<Matrix> rho0;
    std::optional<Eigen::MatrixXd> stochastic_p;
    Orientation orientation = Orientation::Column;
    std::string embedding = "diagonal";  // "diagonal" or "two-map"
    double q1 = 1.0, q2 = 1.0;           // two-map branch weights
    std::optional<double> depolarizing_p;
    std::optional<std::uint64_t> seed;
    double tol = kDefaultTol;
};

SystemConfig parse_system_config(const nlohmann::json& j);
SystemConfig load_system_config(const std::string& path);

/// Instantiates the QIFS described by the config.
QifsSystem build_system(const SystemConfig& config);

/// The pre-measurement state: config rho0, or I/N when absent.
DensityOperator initial_state(const SystemConfig& config, const QifsSystem& sys);

// Matrix literal helpers (shared wire format).
Matrix parse_complex_matrix(const nlohmann::json& j, long expected_dim = -1);
Eigen::MatrixXd parse_real_matrix(const nlohmann::json& j);
nlohmann::json complex_matrix_to_json(const Matrix& m);
nlohmann::json real_matrix_to_json(const Eigen::MatrixXd& m);

AtomicMeasure parse_atomic_measure(const nlohmann::json& j, double dedup_tol = 1e-8);
nlohmann::json atomic_measure_to_json(const AtomicMeasure& mu);

AmplitudeSpace parse_amplitude_space(const nlohmann::json& j);
ProjectiveInstrument parse_instrument(const nlohmann::json& j, double tol = kDefaultTol);

}  // namespace qifs
