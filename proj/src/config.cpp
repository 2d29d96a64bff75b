#include "qifs/config.hpp"

#include <cmath>
#include <fstream>

namespace qifs {

using nlohmann::json;

Matrix parse_complex_matrix(const json& j, long expected_dim) {
    if (!j.is_array()) {
        throw ConfigError("matrix must be an array of [re, im] pairs");
    }
    const std::size_t total = j.size();
    const long n = expected_dim > 0 ? expected_dim
                                    : static_cast<long>(std::llround(std::sqrt(
                                          static_cast<double>(total))));
    if (static_cast<std::size_t>(n) * static_cast<std::size_t>(n) != total) {
        throw ConfigError("matrix entry count " + std::to_string(total) +
                          " is not a square");
    }
    Matrix m(n, n);
    for (long i = 0; i < n; ++i) {
        for (long k = 0; k < n; ++k) {
            const json& entry = j.at(static_cast<std::size_t>(i * n + k));
            if (entry.is_number()) {
                m(i, k) = Complex(entry.get<double>(), 0.0);
            } else if (entry.is_array() && entry.size() == 2) {
                m(i, k) = Complex(entry.at(0).get<double>(), entry.at(1).get<double>());
            } else {
                throw ConfigError("matrix entries must be numbers or [re, im] pairs");
            }
        }
    }
    return m;
}

Eigen::MatrixXd parse_real_matrix(const json& j) {
    const Matrix m = parse_complex_matrix(j);
    if (m.imag().cwiseAbs().maxCoeff() > 0.0) {
        throw ConfigError("expected a real matrix");
    }
    return m.real();
}

json complex_matrix_to_json(const Matrix& m) {
    json out = json::array();
    for (long i = 0; i < m.rows(); ++i) {
        for (long k = 0; k < m.cols(); ++k) {
            out.push_back({m(i, k).real(), m(i, k).imag()});
        }
    }
    return out;
}

json real_matrix_to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (long i = 0; i < m.rows(); ++i) {
        for (long k = 0; k < m.cols(); ++k) {
            out.push_back(m(i, k));
        }
    }
    return out;
}

SystemConfig parse_system_config(const json& j) {
    SystemConfig config;
    config.schema = j.value("schema", 1);
    if (config.schema != 1) {
        throw ConfigError("unsupported schema version " + std::to_string(config.schema));
    }
    config.tol = j.value("tol", kDefaultTol);
    if (j.contains("seed")) {
        config.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("dimension")) {
        config.dimension = j.at("dimension").get<long>();
    }

    int sources = 0;
    if (j.contains("kraus_v")) {
        ++sources;
        std::vector<Matrix> ops;
        for (const json& mat : j.at("kraus_v")) {
            ops.push_back(parse_complex_matrix(mat, config.dimension));
        }
        config.kraus_v = std::move(ops);
        if (j.contains("kraus_w")) {
            std::vector<Matrix> w;
            for (const json& mat : j.at("kraus_w")) {
                w.push_back(parse_complex_matrix(mat, config.dimension));
            }
            config.kraus_w = std::move(w);
        }
    }
    if (j.contains("stochastic_p")) {
        ++sources;
        const json& sp = j.at("stochastic_p");
        config.stochastic_p = parse_real_matrix(sp.at("entries"));
        const std::string orient = sp.value("orientation", "");
        if (orient == "column") {
            config.orientation = Orientation::Column;
        } else if (orient == "row") {
            config.orientation = Orientation::Row;
        } else {
            throw ConfigError("stochastic_p.orientation must be 'row' or 'column'");
        }
        config.embedding = sp.value("embedding", "diagonal");
        if (config.embedding != "diagonal" && config.embedding != "two-map") {
            throw ConfigError("embedding must be 'diagonal' or 'two-map'");
        }
        if (sp.contains("q")) {
            config.q1 = sp.at("q").at(0).get<double>();
            config.q2 = sp.at("q").at(1).get<double>();
        }
    }
    if (j.contains("builder")) {
        ++sources;
        const std::string name = j.at("builder").get<std::string>();
        if (name != "depolarizing") {
            throw ConfigError("unknown builder '" + name + "'");
        }
        config.depolarizing_p = j.value("p", 0.0);
    }
    if (sources != 1) {
        throw ConfigError(
            "exactly one of kraus_v, stochastic_p or builder must supply the dynamics");
    }
    if (j.contains("rho0")) {
        config.rho0 = parse_complex_matrix(j.at("rho0"), config.dimension);
    }
    return config;
}

SystemConfig load_system_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open '" + path + "'");
    }
    json j;
    in >> j;
    return parse_system_config(j);
}

QifsSystem build_system(const SystemConfig& config) {
    if (config.kraus_v) {
        KrausFamily dyn = make_kraus_family(*config.kraus_v, config.tol);
        if (config.kraus_w) {
            return make_system(std::move(dyn),
                               make_kraus_family(*config.kraus_w, config.tol), config.tol);
        }
        return make_homogeneous_system(std::move(dyn), config.tol);
    }
    if (config.stochastic_p) {
        Eigen::MatrixXd p = *config.stochastic_p;
        if (config.orientation == Orientation::Row) {
            p.transposeInPlace();  // builders use the column convention
        }
        if (config.embedding == "two-map") {
            if (p.rows() != 2) {
                throw ConfigError("two-map embedding needs a 2x2 matrix");
            }
            return build_classical_2map(p, config.q1, config.q2, config.tol);
        }
        return build_classical_diagmap(p, config.tol);
    }
    if (config.depolarizing_p) {
        return build_depolarizing(*config.depolarizing_p, config.tol);
    }
    throw ConfigError("no dynamics source");
}

DensityOperator initial_state(const SystemConfig& config, const QifsSystem& sys) {
    if (config.rho0) {
        return validate_density(*config.rho0, std::max(config.tol, 1e-9));
    }
    const long n = sys.dim();
    return validate_density(Matrix::Identity(n, n) / static_cast<double>(n));
}

AtomicMeasure parse_atomic_measure(const json& j, double dedup_tol) {
    std::vector<AtomicMeasure::Atom> atoms;
    const json& list = j.is_array() ? j : j.at("atoms");
    for (const json& atom : list) {
        const double weight = atom.at("weight").get<double>();
        Matrix m = parse_complex_matrix(atom.at("matrix"));
        atoms.push_back({weight, validate_density(m, 1e-9)});
    }
    return make_atomic_measure(std::move(atoms), dedup_tol);
}

json atomic_measure_to_json(const AtomicMeasure& mu) {
    json atoms = json::array();
    for (const auto& atom : mu.atoms) {
        atoms.push_back({{"weight", atom.weight},
                         {"matrix", complex_matrix_to_json(atom.state.matrix())}});
    }
    return {{"atoms", atoms}};
}

AmplitudeSpace parse_amplitude_space(const json& j) {
    AmplitudeSpace space;
    space.tol = j.value("tol", 1e-12);
    const json& points = j.at("points");
    for (auto it = points.begin(); it != points.end(); ++it) {
        const json& amp = it.value();
        if (amp.is_number()) {
            space.amplitudes[it.key()] = Complex(amp.get<double>(), 0.0);
        } else {
            space.amplitudes[it.key()] =
                Complex(amp.at(0).get<double>(), amp.at(1).get<double>());
        }
    }
    if (space.amplitudes.empty()) {
        throw ConfigError("amplitude space has no points");
    }
    return space;
}

ProjectiveInstrument parse_instrument(const json& j, double tol) {
    std::vector<Matrix> projections;
    for (const json& mat : j.at("projections")) {
        projections.push_back(parse_complex_matrix(mat));
    }
    return make_instrument(std::move(projections), tol);
}

}  // namespace qifs
