// Batch front-end: loads a declarative system config, dispatches the solvers
// and checkers, and prints one structured JSON document (or CSV rows) on
// standard output.
//
// Exit codes: 0 success, 2 validation error, 3 non-convergence,
// 4 property-check failure under --strict.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "qifs/config.hpp"

using nlohmann::json;
using namespace qifs;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNotConverged = 3;
constexpr int kExitCheckFailed = 4;

std::vector<int> parse_word(const std::string& text) {
    std::vector<int> word;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        word.push_back(std::stoi(token));
    }
    return word;
}

std::vector<std::vector<int>> parse_index_sets(const std::string& text) {
    std::vector<std::vector<int>> sets;
    std::stringstream ss(text);
    std::string group;
    while (std::getline(ss, group, ';')) {
        sets.push_back(parse_word(group));
    }
    return sets;
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open '" + path + "'");
    }
    json j;
    in >> j;
    return j;
}

void emit(const json& doc, bool csv) {
    if (!csv) {
        std::cout << doc.dump(2) << "\n";
        return;
    }
    // CSV rendering for tabular payloads; scalar documents fall back to
    // key,value rows.
    if (doc.contains("rows") && doc.at("rows").is_array()) {
        for (const json& row : doc.at("rows")) {
            bool first = true;
            for (const json& cell : row) {
                if (!first) std::cout << ",";
                first = false;
                std::cout << (cell.is_string() ? cell.get<std::string>() : cell.dump());
            }
            std::cout << "\n";
        }
        return;
    }
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        std::cout << it.key() << "," << it.value().dump() << "\n";
    }
}

json word_to_json(const CylinderWord& w) {
    json out = json::array();
    for (int s : w) out.push_back(s);
    return out;
}

std::uint64_t effective_seed(const SystemConfig& config, std::uint64_t flag_seed,
                             bool flag_given) {
    if (const char* env = std::getenv("QIFS_LAB_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    if (flag_given) {
        return flag_seed;
    }
    return config.seed.value_or(0);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qifs-lab: quantum iterated function system laboratory"};
    app.require_subcommand(1);

    std::string config_path;
    bool csv = false;
    bool strict = false;
    app.add_option("-c,--config", config_path, "system config file (JSON)");
    app.add_flag("--csv", csv, "emit tabular payloads as CSV");
    app.add_flag("--strict", strict, "exit 4 when a property check fails");

    // fixed-point
    auto* fixed = app.add_subcommand("fixed-point", "invariant state of the channel");
    std::string method = "iterate";
    fixed->add_option("--method", method, "iterate|spectral")
        ->check(CLI::IsMember({"iterate", "spectral"}));

    // measure
    auto* meas = app.add_subcommand("measure", "cylinder-set measure of a word");
    std::string word_text;
    bool nonhomogeneous = false;
    meas->add_option("--word", word_text, "comma-separated symbols, e.g. 1,2,1")
        ->required();
    meas->add_flag("--nonhomogeneous", nonhomogeneous, "use the W_i/V_i product measure");

    // check
    auto* check = app.add_subcommand("check", "process property checks");
    std::string check_kind;
    int depth = 3, m_param = 2, n_param = 1;
    check->add_option("kind", check_kind, "markov|ck|stationarity|partition")
        ->required()
        ->check(CLI::IsMember({"markov", "ck", "stationarity", "partition"}));
    check->add_option("--depth", depth, "word depth");
    check->add_option("--m", m_param, "first step count / shift offset");
    check->add_option("--n", n_param, "second step count / word length");
    check->add_flag("--nonhomogeneous", nonhomogeneous);

    // entropy
    auto* entropy = app.add_subcommand("entropy", "variational entropy h0");
    std::string measure_path;
    entropy->add_option("--measure", measure_path, "atomic measure file (JSON)");

    // entropy-shift
    auto* eshift = app.add_subcommand("entropy-shift", "classical shift entropy");
    std::string matrix_path, orientation_text = "row";
    eshift->add_option("--matrix", matrix_path, "stochastic matrix file (JSON)")
        ->required();
    eshift->add_option("--orientation", orientation_text, "row|column")
        ->check(CLI::IsMember({"row", "column"}));

    // sample
    auto* sample = app.add_subcommand("sample", "chaos-game trajectory");
    int steps = 1000, burn_in = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
    sample->add_option("--steps", steps, "trajectory length");
    sample->add_option("--burn-in", burn_in, "states dropped from the barycenter");
    auto* seed_opt = sample->add_option("--seed", seed, "RNG seed");
    sample->add_flag("--trajectory", csv, "stream trajectory rows (implies --csv)");

    // pressure
    auto* pressure = app.add_subcommand("pressure", "pressure functional / Gibbs search");
    std::string hamiltonian_path;
    double temperature = 1.0;
    int grid = 0;
    pressure->add_option("--hamiltonian", hamiltonian_path, "Hermitian H file (JSON)")
        ->required();
    pressure->add_option("--temperature", temperature, "T > 0");
    pressure->add_option("--grid", grid, "grid points for the Gibbs search");
    pressure->add_option("--measure", measure_path, "atomic measure file (JSON)");

    // amplitude
    auto* amplitude = app.add_subcommand("amplitude", "amplitude of a sample-point set");
    std::string space_path, set_text, given_text;
    amplitude->add_option("--space", space_path, "amplitude space file (JSON)")
        ->required();
    amplitude->add_option("--set", set_text, "comma-separated point labels")->required();
    amplitude->add_option("--given", given_text, "conditioning set of point labels");

    // instrument-fdd
    auto* fdd = app.add_subcommand("instrument-fdd", "projective finite-dim distribution");
    std::string projections_path, sets_text;
    fdd->add_option("--projections", projections_path, "projections file (JSON)")
        ->required();
    fdd->add_option("--sets", sets_text, "semicolon-separated index groups, e.g. \"1;2\"")
        ->required();

    // Let the global -c/--csv/--strict flags appear after the subcommand too.
    for (CLI::App* sub : app.get_subcommands([](CLI::App*) { return true; })) {
        sub->fallthrough();
    }

    CLI11_PARSE(app, argc, argv);
    seed_given = seed_opt->count() > 0;

    try {
        json out;

        if (*amplitude) {
            AmplitudeSpace space = parse_amplitude_space(load_json_file(space_path));
            std::set<std::string> subset;
            {
                std::stringstream ss(set_text);
                std::string token;
                while (std::getline(ss, token, ',')) subset.insert(token);
            }
            Complex a;
            if (given_text.empty()) {
                a = set_amplitude(space, subset);
            } else {
                std::set<std::string> given;
                std::stringstream ss(given_text);
                std::string token;
                while (std::getline(ss, token, ',')) given.insert(token);
                a = conditional_amplitude(space, subset, given);
            }
            out = {{"command", "amplitude"},
                   {"amplitude", {a.real(), a.imag()}},
                   {"probability", amplitude_to_prob(a)}};
            emit(out, csv);
            return 0;
        }

        if (*eshift) {
            const Orientation orient =
                orientation_text == "row" ? Orientation::Row : Orientation::Column;
            ShiftEntropyProblem prob =
                make_shift_problem(parse_real_matrix(load_json_file(matrix_path)), orient);
            ShiftEntropyResult result = shift_entropy(prob);
            json pi = json::array();
            for (long i = 0; i < prob.pi.size(); ++i) pi.push_back(prob.pi(i));
            out = {{"command", "entropy-shift"},
                   {"value", result.h},
                   {"shannon", shannon_entropy(prob.p, prob.pi, prob.orientation)},
                   {"stationary", pi},
                   {"minimizer", real_matrix_to_json(result.minimizer)},
                   {"iterations", result.iterations},
                   {"converged", result.converged}};
            emit(out, csv);
            return result.converged ? 0 : kExitNotConverged;
        }

        // Remaining subcommands need the system config.
        if (config_path.empty()) {
            throw ConfigError("--config is required for this subcommand");
        }
        SystemConfig config = load_system_config(config_path);
        QifsSystem sys = build_system(config);

        if (*fixed) {
            if (method == "spectral") {
                if (!sys.homogeneous) {
                    throw Error("spectral method needs a homogeneous system");
                }
                SpectralResult result = fixed_point_spectral(sys.dynamics);
                out = {{"command", "fixed-point"},
                       {"method", "spectral"},
                       {"rho", complex_matrix_to_json(result.rho.matrix())},
                       {"multiplicity", result.multiplicity},
                       {"eigenvalue_gap", result.eigenvalue_gap}};
                emit(out, csv);
                return 0;
            }
            FixedPointResult result =
                fixed_point_iterate(sys, initial_state(config, sys), 1e-12, 10000);
            out = {{"command", "fixed-point"},
                   {"method", "iterate"},
                   {"rho", complex_matrix_to_json(result.rho.matrix())},
                   {"iterations", result.iterations},
                   {"residual", result.residual},
                   {"converged", result.converged}};
            emit(out, csv);
            return result.converged ? 0 : kExitNotConverged;
        }

        if (*meas) {
            ProcessSpec spec = make_process(
                sys, initial_state(config, sys),
                nonhomogeneous ? ProcessKind::Nonhomogeneous : ProcessKind::Homogeneous,
                strict);
            const CylinderWord word = parse_word(word_text);
            out = {{"command", "measure"},
                   {"word", word_to_json(word)},
                   {"value", measure(spec, word)}};
            emit(out, csv);
            return 0;
        }

        if (*check) {
            ProcessSpec spec = make_process(
                sys, initial_state(config, sys),
                nonhomogeneous ? ProcessKind::Nonhomogeneous : ProcessKind::Homogeneous,
                strict);
            bool holds = true;
            if (check_kind == "markov") {
                CheckReport report = check_markov(spec, depth);
                holds = report.holds;
                out = {{"command", "check"},
                       {"check", report.check},
                       {"holds", report.holds},
                       {"max_gap", report.max_gap},
                       {"witness", word_to_json(report.witness)},
                       {"parameters", {{"depth", depth}}},
                       {"skipped_conditions", report.skipped_conditions}};
            } else if (check_kind == "stationarity") {
                CheckReport report = check_stationarity(spec, m_param, n_param);
                holds = report.holds;
                out = {{"command", "check"},
                       {"check", report.check},
                       {"holds", report.holds},
                       {"max_gap", report.max_gap},
                       {"witness", word_to_json(report.witness)},
                       {"parameters", {{"m", m_param}, {"n", n_param}}}};
            } else if (check_kind == "ck") {
                ChapmanKolmogorovReport report =
                    check_chapman_kolmogorov(spec, m_param, n_param);
                holds = report.holds;
                out = {{"command", "check"},
                       {"check", "chapman-kolmogorov"},
                       {"holds", report.holds},
                       {"max_gap", report.max_gap},
                       {"lhs", real_matrix_to_json(report.lhs)},
                       {"rhs", real_matrix_to_json(report.rhs)},
                       {"parameters", {{"m", m_param}, {"n", n_param}}}};
            } else {  // partition
                const std::size_t k = spec.system.branch_count();
                double worst = 0.0;
                json rows = json::array();
                for (int n = 1; n <= depth; ++n) {
                    double total = 0.0;
                    for (const CylinderWord& w : enumerate_words(k, n)) {
                        total += measure(spec, w);
                    }
                    const double gap = std::abs(total - 1.0);
                    worst = std::max(worst, gap);
                    rows.push_back({n, total, gap});
                }
                holds = worst <= 1e-9 * std::pow(static_cast<double>(k), depth);
                out = {{"command", "check"},
                       {"check", "partition"},
                       {"holds", holds},
                       {"max_gap", worst},
                       {"rows", rows},
                       {"parameters", {{"depth", depth}}}};
            }
            emit(out, csv);
            return (strict && !holds) ? kExitCheckFailed : 0;
        }

        if (*entropy) {
            AtomicMeasure mu = [&]() {
                if (!measure_path.empty()) {
                    return parse_atomic_measure(load_json_file(measure_path));
                }
                // Default: converge an invariant measure by iterated pushforward
                // from the maximally mixed point mass.
                AtomicMeasure current =
                    make_atomic_measure({{1.0, initial_state(config, sys)}});
                for (int it = 0; it < 200; ++it) {
                    AtomicMeasure next = pushforward(sys, current);
                    if (check_invariance(sys, next, 1e-12).invariant) {
                        return next;
                    }
                    current = std::move(next);
                }
                return current;
            }();
            EntropyProblem prob = make_entropy_problem(sys, std::move(mu));
            EntropyResult result = entropy_atomic(prob);
            json minimizer = json::array();
            for (double c : result.minimizer) minimizer.push_back(c);
            out = {{"command", "entropy"},
                   {"value", result.h0},
                   {"minimizer", minimizer},
                   {"iterations", result.iterations},
                   {"gradient_norm", result.gradient_norm},
                   {"converged", result.converged},
                   {"measure", atomic_measure_to_json(prob.measure)}};
            emit(out, csv);
            return result.converged ? 0 : kExitNotConverged;
        }

        if (*sample) {
            const std::uint64_t s = effective_seed(config, seed, seed_given);
            Trajectory traj = chaos_game(sys, initial_state(config, sys), steps, s);
            DensityOperator mean = empirical_barycenter(traj, burn_in);
            json rows = json::array();
            if (csv) {
                for (std::size_t t = 0; t < traj.symbols.size(); ++t) {
                    json row = {static_cast<int>(t), traj.symbols[t]};
                    const Matrix& st = traj.states[t + 1].matrix();
                    for (long i = 0; i < st.rows(); ++i) {
                        for (long k = 0; k < st.cols(); ++k) {
                            row.push_back(st(i, k).real());
                            row.push_back(st(i, k).imag());
                        }
                    }
                    rows.push_back(row);
                }
            }
            out = {{"command", "sample"},
                   {"seed", s},
                   {"generator", traj.generator},
                   {"steps", steps},
                   {"burn_in", burn_in},
                   {"empirical_barycenter", complex_matrix_to_json(mean.matrix())}};
            if (csv) {
                out["rows"] = rows;
            }
            emit(out, csv);
            return 0;
        }

        if (*pressure) {
            PressureProblem prob;
            prob.hamiltonian = parse_complex_matrix(load_json_file(hamiltonian_path));
            prob.temperature = temperature;
            if (grid > 0) {
                PressureSearchResult result = pressure_search(prob, grid);
                json rows = json::array();
                for (const auto& [pi1, value] : result.grid) {
                    rows.push_back({pi1, value});
                }
                out = {{"command", "pressure"},
                       {"mode", "search"},
                       {"best_pi", {result.best_pi(0), result.best_pi(1)}},
                       {"best_value", result.best_value},
                       {"rows", rows}};
                emit(out, csv);
                return 0;
            }
            if (measure_path.empty()) {
                throw ConfigError("pressure needs --measure or --grid");
            }
            EntropyProblem eprob = make_entropy_problem(
                sys, parse_atomic_measure(load_json_file(measure_path)));
            out = {{"command", "pressure"},
                   {"mode", "value"},
                   {"value", pressure_value(prob, eprob)},
                   {"temperature", temperature}};
            emit(out, csv);
            return 0;
        }

        if (*fdd) {
            ProjectiveInstrument instr =
                parse_instrument(load_json_file(projections_path), config.tol);
            const double p =
                instrument_fdd(instr, initial_state(config, sys), parse_index_sets(sets_text));
            out = {{"command", "instrument-fdd"}, {"probability", p}};
            emit(out, csv);
            return 0;
        }

        throw ConfigError("no subcommand handled");
    } catch (const NotConvergedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNotConverged;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
}
