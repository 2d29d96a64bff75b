#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <string>

#ifndef QIFS_LAB_BINARY
#error "QIFS_LAB_BINARY must point at the CLI executable"
#endif

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout only
};

RunResult run_raw(const std::string& cmd) {
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult result;
    std::array<char, 4096> buf;
    std::size_t n;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) {
        result.output.append(buf.data(), n);
    }
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

RunResult run(const std::string& args) {
    return run_raw(std::string(QIFS_LAB_BINARY) + " " + args + " 2>/dev/null");
}

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "qifs_lab_cli_tests";
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(const std::string& name, const json& content) {
    const fs::path path = scratch_dir() / name;
    std::ofstream out(path);
    out << content.dump(2);
    return path;
}

fs::path depolarizing_config() {
    return write_file("depolarizing.json", {{"builder", "depolarizing"}, {"p", 0.3}});
}

fs::path two_map_config() {
    // Column-stochastic [[0.5, 0.25], [0.5, 0.75]] with rho0 = diag(1/3, 2/3).
    return write_file(
        "two_map.json",
        {{"stochastic_p",
          {{"entries", {0.5, 0.25, 0.5, 0.75}}, {"orientation", "column"},
           {"embedding", "two-map"}}},
         {"rho0", {1.0 / 3.0, 0.0, 0.0, 2.0 / 3.0}}});
}

}  // namespace

TEST_CASE("fixed-point iterate converges to I/2 for the depolarizing channel") {
    RunResult r = run("-c " + depolarizing_config().string() + " fixed-point");
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(r.output);
    CHECK(doc.at("converged").get<bool>());
    CHECK(doc.at("rho")[0][0].get<double>() == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(doc.at("rho")[3][0].get<double>() == doctest::Approx(0.5).epsilon(1e-8));
}

TEST_CASE("fixed-point spectral recovers the stationary vector of the embedding") {
    RunResult r = run("-c " + two_map_config().string() + " fixed-point --method spectral");
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(r.output);
    CHECK(doc.at("multiplicity").get<int>() == 1);
    CHECK(doc.at("rho")[0][0].get<double>() == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
    CHECK(doc.at("rho")[3][0].get<double>() == doctest::Approx(2.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("measure of the word 1,2 under the stationary embedding") {
    RunResult r = run("-c " + two_map_config().string() + " measure --word 1,2");
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(r.output);
    CHECK(doc.at("value").get<double>() == doctest::Approx(1.0 / 6.0).epsilon(1e-10));
}

TEST_CASE("strict Chapman-Kolmogorov failure exits 4") {
    const fs::path config = write_file(
        "ck_counterexample.json",
        {{"kraus_v", {json::array({1.0, 0.0, 0.0, 0.0}),
                      json::array({1.0, 0.0, 0.0, 2.0})}}});
    RunResult r = run("--strict -c " + config.string() + " check ck --m 1 --n 1");
    CHECK(r.exit_code == 4);
    const json doc = json::parse(r.output);
    CHECK_FALSE(doc.at("holds").get<bool>());
    // Without --strict the same failure still exits 0.
    RunResult lenient = run("-c " + config.string() + " check ck --m 1 --n 1");
    CHECK(lenient.exit_code == 0);
}

TEST_CASE("partition check sums cylinder measures to one") {
    RunResult r = run("-c " + two_map_config().string() + " check partition --depth 4");
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(r.output);
    CHECK(doc.at("holds").get<bool>());
    CHECK(doc.at("max_gap").get<double>() <= 1e-9);
}

TEST_CASE("sample runs are reproducible and the env seed wins") {
    const std::string base = "-c " + depolarizing_config().string() + " sample --steps 500";
    RunResult a = run(base + " --seed 42");
    RunResult b = run(base + " --seed 42");
    REQUIRE(a.exit_code == 0);
    CHECK(a.output == b.output);
    RunResult c = run(base + " --seed 43");
    CHECK(a.output != c.output);
    RunResult forced = run_raw("QIFS_LAB_SEED=42 " + std::string(QIFS_LAB_BINARY) +
                               " -c " + depolarizing_config().string() +
                               " sample --steps 500 --seed 43 2>/dev/null");
    CHECK(json::parse(forced.output).at("seed").get<std::uint64_t>() == 42);
}

TEST_CASE("entropy of the embedded chain from the default iterated measure") {
    const fs::path config = write_file(
        "diag_map.json",
        {{"stochastic_p",
          {{"entries", {0.5, 0.25, 0.5, 0.75}}, {"orientation", "column"}}}});
    RunResult r = run("-c " + config.string() + " entropy");
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(r.output);
    CHECK(doc.at("converged").get<bool>());
    CHECK(doc.at("value").get<double>() == doctest::Approx(1.329661).epsilon(1e-5));
}

TEST_CASE("entropy-shift agrees with the Shannon entropy of the chain") {
    const fs::path matrix = write_file("chain.json", {0.5, 0.25, 0.5, 0.75});
    RunResult r = run("entropy-shift --matrix " + matrix.string() + " --orientation column");
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(r.output);
    CHECK(doc.at("value").get<double>() == doctest::Approx(0.605939).epsilon(1e-5));
    CHECK(doc.at("value").get<double>() ==
          doctest::Approx(doc.at("shannon").get<double>()).epsilon(1e-7));
    CHECK(doc.at("stationary")[0].get<double>() == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("amplitude interference through the CLI") {
    const double r2 = 1.0 / std::sqrt(2.0);
    const fs::path space = write_file(
        "space.json", {{"points", {{"a", r2}, {"b", -r2}}}});
    RunResult single = run("amplitude --space " + space.string() + " --set a");
    REQUIRE(single.exit_code == 0);
    CHECK(json::parse(single.output).at("probability").get<double>() ==
          doctest::Approx(0.5));
    RunResult both = run("amplitude --space " + space.string() + " --set a,b");
    CHECK(json::parse(both.output).at("probability").get<double>() ==
          doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("pressure search reports the Gibbs optimum") {
    RunResult r = run("-c " + depolarizing_config().string() +
                      " pressure --hamiltonian " +
                      write_file("hamiltonian.json", {0.2, 0.0, 0.0, 1.1}).string() +
                      " --grid 99");
    REQUIRE(r.exit_code == 0);
    const json doc = json::parse(r.output);
    const double z = std::exp(-0.2) + std::exp(-1.1);
    CHECK(doc.at("best_value").get<double>() ==
          doctest::Approx(std::log(2.0) + std::log(z)).epsilon(1e-3));
}

TEST_CASE("instrument-fdd joint probability") {
    const fs::path projections = write_file(
        "projections.json",
        {{"projections", {json::array({1.0, 0.0, 0.0, 0.0}),
                          json::array({0.0, 0.0, 0.0, 1.0})}}});
    const fs::path config = write_file(
        "instrument_state.json",
        {{"builder", "depolarizing"}, {"p", 0.0}, {"rho0", {0.3, 0.0, 0.0, 0.7}}});
    RunResult r = run("-c " + config.string() + " instrument-fdd --projections " +
                      projections.string() + " --sets \"1;1\"");
    REQUIRE(r.exit_code == 0);
    CHECK(json::parse(r.output).at("probability").get<double>() == doctest::Approx(0.3));
}

TEST_CASE("invalid configs exit 2") {
    const fs::path config = write_file(
        "bad.json", {{"builder", "depolarizing"}, {"p", 0.3},
                     {"stochastic_p",
                      {{"entries", {1.0, 0.0, 0.0, 1.0}}, {"orientation", "column"}}}});
    CHECK(run("-c " + config.string() + " fixed-point").exit_code == 2);
    CHECK(run("-c /nonexistent.json fixed-point").exit_code == 2);
}

TEST_CASE("csv mode renders key,value rows") {
    RunResult r = run("-c " + two_map_config().string() + " measure --word 1,2 --csv");
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("value,") != std::string::npos);
}
