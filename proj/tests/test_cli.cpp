#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "samedge/cli.hpp"
#include "samedge/log_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

using namespace samedge;

namespace {

std::filesystem::path temp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "samedge_cli_test";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string write_file(const std::string& name, const std::string& text) {
    const auto path = temp_dir() / name;
    std::ofstream out(path, std::ios::binary);
    out << text;
    return path.string();
}

int cli(std::initializer_list<const char*> args) {
    std::vector<const char*> argv = {"samedge"};
    argv.insert(argv.end(), args);
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string quadratic_config(const std::string& log_path) {
    return "seed = 4\n"
           "[objective]\n"
           "kind = quadratic\n"
           "dim = 5\n"
           "lambda_min = 0.1\n"
           "lambda_max = 0.5\n"
           "[optim]\n"
           "eta = 0.05\n"
           "rho = 0.1\n"
           "max_steps = 30\n"
           "[spectral]\n"
           "k = 2\n"
           "period = 10\n"
           "[log]\n"
           "path = " +
           log_path + "\n";
}

// Runs the installed binary so exit codes and stdout are exercised over a
// real process boundary.
std::pair<int, std::string> run_binary(const std::string& args) {
    const std::string command = std::string(SAMEDGE_BIN) + " " + args + " 2>&1";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string output;
    char buf[256];
    while (fgets(buf, sizeof buf, pipe)) output += buf;
    const int status = pclose(pipe);
    return {WEXITSTATUS(status), output};
}

}  // namespace

TEST_CASE("run: valid quadratic config exits 0 and writes the log") {
    const auto log_path = (temp_dir() / "run_ok.csv").string();
    const auto config = write_file("ok.ini", quadratic_config(log_path));
    CHECK(cli({"run", config.c_str()}) == kExitOk);
    CHECK(std::filesystem::exists(log_path));
    const ParsedLog log = read_log(log_path);
    CHECK(log.records.size() == 4);  // steps 0, 10, 20, 30
    CHECK(log.k == 2);
}

TEST_CASE("run: flag overrides beat file values") {
    const auto log_path = (temp_dir() / "run_override.csv").string();
    const auto override_path = (temp_dir() / "run_override2.csv").string();
    const auto config = write_file("override.ini", quadratic_config(log_path));
    CHECK(cli({"run", config.c_str(), "--optim.max_steps", "10", "--log.path",
               override_path.c_str()}) == kExitOk);
    CHECK(std::filesystem::exists(override_path));
    CHECK(read_log(override_path).records.back().step == 10);
}

TEST_CASE("run: missing eta, bad values and missing files map to exit codes") {
    const auto no_eta = write_file("no_eta.ini", "[optim]\nrho = 0.1\n");
    CHECK(cli({"run", no_eta.c_str()}) == kExitUsage);

    const auto log_path = (temp_dir() / "never.csv").string();
    const auto config = write_file("bad_rho.ini", quadratic_config(log_path));
    CHECK(cli({"run", config.c_str(), "--optim.rho", "-1"}) == kExitUsage);

    CHECK(cli({"run", "/nonexistent/config.ini"}) == kExitIo);

    // unreadable dataset files surface as I/O errors
    const auto idx_config = write_file(
        "bad_idx.ini",
        "[objective]\nkind = mlp\n[optim]\neta = 0.1\n[data]\nsource = idx_files\n"
        "images = /nonexistent/images\nlabels = /nonexistent/labels\n[log]\npath = " +
            (temp_dir() / "idx.csv").string() + "\n");
    CHECK(cli({"run", idx_config.c_str()}) == kExitIo);
}

TEST_CASE("unknown flags are errors") {
    const auto log_path = (temp_dir() / "unknown_flag.csv").string();
    const auto config = write_file("flags.ini", quadratic_config(log_path));
    CHECK(cli({"run", config.c_str(), "--optim.momentum", "0.9"}) == kExitUsage);
    CHECK(cli({"frobnicate"}) == kExitUsage);
    CHECK(cli({}) == kExitUsage);
}

TEST_CASE("grid: sweeps write logs and a manifest; empty lists fail parsing") {
    const auto out_dir = (temp_dir() / "grid_out").string();
    const auto config =
        write_file("grid.ini", quadratic_config((temp_dir() / "unused.csv").string()) +
                                   "\n[optim]\nmax_steps = 10\n");
    CHECK(cli({"grid", config.c_str(), "--eta", "0.03,0.1", "--rho", "0,0.1", "--out",
               out_dir.c_str()}) == kExitOk);
    CHECK(std::filesystem::exists(std::filesystem::path(out_dir) / "manifest.csv"));
    CHECK(std::filesystem::exists(std::filesystem::path(out_dir) / "eta0.03_rho0.csv"));
    CHECK(std::filesystem::exists(std::filesystem::path(out_dir) / "eta0.1_rho0.1.csv"));

    CHECK(cli({"grid", config.c_str(), "--rho", "0.1", "--out", out_dir.c_str()}) ==
          kExitUsage);  // missing --eta
}

TEST_CASE("verify subcommand: output lines and exit codes over a process boundary") {
    const auto [code, output] = run_binary("verify --trials 200 --seed 3");
    CHECK(code == kExitOk);
    CHECK(output.find("prop1_sign PASS") != std::string::npos);
    CHECK(output.find("prop3_sign PASS") != std::string::npos);
    CHECK(output.find("eq3_closed_form PASS") != std::string::npos);
    CHECK(output.find("edge_bisection PASS") != std::string::npos);

    const auto [bad_code, bad_output] = run_binary("verify --trials 0");
    CHECK(bad_code == kExitUsage);
}

TEST_CASE("help lists every subcommand flag") {
    const auto [code, output] = run_binary("run --help");
    CHECK(code == kExitOk);
    CHECK(output.find("--optim.eta") != std::string::npos);
    CHECK(output.find("--data.images") != std::string::npos);
    CHECK(output.find("--log.path") != std::string::npos);

    const auto [plot_code, plot_output] = run_binary("plot --help");
    CHECK(plot_code == kExitOk);
    CHECK(plot_output.find("--series") != std::string::npos);
    CHECK(plot_output.find("--yscale") != std::string::npos);
}

TEST_CASE("plot: end-to-end from a real run log") {
    const auto log_path = (temp_dir() / "plot_input.csv").string();
    const auto config = write_file("plot.ini", quadratic_config(log_path));
    REQUIRE(cli({"run", config.c_str()}) == kExitOk);

    const auto svg_path = (temp_dir() / "plot c.svg").string();
    CHECK(cli({"plot", log_path.c_str(), "--series", "lambda1,sam_edge,gd_edge", "--yscale",
               "log", "--out", svg_path.c_str()}) == kExitOk);
    std::ifstream in(svg_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str().find("<svg") != std::string::npos);
    CHECK(buf.str().find("sam_edge") != std::string::npos);

    CHECK(cli({"plot", log_path.c_str(), "--series", "nope", "--out", svg_path.c_str()}) ==
          kExitUsage);
    CHECK(cli({"plot", "/nonexistent.csv", "--series", "loss", "--out", svg_path.c_str()}) ==
          kExitIo);
    CHECK(cli({"plot", log_path.c_str(), "--series", "loss", "--yscale", "cubic", "--out",
               svg_path.c_str()}) == kExitUsage);
}

TEST_CASE("SAMEDGE_LOG_DIR provides the default log directory") {
    const auto dir = (temp_dir() / "env_default").string();
    std::filesystem::create_directories(dir);
    const auto config = write_file("env.ini",
                                   "seed = 1\n[objective]\nkind = quadratic\ndim = 3\n"
                                   "lambda_min = 0.1\nlambda_max = 0.2\n"
                                   "[optim]\neta = 0.05\nmax_steps = 10\n"
                                   "[spectral]\nk = 1\nperiod = 5\n");
    setenv("SAMEDGE_LOG_DIR", dir.c_str(), 1);
    CHECK(default_log_dir() == dir);
    CHECK(cli({"run", config.c_str()}) == kExitOk);
    CHECK(std::filesystem::exists(std::filesystem::path(dir) / "run.csv"));
    unsetenv("SAMEDGE_LOG_DIR");
    CHECK(default_log_dir() == ".");
}
