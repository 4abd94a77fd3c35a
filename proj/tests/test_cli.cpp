// Exercises the installed command-line surface through real subprocesses:
// exit codes, output files, and the shipped reproduction plan.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

std::string cli_bin() {
  const char* env = std::getenv("STQC_CLI_BIN");
  REQUIRE_MESSAGE(env != nullptr, "STQC_CLI_BIN must point at the stqc binary");
  return env;
}

fs::path work_dir() {
  const fs::path dir = fs::temp_directory_path() / "stqc_cli_tests";
  fs::create_directories(dir);
  return dir;
}

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(const std::string& args) {
  const fs::path out = work_dir() / "stdout.txt";
  const fs::path err = work_dir() / "stderr.txt";
  const std::string cmd =
      cli_bin() + " " + args + " > " + out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
  };
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

std::string configs_dir() { return std::string(STQC_SOURCE_DIR) + "/configs"; }

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

}  // namespace

TEST_CASE("usage errors exit with code 1") {
  CHECK(run_cli("no-such-command").exit_code == 1);
  CHECK(run_cli("simulate").exit_code == 1);  // missing --config
}

TEST_CASE("help exits cleanly") {
  CHECK(run_cli("--help").exit_code == 0);
}

TEST_CASE("bounds reports an infeasible sigma window with exit code 2") {
  // alpha ~ 3.25 while N = 3 makes [1/N, 1/alpha) empty
  const fs::path cfg = work_dir() / "infeasible.json";
  write_file(cfg, R"({
    "plant": {"discrete": {"A": [[1.5]], "B": [[1.0]]}, "C": [[1.0]], "Delta": 0.1},
    "gains": {"K": [[-1.2]], "L": [[1.3]]},
    "trigger": {"sigma": 0.25, "tau_max": 10, "N": 3, "E_in": 1.0},
    "run": {"variant": "standard", "x0": [0.5], "horizon": 50}
  })");
  const CliResult r = run_cli("bounds --config " + cfg.string());
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("feasible") != std::string::npos);
}

TEST_CASE("bounds prints the derived constants") {
  const CliResult r = run_cli("bounds --config " + configs_dir() +
                              "/batch_reactor_standard_n101.json");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("omega1") != std::string::npos);
  CHECK(r.out.find("dos_bound") != std::string::npos);
}

TEST_CASE("verify-gains prints the deadbeat residual") {
  const CliResult r = run_cli("verify-gains --config " + configs_dir() +
                              "/batch_reactor_deadbeat_n101.json");
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("deadbeat residual") != std::string::npos);
  CHECK(r.out.find("Schur: yes") != std::string::npos);
}

TEST_CASE("simulate writes trace, summary and resolved config") {
  const fs::path out = work_dir() / "sim_out";
  fs::remove_all(out);
  const CliResult r = run_cli("simulate --config " + configs_dir() +
                              "/batch_reactor_standard_n101.json --out " +
                              out.string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out / "trace.csv"));
  CHECK(fs::exists(out / "trace_summary.json"));
  CHECK(fs::exists(out / "trace_resolved_config.json"));

  // rerunning from the resolved echo reproduces the trace byte for byte
  const fs::path out2 = work_dir() / "sim_out2";
  fs::remove_all(out2);
  const CliResult r2 = run_cli("simulate --config " +
                               (out / "trace_resolved_config.json").string() +
                               " --out " + out2.string());
  CHECK(r2.exit_code == 0);
  std::ifstream a(out / "trace.csv"), b(out2 / "trace.csv");
  std::ostringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK_FALSE(sa.str().empty());
}

TEST_CASE("sweep writes the grid table") {
  const fs::path out = work_dir() / "sweep_out";
  fs::remove_all(out);
  const fs::path grid = work_dir() / "grid.json";
  write_file(grid, R"({"sigma": [0.02, 0.0343], "tau_max": [10, 20]})");
  const CliResult r = run_cli("sweep --config " + configs_dir() +
                              "/batch_reactor_standard_n101.json --grid " +
                              grid.string() + " --out " + out.string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out / "sweep.csv"));
  std::ifstream in(out / "sweep.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "sigma,N,tau_max,feasible,omega1,dos_bound,samples,omega_hat,note");
  long lines = 0;
  std::string line;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 4);
}

TEST_CASE("reproduce-paper --fig 3 writes the four trace sets") {
  const fs::path out = work_dir() / "repro";
  fs::remove_all(out);
  const CliResult r = run_cli("reproduce-paper --fig 3 --configs " + configs_dir() +
                              " --out " + out.string());
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out / "fig3" / "fig3_standard_n31.csv"));
  CHECK(fs::exists(out / "fig3" / "fig3_standard_n101.csv"));
  CHECK(fs::exists(out / "fig3" / "fig3_deadbeat_n11.csv"));
  CHECK(fs::exists(out / "fig3" / "fig3_deadbeat_n101.csv"));
  CHECK(fs::exists(out / "fig3" / "fig3.gp"));
}
