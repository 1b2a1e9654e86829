#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "cho/trace_io.hpp"

namespace fs = std::filesystem;

namespace {

// Runs the CLI with stdout/stderr discarded and returns its exit status.
int cli(const std::string& args) {
  const std::string cmd = std::string(CHO_BENCH_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("cho_cli_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

const std::string small = "--preset multicell -o scenario.n_ues=5 -o scenario.duration_ms=60000 ";

}  // namespace

TEST_CASE("run writes every artifact and analyze reproduces the matrix") {
  TempDir d("run");
  REQUIRE(cli("run " + small + "--seed 3 -o channel.fading=rayleigh --format svg --out-dir " + d.path.string()) == 0);
  for (const char* f : {"trace.csv", "metrics.csv", "latencies.csv", "matrix.csv", "counts.csv", "stationary.csv",
                        "closed_form.csv", "stationary.svg"})
    CHECK(fs::exists(d.path / f));
  TempDir a("analyze");
  REQUIRE(cli("analyze " + (d / "trace.csv") + " --out-dir " + a.path.string()) == 0);
  CHECK(slurp(a.path / "matrix.csv") == slurp(d.path / "matrix.csv"));
  CHECK(slurp(a.path / "stationary.csv") == slurp(d.path / "stationary.csv"));

  TempDir m("matrix");
  REQUIRE(cli("analyze " + (d / "matrix.csv") + " --out-dir " + m.path.string()) == 0);
  CHECK(slurp(m.path / "matrix.csv") == slurp(d.path / "matrix.csv"));
  CHECK(slurp(m.path / "stationary.csv") == slurp(d.path / "stationary.csv"));
}

TEST_CASE("exit codes") {
  TempDir d("codes");
  CHECK(cli("presets") == 0);
  CHECK(cli("presets a3_linear") == 0);
  CHECK(cli("presets mars") == 2);
  CHECK(cli("frobnicate") == 2);
  CHECK(cli("run --preset multicell -o cho.o_prep_db=abc --out-dir " + d.path.string()) == 2);
  CHECK(cli("run --preset multicell -o nosuch.key=1 --out-dir " + d.path.string()) == 2);
  CHECK(cli("sweep --axis speed --values 1 --out-dir " + d.path.string()) == 2);
  // this seed sees no HOF, so the HOF row is unobserved and the chain is reducible
  CHECK(cli("run " + small + "--seed 5 -o channel.fading=rayleigh --out-dir " + d.path.string()) == 3);
  std::ofstream(d / "empty.csv").close();
  CHECK(cli("analyze " + (d / "empty.csv") + " --out-dir " + d.path.string()) == 3);
  CHECK(cli("analyze " + (d / "missing.csv") + " --out-dir " + d.path.string()) == 3);
  std::ofstream(d / "bad.csv") << "from,NORM,A1,WAIT,HOF\nNORM,0.5,0.1,0,0\nA1,1,0,0,0\nWAIT,1,0,0,0\nHOF,1,0,0,0\n";
  CHECK(cli("analyze " + (d / "bad.csv") + " --out-dir " + d.path.string()) == 3);
  std::ofstream(d / "periodic.csv") << "from,NORM,A1,WAIT,HOF\nNORM,0,1,0,0\nA1,0,0,1,0\nWAIT,1,0,0,0\nHOF,1,0,0,0\n";
  CHECK(cli("analyze " + (d / "periodic.csv") + " --out-dir " + d.path.string()) == 3);
}

TEST_CASE("an A3 trace at TTT 480 ms gives a 27-state matrix") {
  TempDir d("a3");
  REQUIRE(cli("run --preset a3_linear -o channel.fading=rayleigh -o scenario.n_ues=6 --seed 3 --out-dir " +
              d.path.string()) != 2);
  TempDir a("a3_analyze");
  cli("analyze " + (d / "trace.csv") + " --out-dir " + a.path.string());
  std::ifstream in(a.path / "matrix.csv");
  const cho::TransitionMatrix m = cho::read_matrix_csv(in);
  CHECK(m.space.size() == 27);
  CHECK(m.p.rows() == 27);
}

TEST_CASE("sweep and a3 subcommands") {
  TempDir d("sweep");
  REQUIRE(cli("sweep " + small + "--seed 3 --axis o_exec --values 4,6 --seeds 1 --out-dir " + d.path.string()) == 0);
  for (const char* f : {"sweep.csv", "latencies.csv", "p_hof.svg", "p_rlf.svg", "hi_rate.svg", "latency.svg",
                        "markov_pi_hof.svg", "packet_loss.svg"})
    CHECK(fs::exists(d.path / f));
  const std::string table = slurp(d.path / "sweep.csv");
  CHECK(std::count(table.begin(), table.end(), '\n') == 5);

  TempDir a("a3cmd");
  REQUIRE(cli("a3 --ttt 100,200 --seeds 2 --format svg --out-dir " + a.path.string()) == 0);
  CHECK(fs::exists(a.path / "a3.csv"));
  CHECK(fs::exists(a.path / "a3_hof.svg"));
  CHECK(cli("a3 --ttt 12.5 --out-dir " + a.path.string()) == 2);
}
