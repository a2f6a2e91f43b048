#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "depnet/rng.hpp"
#include "depnet/serialize.hpp"

using namespace depnet;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string stderr_text;
};

CliResult run_cli(const std::string& args, const fs::path& dir) {
  const auto err_file = dir / "stderr.txt";
  const std::string cmd =
      std::string(DEPNET_CLI_PATH) + " " + args + " >/dev/null 2>" + err_file.string();
  const int status = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(err_file);
  std::ostringstream ss;
  ss << in.rdbuf();
  result.stderr_text = ss.str();
  return result;
}

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("depnet_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_chain_fixture(const fs::path& dir) {
  // a depends on b, b depends on c
  write_text_file((dir / "nodes.csv").string(), "repo,Size\na,1\nb,2\nc,3\n");
  write_text_file((dir / "edges.csv").string(), "source_repo,target_repo\na,b\nb,c\n");
}

}  // namespace

TEST_CASE("missing edges file exits with the config code and names the path") {
  TempDir dir;
  write_text_file((dir.path / "nodes.csv").string(), "repo\na\n");
  auto result = run_cli("ingest --edges " + (dir.path / "absent.csv").string() + " --nodes " +
                            (dir.path / "nodes.csv").string() + " --out " + dir.path.string(),
                        dir.path);
  CHECK(result.exit_code == 2);
  CHECK(result.stderr_text.find("absent.csv") != std::string::npos);
}

TEST_CASE("malformed data exits with the data code") {
  TempDir dir;
  write_text_file((dir.path / "nodes.csv").string(), "repo,Size\na,zzz\n");
  write_text_file((dir.path / "edges.csv").string(), "source_repo,target_repo\n");
  auto result = run_cli("ingest --edges " + (dir.path / "edges.csv").string() + " --nodes " +
                            (dir.path / "nodes.csv").string() + " --out " + dir.path.string(),
                        dir.path);
  CHECK(result.exit_code == 3);
}

TEST_CASE("ingest then stats round-trips the counts") {
  TempDir dir;
  write_chain_fixture(dir.path);
  auto result = run_cli("ingest --edges " + (dir.path / "edges.csv").string() + " --nodes " +
                            (dir.path / "nodes.csv").string() + " --out " + dir.path.string(),
                        dir.path);
  REQUIRE(result.exit_code == 0);
  const std::string stats = read_text_file((dir.path / "stats.json").string());
  CHECK(stats.find("\"nodes\": 3") != std::string::npos);
  CHECK(stats.find("\"edges\": 2") != std::string::npos);
  CHECK(stats.find("\"weak_components\": 1") != std::string::npos);

  const auto out = dir.path / "stats_again.json";
  result = run_cli("stats --graph " + (dir.path / "graph.bin").string() + " --out " + out.string(),
                   dir.path);
  REQUIRE(result.exit_code == 0);
  CHECK(read_text_file(out.string()) == stats);
}

TEST_CASE("fit writes a monotone trace and honors an init file") {
  TempDir dir;
  // two dense blocks
  std::string nodes = "repo,Size\n";
  std::string edges = "source_repo,target_repo\n";
  SplitMix64 rng(5);
  for (int i = 0; i < 30; ++i) nodes += "r" + std::to_string(i) + "," + std::to_string(i) + "\n";
  for (int i = 0; i < 30; ++i)
    for (int j = 0; j < 30; ++j) {
      if (i == j) continue;
      const bool same = (i < 15) == (j < 15);
      if (rng.next_double() < (same ? 0.4 : 0.03))
        edges += "r" + std::to_string(i) + ",r" + std::to_string(j) + "\n";
    }
  write_text_file((dir.path / "nodes.csv").string(), nodes);
  write_text_file((dir.path / "edges.csv").string(), edges);
  std::string labels = "repo,label\n";
  for (int i = 0; i < 30; ++i) labels += "r" + std::to_string(i) + "," + (i < 15 ? "0" : "1") + "\n";
  write_text_file((dir.path / "labels.csv").string(), labels);

  auto result = run_cli("ingest --edges " + (dir.path / "edges.csv").string() + " --nodes " +
                            (dir.path / "nodes.csv").string() + " --out " + dir.path.string(),
                        dir.path);
  REQUIRE(result.exit_code == 0);
  result = run_cli("--seed 3 fit --in " + dir.path.string() + " --out " + dir.path.string() +
                       " --k 2 --max-iter 50 --init " + (dir.path / "labels.csv").string(),
                   dir.path);
  REQUIRE(result.exit_code == 0);
  CHECK(result.stderr_text.find("labels.csv") != std::string::npos);

  const std::string trace = read_text_file((dir.path / "trace.csv").string());
  std::istringstream lines(trace);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "iteration,lower_bound");
  double previous = -1e300;
  int rows = 0;
  while (std::getline(lines, line)) {
    const auto comma = line.find(',');
    const double value = std::stod(line.substr(comma + 1));
    CHECK(value >= previous - 1e-8);
    previous = value;
    ++rows;
  }
  CHECK(rows >= 2);
  CHECK(fs::exists(dir.path / "fit.json"));
  CHECK(fs::exists(dir.path / "checkpoint.json"));
  CHECK(fs::exists(dir.path / "types.csv"));
}

TEST_CASE("fit resumes from a checkpoint") {
  TempDir dir;
  std::string nodes = "repo,Size\n";
  std::string edges = "source_repo,target_repo\n";
  SplitMix64 rng(9);
  for (int i = 0; i < 24; ++i) nodes += "r" + std::to_string(i) + "," + std::to_string(i) + "\n";
  for (int i = 0; i < 24; ++i)
    for (int j = 0; j < 24; ++j) {
      if (i == j) continue;
      const bool same = (i < 12) == (j < 12);
      if (rng.next_double() < (same ? 0.4 : 0.05))
        edges += "r" + std::to_string(i) + ",r" + std::to_string(j) + "\n";
    }
  write_text_file((dir.path / "nodes.csv").string(), nodes);
  write_text_file((dir.path / "edges.csv").string(), edges);
  auto result = run_cli("ingest --edges " + (dir.path / "edges.csv").string() + " --nodes " +
                            (dir.path / "nodes.csv").string() + " --out " + dir.path.string(),
                        dir.path);
  REQUIRE(result.exit_code == 0);
  result = run_cli("--seed 2 fit --in " + dir.path.string() + " --out " + dir.path.string() +
                       " --k 2 --max-iter 3",
                   dir.path);
  REQUIRE(result.exit_code == 0);
  const std::string first_trace = read_text_file((dir.path / "trace.csv").string());

  result = run_cli("--seed 2 fit --in " + dir.path.string() + " --out " + dir.path.string() +
                       " --k 2 --max-iter 40 --resume " +
                       (dir.path / "checkpoint.json").string(),
                   dir.path);
  REQUIRE(result.exit_code == 0);
  CHECK(result.stderr_text.find("resume") != std::string::npos);
  const std::string resumed_trace = read_text_file((dir.path / "trace.csv").string());
  // the resumed run keeps the earlier trace as its prefix and extends it
  CHECK(resumed_trace.size() > first_trace.size());
  std::istringstream a(first_trace), b(resumed_trace);
  std::string line_a, line_b;
  std::getline(a, line_a);
  std::getline(b, line_b);
  for (int row = 0; row < 3; ++row) {
    REQUIRE(std::getline(a, line_a));
    REQUIRE(std::getline(b, line_b));
    CHECK(line_a == line_b);
  }
}

TEST_CASE("simulate with zero steps emits an empty edge list") {
  TempDir dir;
  write_chain_fixture(dir.path);
  StructuralParams params;
  params.alpha_within = -1.0;
  params.alpha_between = -1.0;
  params.beta_within = Vector::Zero(1);
  params.beta_between = Vector::Zero(1);
  params.eta = Vector(2);
  params.eta << 0.5, 0.5;
  write_text_file((dir.path / "params.json").string(), params_json(params, {"Size"}));
  auto result = run_cli("--seed 4 simulate --nodes " + (dir.path / "nodes.csv").string() +
                            " --params " + (dir.path / "params.json").string() +
                            " --steps 0 --out " + dir.path.string(),
                        dir.path);
  REQUIRE(result.exit_code == 0);
  CHECK(read_text_file((dir.path / "sampled_edges.csv").string()) ==
        "source_repo,target_repo\n");
}

TEST_CASE("contagion on the chain matches hand values") {
  TempDir dir;
  write_chain_fixture(dir.path);
  auto result = run_cli("ingest --edges " + (dir.path / "edges.csv").string() + " --nodes " +
                            (dir.path / "nodes.csv").string() + " --out " + dir.path.string(),
                        dir.path);
  REQUIRE(result.exit_code == 0);
  result = run_cli(
      "contagion --in " + dir.path.string() + " --out " + dir.path.string() + " --k 1 --k 2",
      dir.path);
  REQUIRE(result.exit_code == 0);
  const std::string pernode = read_text_file((dir.path / "contagion_pernode.csv").string());
  CHECK(pernode.find("a,1,1,") != std::string::npos);
  CHECK(pernode.find("b,2,2,") != std::string::npos);
  CHECK(pernode.find("c,2,3,") != std::string::npos);
}

TEST_CASE("protect emits one curve row per strategy, l, and k") {
  TempDir dir;
  write_chain_fixture(dir.path);
  auto result = run_cli("ingest --edges " + (dir.path / "edges.csv").string() + " --nodes " +
                            (dir.path / "nodes.csv").string() + " --out " + dir.path.string(),
                        dir.path);
  REQUIRE(result.exit_code == 0);
  result = run_cli("protect --in " + dir.path.string() + " --out " + dir.path.string() +
                       " --k 2 --k 3 --k 4 --k 5 --l 10 --l 100 --strategies "
                       "expected-systemicness --strategies in-degree",
                   dir.path);
  REQUIRE(result.exit_code == 0);
  const std::string curves = read_text_file((dir.path / "protection_curves.csv").string());
  int expected_rows = 0, indegree_rows = 0;
  std::istringstream lines(curves);
  std::string line;
  std::getline(lines, line);  // header
  while (std::getline(lines, line)) {
    if (line.rfind("expected-systemicness,", 0) == 0) ++expected_rows;
    if (line.rfind("in-degree,", 0) == 0) ++indegree_rows;
  }
  CHECK(expected_rows == 8);
  CHECK(indegree_rows == 8);
}

TEST_CASE("config file supplies values and explicit flags win") {
  TempDir dir;
  write_chain_fixture(dir.path);
  write_text_file((dir.path / "run.conf").string(),
                  "# ingest fixture\n"
                  "edges=" + (dir.path / "edges.csv").string() + "\n" +
                  "nodes=" + (dir.path / "nodes.csv").string() + "\n" +
                  "out=" + (dir.path / "from_config").string() + "\n");
  auto result = run_cli("ingest --config " + (dir.path / "run.conf").string(), dir.path);
  REQUIRE(result.exit_code == 0);
  CHECK(fs::exists(dir.path / "from_config" / "graph.bin"));

  result = run_cli("ingest --config " + (dir.path / "run.conf").string() + " --out " +
                       (dir.path / "from_flag").string(),
                   dir.path);
  REQUIRE(result.exit_code == 0);
  CHECK(fs::exists(dir.path / "from_flag" / "graph.bin"));

  result = run_cli("ingest --config " + (dir.path / "missing.conf").string(), dir.path);
  CHECK(result.exit_code == 2);
}

TEST_CASE("unknown strategy is a config error") {
  TempDir dir;
  write_chain_fixture(dir.path);
  auto result = run_cli("ingest --edges " + (dir.path / "edges.csv").string() + " --nodes " +
                            (dir.path / "nodes.csv").string() + " --out " + dir.path.string(),
                        dir.path);
  REQUIRE(result.exit_code == 0);
  result = run_cli("protect --in " + dir.path.string() + " --out " + dir.path.string() +
                       " --strategies nonsense",
                   dir.path);
  CHECK(result.exit_code == 2);
}
