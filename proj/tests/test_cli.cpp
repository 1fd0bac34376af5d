#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cli.hpp"
#include "spectral_lab/checksum.hpp"

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args, const std::string& input = {}) {
  args.insert(args.begin(), "spectral-lab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::istringstream in(input);
  std::ostringstream out, err;
  Run r;
  r.code = spectral_lab::cli::run_cli(static_cast<int>(argv.size()), argv.data(), in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("spectral_lab_cli_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::size_t lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("lattice piped into the inertia sweep") {
    const Run g = run({"lattice", "--d", "3", "--radius", "3"});
    REQUIRE(g.code == 0);
    const Run b = run({"bs", "--alpha-grid", "1:100:log20"}, g.out);
    REQUIRE(b.code == 0);
    CHECK(b.out.rfind("alpha,n_minus,threshold\n", 0) == 0);
    CHECK(lines(b.out) == 21);
    const Run again = run({"ninertia", "--alpha-grid", "1:100:log20"}, g.out);
    CHECK(again.out == b.out);
  }

  TEST_CASE("missing files exit 2 and name the path") {
    const Run g = run({"lattice", "--d", "2", "--radius", "2"});
    const Run r = run({"eigs", "--potential", "/nonexistent/v.pot"}, g.out);
    CHECK(r.code == 2);
    const auto e = nlohmann::json::parse(r.err);
    CHECK(e["error"]["kind"] == "not_found");
    CHECK(e["error"]["subject"] == "/nonexistent/v.pot");

    const Run c = run({"--config", "/nonexistent/run.toml", "eigs"}, g.out);
    CHECK(c.code == 2);
    CHECK(nlohmann::json::parse(c.err)["error"]["subject"] == "/nonexistent/run.toml");
  }

  TEST_CASE("config file naming a missing potential file") {
    const auto dir = scratch("config");
    const Run g = run({"lattice", "--d", "2", "--radius", "2"});
    std::ofstream(dir / "graph.txt") << g.out;
    std::ofstream(dir / "run.toml") << "[eigs]\ngraph = \"" << (dir / "graph.txt").string() << "\"\n"
                                    << "potential = \"" << (dir / "absent.pot").string() << "\"\n";
    const Run r = run({"--config", (dir / "run.toml").string(), "eigs"});
    CHECK(r.code == 2);
    CHECK(nlohmann::json::parse(r.err)["error"]["subject"] == (dir / "absent.pot").string());
  }

  TEST_CASE("bad arguments and invalid graphs") {
    CHECK(run({"nonsense"}).code == 2);
    CHECK(run({"bs", "--alpha-grid", "0:1:log3"}, "graph combinatorial\nv a\nv b boundary\ne a b 1\n").code == 2);
    const Run r = run({"eigs"}, "graph combinatorial\nv a\nv b\ne a b 1\ne a b 1\n");
    CHECK(r.code == 2);
    CHECK(nlohmann::json::parse(r.err)["error"]["kind"] == "invalid_graph");
    CHECK(run({"eigs"}, "").code == 2);
  }

  TEST_CASE("identical runs give byte-identical output") {
    const Run g = run({"build", "random", "--vertices", "40", "--extra-edges", "20", "--metric", "--min", "0.5",
                       "--max", "2"});
    REQUIRE(g.code == 0);
    for (const char* cmd : {"eigs", "heat", "weyl"}) {
      CAPTURE(cmd);
      std::vector<std::string> args{cmd, "--potential-gen", "random:7:3", "--h-target", "0.1"};
      if (std::string(cmd) == "weyl") {
        args.insert(args.end(), {"--alpha-grid", "10,100"});
      }
      const Run a = run(args, g.out), b = run(args, g.out);
      CHECK(a.code == 0);
      CHECK(a.out == b.out);
      CHECK(!a.out.empty());
    }
  }

  TEST_CASE("manifest lists every file with its checksum") {
    const auto dir = scratch("manifest");
    const Run g = run({"lattice", "--d", "2", "--radius", "4"});
    const Run r = run({"--out", dir.string(), "report", "--ops", "color", "eigs", "ninertia", "bound:lower-combinatorial",
                       "--alpha-grid", "1,10"},
                      g.out);
    REQUIRE(r.code == 0);
    const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
    std::size_t declared = 0;
    for (const auto& f : m["files"]) {
      const std::string body = slurp(dir / f["name"].get<std::string>());
      CHECK(body.size() == f["bytes"].get<std::size_t>());
      char hex[20];
      std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(spectral_lab::fnv1a64(body)));
      CHECK(f["fnv1a64"] == hex);
      ++declared;
    }
    std::size_t on_disk = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) on_disk += e.path().filename() != "manifest.json";
    CHECK(declared == on_disk);
    CHECK(declared >= 4);
  }

  TEST_CASE("heat refuses windows above the size cap") {
    const Run g = run({"build", "metric-lattice", "--d", "2", "--radius", "6"});
    const Run r = run({"heat", "--h-target", "0.01"}, g.out);
    CHECK(r.code == 3);
    CHECK(nlohmann::json::parse(r.err)["error"]["kind"] == "capacity");
  }

  TEST_CASE("bound subcommand emits a JSON report") {
    const Run g = run({"lattice", "--d", "2", "--radius", "4"});
    const Run r = run({"bound", "lower-combinatorial", "--s", "0.1"}, g.out);
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.contains("pass"));
    CHECK(j["pass"].get<bool>());
  }

  TEST_CASE("dimfit on a lattice") {
    const Run g = run({"lattice", "--d", "3", "--radius", "5"});
    const Run r = run({"dimfit", "--window", "1:10"}, g.out);
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j.dump().find("dimension") != std::string::npos);
  }

  TEST_CASE("help lists flags with units") {
    const Run r = run({"weyl", "--help"});
    CHECK(r.code == 0);
    CHECK(r.out.find("--alpha-grid") != std::string::npos);
    CHECK(r.out.find("--refine") != std::string::npos);
    CHECK(r.out.find("length") != std::string::npos);
    const Run top = run({"--help"});
    CHECK(top.code == 0);
    CHECK(top.out.find("bs-check") != std::string::npos);
  }
}
