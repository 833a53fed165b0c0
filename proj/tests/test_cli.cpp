#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "eqport/cli.hpp"

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "eqport");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  auto* old_out = std::cout.rdbuf(out.rdbuf());
  auto* old_err = std::cerr.rdbuf(err.rdbuf());
  const int code = eqport::cli::run(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  return {code, out.str(), err.str()};
}

const std::string kMarket = "const:lambda=0.4,sigma=0.2,T=20";

}  // namespace

TEST_CASE("fig1 emits traces and a crossing record") {
  const auto csv = run({"fig1"});
  CHECK(csv.code == 0);
  CHECK(csv.out.rfind("t,abs_a1,abs_a2\n", 0) == 0);
  const auto js = run({"fig1", "--json"});
  const auto j = nlohmann::json::parse(js.out);
  CHECK(j["schema"] == "eqport.fig1/1");
  CHECK(j["crossing"]["found"] == true);
  CHECK(j["crossing"]["t_star"].get<double>() == doctest::Approx(8.185676157655).epsilon(1e-7));
  CHECK(j["fsd"]["status"] == "dominates");
}

TEST_CASE("solve regimes and exit codes") {
  const auto p = run({"solve", "--dist", "poisson:theta=2", "--market", kMarket, "--json"});
  CHECK(p.code == 0);
  CHECK(nlohmann::json::parse(p.out)["report"]["regime"] == "unique_finite");

  const auto s = run({"solve", "--dist", "stable:alpha=0.4", "--market", kMarket, "--json"});
  CHECK(s.code == 0);
  CHECK(nlohmann::json::parse(s.out)["report"]["regime"] == "trivial_only");

  const auto n = run({"solve", "--dist", "poisson:theta=1.5", "--market", kMarket});
  CHECK(n.code == 2);
  const auto rep = nlohmann::json::parse(n.out);
  CHECK(rep["report"]["regime"] == "nonexistent_deterministic");
  CHECK(rep["report"]["h_infinity"]["value"] == 2.25);
  CHECK(nlohmann::json::parse(n.err)["kind"] == "regime");

  const auto bad = run({"solve", "--dist", "gamma:alpha=2,scale=1", "--market", kMarket});
  CHECK(bad.code == 2);
  const auto e = nlohmann::json::parse(bad.err);
  CHECK(e["kind"] == "parse");
  CHECK(e["column"] == 15);

  CHECK(run({"nonsense"}).code == 2);
}

TEST_CASE("curve csv columns") {
  const auto r = run({"solve", "--dist", "point:2", "--market",
                      "const:lambda=0.3,sigma=0.2,T=10,d=2", "--grid", "10"});
  CHECK(r.code == 0);
  std::istringstream in(r.out);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(header == "t,v,a_1,a_2,pi_1,pi_2,J0");
  CHECK(first.rfind("0,", 0) == 0);
  CHECK(first.find(",0.15,0.15,0.75,0.75,") != std::string::npos);
}

TEST_CASE("identical arguments give identical bytes") {
  const std::vector<std::string> args{"verify", "--dist", "discrete:1=0.9,3=0.1", "--market",
                                      "const:lambda=0.4,sigma=0.2,T=5", "--grid", "200",
                                      "--paths", "2000", "--directions", "5", "--times", "3",
                                      "--seed", "17", "--json"};
  const auto a = run(args), b = run(args);
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  const auto j = nlohmann::json::parse(a.out);
  CHECK(j["certificate"]["seed"] == 17);
  CHECK(j["certificate"]["pass"] == true);
  CHECK(j["monte_carlo"].size() == 2);
}

TEST_CASE("family subcommands") {
  const std::string m = "const:lambda=1,sigma=1,T=1";
  const auto e = run({"enumerate", "--dist", "stable:alpha=0.8", "--market", m, "--eta-grid", "3",
                      "--json"});
  CHECK(e.code == 0);
  CHECK(nlohmann::json::parse(e.out)["members"].size() == 3);
  const auto o = run({"optimal", "--dist", "stable:alpha=0.8", "--market", m, "--json"});
  const auto j = nlohmann::json::parse(o.out);
  CHECK(j["t0"] == 1.0);
  CHECK(j["uniformly_strictly_optimal"] == true);
  CHECK(run({"enumerate", "--dist", "poisson:theta=2", "--market", kMarket}).code == 2);
}

TEST_CASE("output files and config overrides") {
  const auto dir = std::filesystem::temp_directory_path() / "eqport_cli_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "cfg.txt");
    f << "# coarse grid\ngrid_intervals = 50\n";
  }
  const auto r = run({"fig2", "--config", (dir / "cfg.txt").string(), "--csv",
                      (dir / "fig2.csv").string(), "--report", (dir / "fig2.json").string()});
  CHECK(r.code == 0);
  std::ifstream csv(dir / "fig2.csv");
  std::string line;
  std::size_t rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 52);
  std::ifstream js(dir / "fig2.json");
  const auto j = nlohmann::json::parse(js);
  CHECK(j["above_count"].get<int>() > 0);

  {
    std::ofstream f(dir / "bad.txt");
    f << "grid = 10\n";
  }
  const auto bad = run({"fig2", "--config", (dir / "bad.txt").string()});
  CHECK(bad.code == 2);
  CHECK(nlohmann::json::parse(bad.err)["line"] == 1);
}

TEST_CASE("comparison subcommands") {
  const auto c = run({"compare", "--dist1", "discrete:1=0.5,3=0.5", "--dist2",
                      "discrete:1=0.8,3=0.2", "--market", kMarket, "--json"});
  CHECK(c.code == 0);
  const auto j = nlohmann::json::parse(c.out);
  CHECK(j["rh"]["status"] == "dominates");
  CHECK(j["violations"] == 0);
  const auto rv = run({"reversal", "--dist1", "discrete:1=0.9,3=0.1", "--dist2",
                       "discrete:1=0.9,2=0.1", "--market", kMarket});
  CHECK(nlohmann::json::parse(rv.out)["reversal"]["found"] == true);
  const auto sw = run({"sweep-crossing", "--dist1", "discrete:1=0.9,3=0.1", "--dist2",
                       "discrete:1=0.9,2=0.1", "--market", kMarket, "--values", "0.8,0.9",
                       "--json"});
  CHECK(nlohmann::json::parse(sw.out)["monotone"] == true);
  const auto cr = run({"crossing", "--dist1", "discrete:1=0.9,2=0.1", "--dist2",
                       "discrete:1=0.9,3=0.1", "--market", kMarket});
  CHECK(cr.code == 2);
  const auto ag = run({"aggregate", "--mode", "combination", "--components",
                       "discrete:0.1=0.2,8=0.8;point:1.5", "--weights", "0.5,0.5", "--market",
                       "const:lambda=0.5,sigma=0.2,T=50", "--json"});
  CHECK(nlohmann::json::parse(ag.out)["above_count"].get<int>() > 0);
  const auto cv = run({"converge", "--dist", "gamma:alpha=2,beta=0.5", "--n", "4,8",
                       "--market", "const:lambda=0.4,sigma=0.2,T=5", "--json"});
  CHECK(nlohmann::json::parse(cv.out)["decreasing"] == true);
}
