#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#include "json.hpp"

#include "dimlab/experiments.hpp"
#include "dimlab/results.hpp"

using namespace dimlab;

namespace {

struct Run {
  int status = -1;
  std::string out;
};

Run cli(const std::string& args) {
  const std::string cmd = std::string(DIMLAB_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int st = pclose(pipe);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("dimlab_test_" + name)).string();
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::pair<double, double>> plot_points(const std::string& text, std::size_t block) {
  std::vector<std::pair<double, double>> pts;
  std::istringstream in(text);
  std::string line;
  std::size_t current = 0;
  bool in_block = false;
  while (std::getline(in, line)) {
    if (line.rfind("# series", 0) == 0) {
      in_block = current == block;
      ++current;
      continue;
    }
    if (line.empty() || line[0] == '#' || !in_block) continue;
    std::istringstream ls(line);
    double x, y;
    ls >> x >> y;
    pts.emplace_back(x, y);
  }
  return pts;
}

double fit_slope(const std::vector<std::pair<double, double>>& pts) {
  double mx = 0, my = 0;
  for (auto [x, y] : pts) mx += x, my += y;
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxy = 0, sxx = 0;
  for (auto [x, y] : pts) sxy += (x - mx) * (y - my), sxx += (x - mx) * (x - mx);
  return sxy / sxx;
}

}  // namespace

TEST_CASE("CSV emission: header, rows, quoting") {
  ResultTable empty;
  CHECK(to_csv(empty) == "experiment,param_json,value,reference,pass,seed,ci_low,ci_high\n");
  ResultTable one;
  one.rows.push_back(ResultRow{"x", R"({"a":1,"b":"c"})", 0.5, 1.0, true, 7, std::nullopt, 0.75});
  const std::string csv = to_csv(one);
  CHECK(csv == "experiment,param_json,value,reference,pass,seed,ci_low,ci_high\n"
               "x,\"{\"\"a\"\":1,\"\"b\"\":\"\"c\"\"}\",0.5,1,true,7,,0.75\n");
  const auto rows = parse_csv(csv);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][1] == R"({"a":1,"b":"c"})");

  const std::string path = temp_path("one.csv");
  emit_csv(one, path);
  CHECK(slurp(path) == csv);
  CHECK_THROWS_AS(emit_csv(one, "/nonexistent-dir/x.csv"), Error);
}

TEST_CASE("number formatting is shortest round trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(std::stod(format_double(0.9464037262230695)) == 0.9464037262230695);
}

TEST_CASE("plot data needs a series") {
  ResultTable t;
  t.experiment = "lemma52";
  CHECK_THROWS_AS(to_plotdata(t), InvalidArgument);
}

TEST_CASE("range parsing and config validation") {
  CHECK(parse_range("4..12").lo == 4);
  CHECK(parse_range("4..12").hi == 12);
  CHECK(parse_range("5").hi == 5);
  CHECK_THROWS_AS(parse_range("7..3"), InvalidArgument);
  CHECK_THROWS_AS(parse_range("a..3"), InvalidArgument);
  ExperimentConfig c;
  c.command = "lemma52";
  c.u = 0.4;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c.command = "bogus";
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  CHECK_THROWS_AS(apply_setting(c, "colour", "red"), InvalidArgument);
  CHECK_THROWS_AS(apply_setting(c, "trials", "0"), InvalidArgument);
}

TEST_CASE("cantor --n-max 3 reproduces the closed-form counts") {
  const auto r = cli("cantor --n-max 3");
  CHECK(r.status == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 10);
  const double expected[] = {8, 8, 16, 64, 64, 160, 512, 512, 1792};
  for (std::size_t k = 1; k < rows.size(); ++k) {
    CHECK(std::stod(rows[k][2]) == expected[k - 1]);
    CHECK(rows[k][4] == "true");
    CHECK(rows[k][5] == "1");
    CHECK(nlohmann::json::parse(rows[k][1])["version"] == kVersionTag);
  }
}

TEST_CASE("estimate on the harmonic sequence gives a slope near 1/2") {
  const auto r = cli("estimate --space harmonic --variant liminf --n 4..12 --seed 3");
  CHECK(r.status == 0);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(std::fabs(std::stod(rows[1][2]) - 0.5) <= 0.05);
  CHECK(rows[1][5] == "3");
}

TEST_CASE("lemma52 q sweep emits a ratio table") {
  const auto r = cli("lemma52 --d 1 --u 1 --sweep q");
  CHECK((r.status == 0 || r.status == 1));
  const auto rows = parse_csv(r.out);
  std::size_t ratios = 0;
  for (const auto& row : rows)
    if (row[0] == "lemma52.ratio") {
      ++ratios;
      CHECK(row[4] == "true");
    }
  CHECK(ratios == 8);
}

TEST_CASE("plot data for scale series") {
  SUBCASE("cantor f series n = 1..6 lies on a line of slope log8/log9") {
    const std::string path = temp_path("cantor.plot");
    // The f+g slope has not settled by n = 6, so its row fails and the exit status is 1.
    CHECK(cli("cantor --n 1..6 --plot " + path).status == 1);
    const std::string text = slurp(path);
    CHECK(text.rfind("# experiment cantor", 0) == 0);
    CHECK(text.find("# seed 1") != std::string::npos);
    const auto pts = plot_points(text, 0);
    REQUIRE(pts.size() == 6);
    CHECK(std::fabs(fit_slope(pts) - std::log(8.0) / std::log(9.0)) <= 1e-9);
  }
  SUBCASE("interval series has slope 1") {
    const std::string path = temp_path("interval.plot");
    CHECK(cli("estimate --space interval --n 3..10 --plot " + path).status == 0);
    CHECK(std::fabs(fit_slope(plot_points(slurp(path), 0)) - 1.0) <= 0.05);
  }
  SUBCASE("harmonic series has slope near 1/2") {
    const std::string path = temp_path("harmonic.plot");
    cli("estimate --space harmonic --n 4..12 --plot " + path);
    CHECK(std::fabs(fit_slope(plot_points(slurp(path), 0)) - 0.5) <= 0.05);
  }
}

TEST_CASE("exit codes") {
  CHECK(cli("estimate --bogus 1").status == 2);
  CHECK(cli("estimate --n 9..3").status == 2);
  CHECK(cli("").status == 2);
  CHECK(cli("energy --check statement55 --space interval").status == 2);
  CHECK(cli("cantor --n-max 3 --plot /tmp/x.plot").status == 2);
  CHECK(cli("prevalence --space interval --drift f").status == 2);
  // infeasible depth surfaces the module error
  const std::string cmd = std::string(DIMLAB_CLI_PATH) + " cantor --n-max 8 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string err;
  char buf[512];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) err.append(buf, got);
  const int st = pclose(pipe);
  CHECK(WEXITSTATUS(st) == 2);
  CHECK(err.find("exceeds the enumeration limit") != std::string::npos);
  // a failing criterion gives 1
  CHECK(cli("lemma52 --d 1 --u 1 --sweep all").status == 1);
}

TEST_CASE("config file values are overridden by flags") {
  const std::string path = temp_path("config.txt");
  {
    std::ofstream out(path);
    out << "# estimate settings\nspace = harmonic\nvariant = liminf\nn = 4..10\nseed = 9\n";
  }
  const auto from_file = parse_csv(cli("estimate --config " + path).out);
  REQUIRE(from_file.size() == 2);
  auto p = nlohmann::json::parse(from_file[1][1]);
  CHECK(p["space"] == "harmonic");
  CHECK(p["n_hi"] == 10);
  CHECK(from_file[1][5] == "9");
  const auto overridden = parse_csv(cli("estimate --config " + path + " --space interval --seed 4").out);
  p = nlohmann::json::parse(overridden[1][1]);
  CHECK(p["space"] == "interval");
  CHECK(p["variant"] == "liminf");
  CHECK(overridden[1][5] == "4");
  {
    std::ofstream out(path);
    out << "space harmonic\n";
  }
  CHECK(cli("estimate --config " + path).status == 2);
}

TEST_CASE("same seed gives byte-identical CSV files") {
  const std::string a = temp_path("a.csv"), b = temp_path("b.csv"), c = temp_path("c.csv");
  cli("statement31 --trials 2000 --seed 12 --out " + a);
  cli("statement31 --trials 2000 --seed 12 --out " + b);
  cli("statement31 --trials 2000 --seed 13 --out " + c);
  CHECK(slurp(a) == slurp(b));
  CHECK(slurp(a) != slurp(c));
  const auto rows = parse_csv(slurp(a));
  REQUIRE(rows.size() == 3);
  for (std::size_t k = 1; k < rows.size(); ++k) CHECK(rows[k][5] == "12");
}

TEST_CASE("prevalence output names experiment, seed and parameters") {
  const auto r = cli("prevalence --n 5..5 --trials 20 --drift zero --seed 2");
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][0] == "prevalence.event");
  const auto p = nlohmann::json::parse(rows[1][1]);
  CHECK(p["n"] == 5);
  CHECK(p["trials"] == 20);
  CHECK(p["drift"] == "zero");
  CHECK(rows[1][5] == "2");
  CHECK_FALSE(rows[1][6].empty());
}
