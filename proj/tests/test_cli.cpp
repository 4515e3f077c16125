#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "mourre/io.hpp"
#include "mourre/operators.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct Run {
  int status = -1;
  std::string output;
};

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "mourre_cli_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

fs::path write_config(const fs::path& dir, const Json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

Run lab(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + MOURRE_LAB_EXE + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  const int raw = std::system(cmd.c_str());
  Run r;
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.output = slurp(log);
  return r;
}

Json small_rho_scan(double tol) {
  Json j = Json::parse(R"({
    "schema_version": 1,
    "experiment": "rho-scan",
    "grid": {"L": 40, "n": 401},
    "potential": {"v_minus": 0, "v_plus": 1, "profile": "smooth_step"},
    "rho_scan": {"lambda_min": -0.5, "lambda_max": 2.0, "lambda_step": 0.5, "eps": 0.1, "estimator": "eta"},
    "seed": 3
  })");
  j["rho_scan"]["tol"] = tol;
  return j;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(slurp(p));
  std::string line;
  while (std::getline(is, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("rho-scan writes the CSV and JSON reports", "[cli]") {
  const fs::path dir = scratch("rho_scan");
  const Run r = lab("rho-scan --config \"" + write_config(dir, small_rho_scan(0.5)).string() + "\" --out \"" +
                        (dir / "out").string() + "\"",
                    dir / "log.txt");
  INFO(r.output);
  REQUIRE((r.status == 0 || r.status == 1));

  const auto rows = read_csv(dir / "out" / "rho_scan.csv");
  REQUIRE(rows.size() == 7);
  CHECK(rows[0] == std::vector<std::string>{"lambda", "rho0_analytic", "rho_raw", "rho_corrected", "n_discarded", "margin"});
  // analytic column: +inf below v_-, 2 lambda up to v_+, 2 (lambda - 1) after
  CHECK(rows[1][1] == "+inf");
  CHECK(std::stod(rows[2][1]) == 0.0);
  CHECK(std::stod(rows[3][1]) == 1.0);
  CHECK(std::stod(rows[4][1]) == 0.0);
  CHECK(std::stod(rows[5][1]) == 1.0);
  CHECK(std::stod(rows[6][1]) == 2.0);

  const Json report = Json::parse(slurp(dir / "out" / "rho_estimate.json"));
  CHECK(report["schema_version"] == 1);
  CHECK(report["experiment"] == "rho-scan");
  CHECK(report["config"]["grid"]["n"] == 401);
  for (const auto& e : report["report"]["estimates"]) {
    for (const char* key : {"lambda", "raw_min", "corrected", "n_discarded"}) CHECK(e.contains(key));
  }
  CHECK(report["verdict"].is_boolean());
  CHECK((report["verdict"] == true) == (r.status == 0));
}

TEST_CASE("reports are byte-identical across runs", "[cli][determinism]") {
  const fs::path dir = scratch("determinism");
  const fs::path cfg = write_config(dir, small_rho_scan(0.5));
  for (const char* out : {"a", "b"}) {
    lab("rho-scan --config \"" + cfg.string() + "\" --out \"" + (dir / out).string() + "\" --threads 2",
        dir / "log.txt");
  }
  for (const char* f : {"rho_scan.csv", "rho_estimate.json"}) {
    const std::string a = slurp(dir / "a" / f), b = slurp(dir / "b" / f);
    CHECK_FALSE(a.empty());
    CHECK(a == b);
  }
}

TEST_CASE("a failed verdict exits with status 1", "[cli]") {
  const fs::path dir = scratch("fail");
  Json cfg = small_rho_scan(1e-9);
  cfg["rho_scan"]["lambda_min"] = 0.5;
  cfg["rho_scan"]["lambda_max"] = 0.5;
  const Run r = lab("rho-scan --config \"" + write_config(dir, cfg).string() + "\" --out \"" + (dir / "out").string() + "\"",
                    dir / "log.txt");
  INFO(r.output);
  CHECK(r.status == 1);
  CHECK(r.output.find("verdict: FAIL") != std::string::npos);
}

TEST_CASE("configuration errors exit with status 2 and name the field", "[cli][errors]") {
  const fs::path dir = scratch("errors");

  SECTION("closed channel") {
    const Run r = lab(std::string("scatter --config \"") + MOURRE_CONFIG_DIR + "/scatter_closed_channel.json\" --out \"" +
                          (dir / "out").string() + "\"",
                      dir / "log.txt");
    CHECK(r.status == 2);
    CHECK(r.output.find("closed channel") != std::string::npos);
  }
  SECTION("unknown field") {
    Json cfg = small_rho_scan(0.2);
    cfg["grid"]["nn"] = 3;
    const Run r = lab("rho-scan --config \"" + write_config(dir, cfg).string() + "\"", dir / "log.txt");
    CHECK(r.status == 2);
    CHECK(r.output.find("grid.nn") != std::string::npos);
  }
  SECTION("even grid size") {
    Json cfg = small_rho_scan(0.2);
    cfg["grid"]["n"] = 400;
    const Run r = lab("rho-scan --config \"" + write_config(dir, cfg).string() + "\"", dir / "log.txt");
    CHECK(r.status == 2);
    CHECK(r.output.find("grid.n") != std::string::npos);
  }
  SECTION("negative tolerance") {
    const Run r = lab("rho-scan --config \"" + write_config(dir, small_rho_scan(-1.0)).string() + "\"", dir / "log.txt");
    CHECK(r.status == 2);
    CHECK(r.output.find("rho_scan.tol") != std::string::npos);
  }
  SECTION("experiment mismatch") {
    const Run r = lab("transfer --config \"" + write_config(dir, small_rho_scan(0.2)).string() + "\"", dir / "log.txt");
    CHECK(r.status == 2);
    CHECK(r.output.find("experiment") != std::string::npos);
  }
  SECTION("unknown experiment and missing file") {
    CHECK(lab("bogus --config \"" + write_config(dir, small_rho_scan(0.2)).string() + "\"", dir / "log.txt").status == 2);
    CHECK(lab("rho-scan --config \"" + (dir / "missing.json").string() + "\"", dir / "log.txt").status == 2);
    CHECK(lab("rho-scan", dir / "log.txt").status == 2);
  }
}

TEST_CASE("matrix export round-trips", "[cli][export]") {
  const fs::path dir = scratch("export");
  Json cfg = small_rho_scan(0.2);
  cfg["grid"]["n"] = 33;
  cfg["grid"]["L"] = 8;
  const Run r = lab("export --config \"" + write_config(dir, cfg).string() + "\" --out \"" + (dir / "out").string() + "\"",
                    dir / "log.txt");
  INFO(r.output);
  REQUIRE(r.status == 0);

  std::ifstream hf(dir / "out" / "H.txt");
  std::string header;
  std::getline(hf, header);
  CHECK(header == "# 33 33 complex");
  hf.seekg(0);
  const mourre::Matrix h = mourre::io::read_matrix_text(hf);

  const mourre::Grid g = mourre::make_grid(8.0, 33);
  const mourre::OperatorSet set =
      mourre::build_pair(g, mourre::make_steplike(g, 0.0, 1.0, mourre::ProfileKind::smooth_step), mourre::make_cutoffs(g));
  CHECK((h - mourre::Matrix(set.H)).cwiseAbs().maxCoeff() == 0.0);

  std::ifstream jf(dir / "out" / "J.txt");
  const mourre::Matrix j = mourre::io::read_matrix_text(jf);
  CHECK(j.rows() == 33);
  CHECK(j.cols() == 66);

  const auto ev = read_csv(dir / "out" / "eigenvalues_H.csv");
  CHECK(ev.size() == 34);
  CHECK(ev[0] == std::vector<std::string>{"index", "value"});
}

TEST_CASE("text matrix format", "[cli][export]") {
  mourre::Matrix m(2, 3);
  m << mourre::Complex(1.0, -0.5), mourre::Complex(0.1, 0.0), mourre::Complex(-3.0, 1e-300),
      mourre::Complex(2.0 / 3.0, 0.0), mourre::Complex(0.0, 0.0), mourre::Complex(1e17, -7.0);
  std::ostringstream os;
  mourre::io::write_matrix_text(os, m);
  CHECK(os.str().rfind("# 2 3 complex\n1 -0.5 0.10000000000000001 0 ", 0) == 0);
  std::istringstream is(os.str());
  CHECK((mourre::io::read_matrix_text(is) - m).cwiseAbs().maxCoeff() == 0.0);

  std::istringstream bad("# 2 2 real\n");
  CHECK_THROWS(mourre::io::read_matrix_text(bad));
  std::istringstream truncated("# 1 2 complex\n1 2 3\n");
  CHECK_THROWS(mourre::io::read_matrix_text(truncated));
}

TEST_CASE("json numbers", "[cli][io]") {
  CHECK(mourre::io::format_double(0.1) == "0.10000000000000001");
  CHECK(mourre::io::format_double(std::numeric_limits<double>::infinity()) == "+inf");
  CHECK(mourre::io::format_double(-std::numeric_limits<double>::infinity()) == "-inf");
  const Json j = {{"b", 1.5}, {"a", mourre::io::number(std::numeric_limits<double>::infinity())}, {"c", {1.0, 2.0}}};
  CHECK(mourre::io::dump(j) == "{\n  \"a\": \"+inf\",\n  \"b\": 1.5,\n  \"c\": [1, 2]\n}\n");
}
