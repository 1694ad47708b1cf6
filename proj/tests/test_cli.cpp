// Integration tests driving the built CLI binary through a shell.
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "cvxpolar/io.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace cvxpolar;
namespace ts = testsupport;

namespace {

std::string g_binary;

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("cvxpolar_cli_" + std::to_string(::getpid()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
  const std::string cmd = g_binary + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("conjugate command reproduces Q and honors --fast") {
  TempDir tmp;
  const SampledFunction q = ts::sample_q_1d(-3.0, 3.0, 401, false);
  io::write_sampled_function_csv(tmp.file("q.csv"), q);

  REQUIRE(run("conjugate --input " + tmp.file("q.csv") + " --output " + tmp.file("b.csv") +
              " --eta-grid auto") == 0);
  const SampledFunction brute = io::read_sampled_function_csv(tmp.file("b.csv"));
  for (Eigen::Index j = 0; j < brute.size(); ++j) {
    const double eta = brute.points(j, 0);
    CHECK(std::abs(brute.values[j] - 0.5 * eta * eta) <= 1e-4);
  }

  REQUIRE(run("conjugate --input " + tmp.file("q.csv") + " --output " + tmp.file("f.csv") +
              " --eta-grid auto --fast") == 0);
  const SampledFunction fast = io::read_sampled_function_csv(tmp.file("f.csv"));
  CHECK((fast.values - brute.values).cwiseAbs().maxCoeff() <= 1e-12);

  // optional artifacts
  REQUIRE(run("conjugate --input " + tmp.file("q.csv") + " --output " + tmp.file("c.csv") +
              " --eta-grid -1:1:11 --biconjugate " + tmp.file("bi.csv") + " --fy-gap " +
              tmp.file("gap.csv") + " --svg " + tmp.file("plot.svg")) == 0);
  const SampledFunction biconj = io::read_sampled_function_csv(tmp.file("bi.csv"));
  CHECK((biconj.values - q.values).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(io::read_text(tmp.file("gap.csv")).rfind("theta_1,eta_1,gap", 0) == 0);
  CHECK(io::read_text(tmp.file("plot.svg")).rfind("<svg", 0) == 0);
}

TEST_CASE("malformed input exits 2, missing flags exit 2") {
  TempDir tmp;
  io::write_text_atomic(tmp.file("empty.csv"), "");
  CHECK(run("conjugate --input " + tmp.file("empty.csv") + " --output " + tmp.file("o.csv")) == 2);
  CHECK(run("conjugate --input " + tmp.file("missing.csv") + " --output " + tmp.file("o.csv")) ==
        2);
  CHECK(run("conjugate") == 2);
  CHECK(run("bogus-subcommand") == 2);
}

TEST_CASE("polar command emits the envelope of an epigraph") {
  TempDir tmp;
  const SampledFunction q = ts::sample_q_1d(-2.0, 2.0, 101);
  io::write_sampled_function_csv(tmp.file("q.csv"), q);
  REQUIRE(run("polar --input " + tmp.file("q.csv") + " --output " + tmp.file("env.csv") +
              " --svg " + tmp.file("env.svg")) == 0);
  const std::string text = io::read_text(tmp.file("env.csv"));
  CHECK(text.rfind("x_1,x_2,degenerate", 0) == 0);

  // body JSON path with an explicit cost matrix
  io::write_text_atomic(tmp.file("body.json"), io::convex_body_json(ts::disk_body(64)));
  io::write_text_atomic(tmp.file("cl.json"), io::cost_matrix_json(CostMatrix::legendre(1)));
  REQUIRE(run("polar --input " + tmp.file("body.json") + " --cost-matrix " + tmp.file("cl.json") +
              " --output " + tmp.file("env2.csv")) == 0);
  CHECK(io::read_text(tmp.file("env2.csv")).rfind("x_1,x_2,degenerate", 0) == 0);
}

TEST_CASE("decompose command writes the matrix report") {
  TempDir tmp;
  io::write_text_atomic(tmp.file("c.json"),
                        io::cost_matrix_json(CostMatrix(ts::parabola_to_circle_matrix())));
  REQUIRE(run("decompose --cost-matrix " + tmp.file("c.json") + " --output " +
              tmp.file("report.json")) == 0);
  const std::string report = io::read_text(tmp.file("report.json"));
  CHECK(report.find("\"M_T\"") != std::string::npos);
  CHECK(report.find("\"identity_T\"") != std::string::npos);

  // a singular cost matrix is a numerical failure
  io::write_text_atomic(tmp.file("sing.json"), "{\"n\": 1, \"C\": [1,1,1,1,1,1,1,1,1]}");
  CHECK(run("decompose --cost-matrix " + tmp.file("sing.json")) == 3);
}

TEST_CASE("divergence command in both modes") {
  TempDir tmp;
  REQUIRE(run(std::string("divergence --point-a [1,0.5,1] --point-b [0,0,1] --output ") +
              tmp.file("r.json")) == 0);
  const std::string r = io::read_text(tmp.file("r.json"));
  CHECK(r.find("\"polar_fy\": 0.5") != std::string::npos);
  CHECK(r.find("\"bregman\": null") != std::string::npos);

  const SampledFunction q = ts::sample_q_1d(-3.0, 3.0, 61);
  io::write_sampled_function_csv(tmp.file("q.csv"), q);
  REQUIRE(run("divergence --input " + tmp.file("q.csv") +
              " --theta1 2 --theta2 1 --variant paper --output " + tmp.file("r2.json")) == 0);
  const std::string r2 = io::read_text(tmp.file("r2.json"));
  CHECK(r2.find("\"bregman\": 0.5") != std::string::npos);

  CHECK(run("divergence --point-a [1,0.5,1]") == 2);
  // ideal point input
  CHECK(run("divergence --point-a [1,0.5,0] --point-b [0,0,1]") == 2);
}

TEST_CASE("ctransform command defaults to the conjugation coupling") {
  TempDir tmp;
  const SampledFunction q = ts::sample_q_1d(-3.0, 3.0, 401, false);
  io::write_sampled_function_csv(tmp.file("q.csv"), q);
  REQUIRE(run("ctransform --input " + tmp.file("q.csv") + " --output " + tmp.file("ct.csv") +
              " --eta-grid -2:2:41") == 0);
  const SampledFunction ct = io::read_sampled_function_csv(tmp.file("ct.csv"));

  Eigen::MatrixXd eta(41, 1);
  eta.col(0) = Eigen::VectorXd::LinSpaced(41, -2.0, 2.0);
  const auto [conj, arg] = bruteforce_conjugate_values(q, eta);
  CHECK((ct.values + conj).cwiseAbs().maxCoeff() <= 1e-12);  // F^c = -F*

  // explicit quadratic cost file
  QuadraticCost moreau;
  moreau.Cn = Eigen::MatrixXd::Constant(1, 1, 0.5);
  moreau.d = 0.5;
  moreau.e = -1.0;
  io::write_text_atomic(tmp.file("cost.json"), io::quadratic_cost_json(moreau));
  REQUIRE(run("ctransform --input " + tmp.file("q.csv") + " --cost " + tmp.file("cost.json") +
              " --output " + tmp.file("m.csv") + " --eta-grid -1:1:21") == 0);
  const SampledFunction m = io::read_sampled_function_csv(tmp.file("m.csv"));
  for (Eigen::Index j = 0; j < m.size(); ++j) {
    const double e = m.points(j, 0);
    CHECK(std::abs(m.values[j] - e * e / 4.0) <= 1e-3);
  }
}

TEST_CASE("demo scenarios succeed and unknown demos exit 2") {
  TempDir tmp;
  CHECK(run("demo --demo self-dual-parabola") == 0);
  CHECK(run("demo --demo parabola-to-circle --samples 400 --output " + tmp.file("c.csv") +
            " --svg " + tmp.file("c.svg")) == 0);
  CHECK(run("demo --demo fig2-envelope --samples 101 --output " + tmp.file("f.csv")) == 0);
  CHECK(run("demo --demo parabola-to-circle --strict") == 0);
  CHECK(run("demo --demo does-not-exist") == 2);
  // an absurdly tight threshold trips the assertion exit code
  CHECK(run("demo --demo self-dual-parabola --tol 1e-30") == 4);
}

TEST_CASE("deterministic outputs for identical inputs") {
  TempDir tmp;
  const SampledFunction q = ts::sample_q_1d(-2.0, 2.0, 101, false);
  io::write_sampled_function_csv(tmp.file("q.csv"), q);
  REQUIRE(run("conjugate --input " + tmp.file("q.csv") + " --output " + tmp.file("a.csv")) == 0);
  REQUIRE(run("conjugate --input " + tmp.file("q.csv") + " --output " + tmp.file("b.csv")) == 0);
  CHECK(io::read_text(tmp.file("a.csv")) == io::read_text(tmp.file("b.csv")));
}

TEST_CASE("config file supplies defaults, flags take precedence") {
  TempDir tmp;
  io::write_text_atomic(tmp.file("cfg.ini"), "[demo]\ndemo=self-dual-parabola\n");
  CHECK(run("--config " + tmp.file("cfg.ini") + " demo") == 0);
  // an explicit flag overrides the config value
  CHECK(run("--config " + tmp.file("cfg.ini") + " demo --demo parabola-to-circle --samples 64") ==
        0);
  CHECK(run("--config " + tmp.file("missing.ini") + " demo") == 2);
}

TEST_CASE("SVG emission never changes the computed bytes") {
  TempDir tmp;
  const SampledFunction q = ts::sample_q_1d(-2.0, 2.0, 101, false);
  io::write_sampled_function_csv(tmp.file("q.csv"), q);
  REQUIRE(run("conjugate --input " + tmp.file("q.csv") + " --output " + tmp.file("plain.csv")) ==
          0);
  REQUIRE(run("conjugate --input " + tmp.file("q.csv") + " --output " + tmp.file("withsvg.csv") +
              " --svg " + tmp.file("plot.svg")) == 0);
  CHECK(io::read_text(tmp.file("plain.csv")) == io::read_text(tmp.file("withsvg.csv")));
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli <path-to-cvxpolar-binary> [doctest args]\n");
    return 1;
  }
  g_binary = argv[1];
  doctest::Context context;
  context.applyCommandLine(argc - 1, argv + 1);
  return context.run();
}
