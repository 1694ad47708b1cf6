// Command-line front end: conjugation, polarity envelopes, decompositions,
// divergences, c-transforms and demo scenarios over CSV/JSON files.
#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "cvxpolar/ctransform.hpp"
#include "cvxpolar/divergences.hpp"
#include "cvxpolar/io.hpp"
#include "cvxpolar/legendre.hpp"
#include "cvxpolar/polarity.hpp"
#include "cvxpolar/svg.hpp"
#include "cvxpolar/transforms.hpp"

namespace {

using namespace cvxpolar;

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitAssertion = 4;

struct EtaGridSpec {
  bool automatic = true;
  double lo = 0.0, hi = 0.0;
  int count = 0;
};

EtaGridSpec parse_eta_grid(const std::string& spec) {
  if (spec == "auto") return {};
  EtaGridSpec g;
  g.automatic = false;
  char extra = 0;
  if (std::sscanf(spec.c_str(), "%lf:%lf:%d%c", &g.lo, &g.hi, &g.count, &extra) != 3 ||
      g.count < 2 || !(g.lo < g.hi))
    throw InvalidInputError("--eta-grid expects min:max:count with min < max, count >= 2, or auto");
  return g;
}

Eigen::VectorXd parse_vector(const std::string& text, const char* what) {
  std::vector<double> vals;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t next = text.find(',', pos);
    if (next == std::string::npos) next = text.size();
    const std::string cell = text.substr(pos, next - pos);
    char* end = nullptr;
    const double v = std::strtod(cell.c_str(), &end);
    if (end == cell.c_str())
      throw InvalidInputError(std::string(what) + ": cannot parse '" + cell + "'");
    vals.push_back(v);
    pos = next + 1;
  }
  if (vals.empty()) throw InvalidInputError(std::string(what) + ": empty vector");
  return Eigen::Map<Eigen::VectorXd>(vals.data(), static_cast<Eigen::Index>(vals.size()));
}

Eigen::MatrixXd eta_grid_for(const SampledFunction& f, const EtaGridSpec& spec) {
  if (spec.automatic) return auto_eta_grid(f);
  if (f.dim() != 1)
    throw InvalidInputError("min:max:count dual grids are 1-D; use --eta-grid auto for n >= 2");
  Eigen::MatrixXd m(spec.count, 1);
  m.col(0) = Eigen::VectorXd::LinSpaced(spec.count, spec.lo, spec.hi);
  return m;
}

void plot_curve_svg(const std::string& path, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                    const std::string& color = "#1f77b4") {
  SvgPlot plot;
  plot.add_polyline(std::vector<double>(x.data(), x.data() + x.size()),
                    std::vector<double>(y.data(), y.data() + y.size()), color, 1.8);
  plot.write(path);
}

int cmd_conjugate(const std::string& input, const std::string& output, const std::string& grid_spec,
                  bool fast, const std::string& biconj_path, const std::string& fygap_path,
                  const std::string& svg_path) {
  const SampledFunction f = io::read_sampled_function_csv(input);
  const Eigen::MatrixXd eta = eta_grid_for(f, parse_eta_grid(grid_spec));

  ConjugateResult conj;
  if (fast) {
    if (f.dim() != 1) throw InvalidInputError("--fast requires 1-D data");
    conj = conjugate_fast_1d(f, Eigen::VectorXd(eta.col(0)));
  } else {
    conj = conjugate_bruteforce(f, eta);
  }
  io::write_sampled_function_csv(output, conj.dual, "eta");

  if (!biconj_path.empty()) io::write_sampled_function_csv(biconj_path, biconjugate(f));
  if (!fygap_path.empty()) {
    const ConjugatePair pair{f, conj.dual};
    const Eigen::MatrixXd gap = fenchel_young_gap_matrix(pair);
    std::string text;
    const Eigen::Index n = f.dim();
    for (Eigen::Index d = 0; d < n; ++d) text += "theta_" + std::to_string(d + 1) + ",";
    for (Eigen::Index d = 0; d < n; ++d) text += "eta_" + std::to_string(d + 1) + ",";
    text += "gap\n";
    char buf[40];
    for (Eigen::Index i = 0; i < gap.rows(); ++i) {
      if (f.is_infinite(i)) continue;
      for (Eigen::Index j = 0; j < gap.cols(); ++j) {
        for (Eigen::Index d = 0; d < n; ++d) {
          std::snprintf(buf, sizeof(buf), "%.17g,", f.points(i, d));
          text += buf;
        }
        for (Eigen::Index d = 0; d < n; ++d) {
          std::snprintf(buf, sizeof(buf), "%.17g,", conj.dual.points(j, d));
          text += buf;
        }
        std::snprintf(buf, sizeof(buf), "%.17g\n", gap(i, j));
        text += buf;
      }
    }
    io::write_text_atomic(fygap_path, text);
  }
  if (!svg_path.empty() && f.dim() == 1)
    plot_curve_svg(svg_path, conj.dual.points.col(0), conj.dual.values);
  return kExitOk;
}

int cmd_polar(const std::string& input, const std::string& output, const std::string& cost_path,
              const std::string& svg_path, double tol, bool strict) {
  ConvexBody body;
  if (input.size() >= 4 && input.substr(input.size() - 4) == ".csv") {
    body = epigraph_body(io::read_sampled_function_csv(input));
  } else {
    body = io::read_convex_body_json(input);
  }
  const CostMatrix cost =
      cost_path.empty() ? CostMatrix::legendre(body.n) : io::read_cost_matrix_json(cost_path);
  double rank_tol = tol > 0 ? tol : kEnvelopeRankTol;
  if (strict) rank_tol /= 2.0;
  const EnvelopeResult env = polar_boundary_envelope(cost, body, rank_tol);
  io::write_envelope_csv(output, env);

  if (!svg_path.empty() && body.n == 1) {
    std::vector<double> xs, ys;
    for (Eigen::Index i = 0; i < env.size(); ++i) {
      if (!env.finite(i)) continue;
      const Eigen::VectorXd p = dehomogenize(env.lifts.row(i).transpose());
      xs.push_back(p[0]);
      ys.push_back(p[1]);
    }
    SvgPlot plot;
    plot.add_polyline(xs, ys, "#d62728", 1.8);
    plot.write(svg_path);
  }
  return kExitOk;
}

int cmd_decompose(const std::string& cost_path, const std::string& output) {
  const CostMatrix cost = io::read_cost_matrix_json(cost_path);
  const AffineDeformation mt = decompose_T(cost);
  const AffineDeformation ms = decompose_S(cost);
  const std::string report = io::decomposition_report_json(
      mt, ms, decomposition_residuals(cost, mt, ms), relate_T_S(mt, ms));
  if (output.empty())
    std::cout << report;
  else
    io::write_text_atomic(output, report);
  return kExitOk;
}

int cmd_divergence(const std::string& input, const std::string& output, const std::string& point_a,
                   const std::string& point_b, const std::string& theta1,
                   const std::string& theta2, const std::string& variant) {
  DivergenceReport report;
  if (!point_a.empty() || !point_b.empty()) {
    if (point_a.empty() || point_b.empty())
      throw InvalidInputError("divergence needs both --point-a and --point-b");
    report = divergence_report(io::parse_point_json(point_a), io::parse_point_json(point_b));
  } else {
    if (input.empty() || theta1.empty() || theta2.empty())
      throw InvalidInputError(
          "divergence needs --input with --theta1/--theta2, or --point-a/--point-b");
    const SampledFunction f = io::read_sampled_function_csv(input);
    report = divergence_report(f, parse_vector(theta1, "--theta1"), parse_vector(theta2, "--theta2"));
  }
  const std::string text = io::divergence_report_json(report);
  if (output.empty())
    std::cout << text;
  else
    io::write_text_atomic(output, text);
  std::cerr << "total (" << variant << " variant): "
            << (variant == "paper" ? report.total_paper : report.total_sqrt) << "\n";
  return kExitOk;
}

int cmd_ctransform(const std::string& input, const std::string& output, const std::string& cost_path,
                   const std::string& grid_spec, const std::string& svg_path) {
  const SampledFunction f = io::read_sampled_function_csv(input);
  QuadraticCost cost;
  if (cost_path.empty()) {
    cost.Cn = Eigen::MatrixXd::Zero(f.dim(), f.dim());
    cost.e = -1.0;  // plain coupling, the transform that mirrors conjugation
  } else {
    cost = io::read_quadratic_cost_json(cost_path);
  }
  const Eigen::MatrixXd eta = eta_grid_for(f, parse_eta_grid(grid_spec));
  const CTransformResult ct = c_transform(f, cost, eta);
  io::write_sampled_function_csv(output, ct.values, "eta");
  if (!svg_path.empty() && f.dim() == 1)
    plot_curve_svg(svg_path, ct.values.points.col(0), ct.values.values);
  return kExitOk;
}

int demo_self_dual_parabola(const std::string& output, double threshold) {
  const Eigen::MatrixXd theta = Eigen::VectorXd::LinSpaced(200, -2.0, 2.0);
  const double disc = verify_legendre_polarity<double>(
      [](const Eigen::VectorXd& t) { return 0.5 * t.squaredNorm(); },
      [](const Eigen::VectorXd& t) { return t; }, theta);
  std::cout << "self-dual-parabola: max |envelope - conjugate| = " << disc << " (threshold "
            << threshold << ")\n";
  if (!output.empty()) {
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "{\n  \"demo\": \"self-dual-parabola\",\n  \"discrepancy\": %.17g,\n  "
                  "\"threshold\": %.17g\n}\n",
                  disc, threshold);
    io::write_text_atomic(output, buf);
  }
  return disc <= threshold ? kExitOk : kExitAssertion;
}

int demo_parabola_to_circle(const std::string& output, const std::string& svg_path, int samples,
                            double threshold) {
  const double s = 1.0 / std::sqrt(2.0);
  Eigen::MatrixXd cm(3, 3);
  cm << 1, 0, 0, 0, s, s, 0, -s, s;
  const CostMatrix cost(cm);

  const Eigen::VectorXd theta = Eigen::VectorXd::LinSpaced(samples, -4.0, 4.0);
  Eigen::VectorXd values(samples), grads(samples);
  for (int i = 0; i < samples; ++i) {
    values[i] = 0.5 * theta[i] * theta[i];
    grads[i] = theta[i];
  }
  const ConvexBody body = epigraph_body(make_sampled_function_1d<double>(theta, values, grads));
  const EnvelopeResult env = polar_boundary_envelope(cost, body);

  double worst = 0.0;
  std::vector<double> xs, ys;
  std::string csv = "x_1,x_2,circle_residual\n";
  char buf[120];
  for (Eigen::Index i = 0; i < env.size(); ++i) {
    if (!env.finite(i)) continue;
    const Eigen::VectorXd b = env.point(i).coords();  // normalized, last = 1
    const double residual = b[0] * b[0] + b[1] * b[1] - b[2] * b[2];
    worst = std::max(worst, std::abs(residual));
    xs.push_back(b[0]);
    ys.push_back(b[1]);
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", b[0], b[1], residual);
    csv += buf;
  }
  std::cout << "parabola-to-circle: max ||x|^2 + y^2 - lambda^2| = " << worst << " (threshold "
            << threshold << ", " << xs.size() << " image points)\n";
  if (!output.empty()) io::write_text_atomic(output, csv);
  if (!svg_path.empty()) {
    SvgPlot plot;
    plot.add_polyline(xs, ys, "#2ca02c", 1.8);
    plot.write(svg_path);
  }
  return worst <= threshold ? kExitOk : kExitAssertion;
}

int demo_fig2_envelope(const std::string& output, const std::string& svg_path, int samples,
                       double threshold) {
  const Eigen::VectorXd theta = Eigen::VectorXd::LinSpaced(samples, -2.0, 2.0);
  Eigen::VectorXd values(samples), grads(samples);
  for (int i = 0; i < samples; ++i) {
    values[i] = theta[i] * theta[i] + theta[i] + 3.0;
    grads[i] = 2.0 * theta[i] + 1.0;
  }
  const ConvexBody body = epigraph_body(make_sampled_function_1d<double>(theta, values, grads));
  const EnvelopeResult env = polar_boundary_envelope(CostMatrix::legendre(1), body);

  double worst = 0.0;
  std::vector<double> ex, ey;
  std::string csv = "eta_1,value\n";
  char buf[90];
  for (Eigen::Index i = 0; i < env.size(); ++i) {
    if (!env.finite(i)) continue;
    const Eigen::VectorXd p = dehomogenize(env.lifts.row(i).transpose());
    const double closed_form = 0.25 * (p[0] * p[0] - 2.0 * p[0] - 11.0);
    worst = std::max(worst, std::abs(p[1] - closed_form));
    ex.push_back(p[0]);
    ey.push_back(p[1]);
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", p[0], p[1]);
    csv += buf;
  }
  std::cout << "fig2-envelope: max |envelope - closed form| = " << worst << " (threshold "
            << threshold << ")\n";
  if (!output.empty()) io::write_text_atomic(output, csv);
  if (!svg_path.empty()) {
    SvgPlot plot;
    // the family of polar lines y = theta*eta - F(theta) whose envelope is
    // the conjugate graph
    const double lo = ex.empty() ? -3.0 : *std::min_element(ex.begin(), ex.end());
    const double hi = ex.empty() ? 5.0 : *std::max_element(ex.begin(), ex.end());
    for (int i = 0; i < samples; i += std::max(1, samples / 24)) {
      const double th = theta[i];
      const double fv = th * th + th + 3.0;
      plot.add_polyline({lo, hi}, {th * lo - fv, th * hi - fv}, "#9ecae1", 0.8);
    }
    plot.add_polyline(ex, ey, "#d62728", 2.0);
    plot.write(svg_path);
  }
  return worst <= threshold ? kExitOk : kExitAssertion;
}

int cmd_demo(const std::string& name, const std::string& output, const std::string& svg_path,
             int samples, double tol, bool strict) {
  double threshold = tol > 0 ? tol : 1e-9;
  if (strict) threshold /= 2.0;
  if (name == "self-dual-parabola") return demo_self_dual_parabola(output, threshold);
  if (name == "parabola-to-circle")
    return demo_parabola_to_circle(output, svg_path, samples, threshold);
  if (name == "fig2-envelope") return demo_fig2_envelope(output, svg_path, samples, threshold);
  throw InvalidInputError("unknown demo '" + name +
                          "'; expected self-dual-parabola, parabola-to-circle or fig2-envelope");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical convex-duality toolkit: quadratic polarities, Legendre-Fenchel "
               "transforms, polar divergences and quadratic-cost c-transforms"};
  app.require_subcommand(1);
  app.set_config("--config");

  std::string input, output, cost_matrix, eta_grid = "auto", svg;
  std::string biconj, fygap;
  std::string point_a, point_b, theta1, theta2;
  std::string variant = "sqrt", demo_name;
  double tol = 0.0;
  bool fast = false, strict = false;
  int samples = 400;

  auto* conj = app.add_subcommand("conjugate", "Legendre-Fenchel transform of a sampled function");
  conj->add_option("--input", input, "SampledFunction CSV")->required();
  conj->add_option("--output", output, "conjugate CSV")->required();
  conj->add_option("--eta-grid", eta_grid, "dual grid: min:max:count or auto");
  conj->add_flag("--fast", fast, "linear-time transform (1-D, sorted grids)");
  conj->add_option("--biconjugate", biconj, "also write the biconjugate CSV here");
  conj->add_option("--fy-gap", fygap, "also write the Fenchel-Young gap table here");
  conj->add_option("--svg", svg, "plot the conjugate as SVG");

  auto* polar = app.add_subcommand("polar", "boundary of the polar set via the hyperplane envelope");
  polar->add_option("--input", input, "ConvexBody JSON or SampledFunction CSV (epigraph)")
      ->required();
  polar->add_option("--output", output, "envelope CSV")->required();
  polar->add_option("--cost-matrix", cost_matrix, "CostMatrix JSON (default: Legendre)");
  polar->add_option("--svg", svg, "plot the polar boundary as SVG");
  polar->add_option("--tol", tol, "rank threshold for degenerate samples (default 1e-8)");
  polar->add_flag("--strict", strict, "halve the rank threshold");

  auto* dec = app.add_subcommand("decompose", "T/S decompositions of a quadratic polarity");
  dec->add_option("--cost-matrix", cost_matrix, "CostMatrix JSON")->required();
  dec->add_option("--output", output, "report JSON (stdout when omitted)");

  auto* div = app.add_subcommand("divergence", "divergence report for a dual point pair");
  div->add_option("--input", input, "SampledFunction CSV (with --theta1/--theta2)");
  div->add_option("--theta1", theta1, "primal parameter, comma separated");
  div->add_option("--theta2", theta2, "second primal parameter, comma separated");
  div->add_option("--point-a", point_a, "homogeneous point JSON array");
  div->add_option("--point-b", point_b, "homogeneous point JSON array");
  div->add_option("--output", output, "report JSON (stdout when omitted)");
  div->add_option("--variant", variant, "total divergence variant: sqrt|paper")
      ->check(CLI::IsMember({"sqrt", "paper"}));

  auto* ct = app.add_subcommand("ctransform", "quadratic-cost c-transform");
  ct->add_option("--input", input, "SampledFunction CSV")->required();
  ct->add_option("--output", output, "c-transform CSV")->required();
  ct->add_option("--cost", cost_matrix, "QuadraticCost JSON (default: c = -<theta, eta>)");
  ct->add_option("--eta-grid", eta_grid, "dual grid: min:max:count or auto");
  ct->add_option("--svg", svg, "plot the transform as SVG");

  auto* demo = app.add_subcommand("demo", "built-in demo scenarios");
  demo->add_option("--demo", demo_name, "self-dual-parabola | parabola-to-circle | fig2-envelope")
      ->required();
  demo->add_option("--output", output, "demo CSV/JSON output");
  demo->add_option("--svg", svg, "demo SVG output");
  demo->add_option("--samples", samples, "boundary sample count");
  demo->add_option("--tol", tol, "assertion threshold (default 1e-9)");
  demo->add_flag("--strict", strict, "halve the assertion threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitInput;
  }

  try {
    if (conj->parsed()) return cmd_conjugate(input, output, eta_grid, fast, biconj, fygap, svg);
    if (polar->parsed()) return cmd_polar(input, output, cost_matrix, svg, tol, strict);
    if (dec->parsed()) return cmd_decompose(cost_matrix, output);
    if (div->parsed())
      return cmd_divergence(input, output, point_a, point_b, theta1, theta2, variant);
    if (ct->parsed()) return cmd_ctransform(input, output, cost_matrix, eta_grid, svg);
    if (demo->parsed()) return cmd_demo(demo_name, output, svg, samples, tol, strict);
  } catch (const InvalidInputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const OutOfGridError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const DimensionMismatchError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const IdealPointError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitInput;
}
