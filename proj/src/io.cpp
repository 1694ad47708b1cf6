#include "cvxpolar/io.hpp"

#include <unistd.h>

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

#include "json.hpp"

namespace cvxpolar::io {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(trim(cur));
  return out;
}

double parse_double(const std::string& s, std::size_t line_no) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw InvalidInputError("CSV line " + std::to_string(line_no) + ": cannot parse number '" + s + "'");
  return v;
}

ordered_json parse_json(const std::string& text, const char* what) {
  ordered_json j = ordered_json::parse(text, nullptr, false);
  if (j.is_discarded()) throw InvalidInputError(std::string(what) + ": malformed JSON");
  return j;
}

Eigen::VectorXd vector_from_json(const ordered_json& j, const char* what) {
  if (!j.is_array()) throw InvalidInputError(std::string(what) + ": expected an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number())
      throw InvalidInputError(std::string(what) + ": expected numbers");
    v[i] = j[static_cast<std::size_t>(i)].get<double>();
  }
  return v;
}

Eigen::MatrixXd matrix_from_row_arrays(const ordered_json& j, const char* what) {
  if (!j.is_array() || j.empty())
    throw InvalidInputError(std::string(what) + ": expected an array of rows");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Eigen::VectorXd first = vector_from_json(j[0], what);
  Eigen::MatrixXd m(rows, first.size());
  m.row(0) = first.transpose();
  for (Eigen::Index i = 1; i < rows; ++i) {
    Eigen::VectorXd r = vector_from_json(j[static_cast<std::size_t>(i)], what);
    if (r.size() != m.cols()) throw InvalidInputError(std::string(what) + ": ragged rows");
    m.row(i) = r.transpose();
  }
  return m;
}

ordered_json json_from_vector(const Eigen::VectorXd& v) {
  ordered_json j = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

ordered_json json_from_matrix_rows(const Eigen::MatrixXd& m) {
  ordered_json j = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) j.push_back(json_from_vector(m.row(i).transpose()));
  return j;
}

ordered_json json_row_major(const Eigen::MatrixXd& m) {
  ordered_json j = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) j.push_back(m(i, k));
  return j;
}

}  // namespace

void write_text_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path dir = target.has_parent_path() ? target.parent_path() : fs::path(".");
  fs::path tmp = dir / (target.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInputError("cannot open '" + tmp.string() + "' for writing");
    out << content;
    if (!out.flush()) throw InvalidInputError("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, target);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SampledFunction parse_sampled_function_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;

  // header
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    header = split_csv_line(line);
    break;
  }
  if (header.empty()) throw InvalidInputError("CSV: empty input");

  Eigen::Index n = 0;
  std::vector<int> coord_col, grad_col;
  int value_col = -1, infinite_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    auto numbered = [&](const std::string& prefix) -> int {
      if (name.rfind(prefix, 0) != 0) return -1;
      const std::string tail = name.substr(prefix.size());
      if (tail.empty()) return -1;
      for (char ch : tail)
        if (!std::isdigit(static_cast<unsigned char>(ch))) return -1;
      return std::atoi(tail.c_str());
    };
    int k;
    if ((k = numbered("theta_")) > 0 || (k = numbered("eta_")) > 0) {
      coord_col.resize(std::max<std::size_t>(coord_col.size(), static_cast<std::size_t>(k)), -1);
      coord_col[static_cast<std::size_t>(k - 1)] = static_cast<int>(c);
    } else if ((k = numbered("grad_")) > 0) {
      grad_col.resize(std::max<std::size_t>(grad_col.size(), static_cast<std::size_t>(k)), -1);
      grad_col[static_cast<std::size_t>(k - 1)] = static_cast<int>(c);
    } else if (name == "value") {
      value_col = static_cast<int>(c);
    } else if (name == "infinite") {
      infinite_col = static_cast<int>(c);
    } else {
      throw InvalidInputError("CSV: unrecognized column '" + name + "'");
    }
  }
  n = static_cast<Eigen::Index>(coord_col.size());
  if (n == 0 || value_col < 0)
    throw InvalidInputError("CSV: need theta_*/eta_* coordinate columns and a value column");
  for (int c : coord_col)
    if (c < 0) throw InvalidInputError("CSV: coordinate columns must be numbered 1..n");
  const bool with_grads = !grad_col.empty();
  if (with_grads && static_cast<Eigen::Index>(grad_col.size()) != n)
    throw InvalidInputError("CSV: grad_* columns must match the coordinate count");

  std::vector<std::vector<double>> rows;
  std::vector<bool> inf_rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw InvalidInputError("CSV line " + std::to_string(line_no) + ": wrong cell count");
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) row[c] = parse_double(cells[c], line_no);
    rows.push_back(std::move(row));
    inf_rows.push_back(infinite_col >= 0 && rows.back()[static_cast<std::size_t>(infinite_col)] != 0.0);
  }
  if (rows.empty()) throw InvalidInputError("CSV: no data rows");

  const Eigen::Index count = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd points(count, n);
  Eigen::VectorXd values(count);
  Eigen::MatrixXd grads;
  if (with_grads) grads.resize(count, n);
  bool any_inf = false;
  Eigen::Array<bool, Eigen::Dynamic, 1> mask(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    for (Eigen::Index d = 0; d < n; ++d)
      points(i, d) = row[static_cast<std::size_t>(coord_col[static_cast<std::size_t>(d)])];
    double v = row[static_cast<std::size_t>(value_col)];
    bool is_inf = inf_rows[static_cast<std::size_t>(i)] || std::isinf(v);
    if (is_inf) v = std::numeric_limits<double>::infinity();
    values[i] = v;
    mask[i] = is_inf;
    any_inf = any_inf || is_inf;
    if (with_grads)
      for (Eigen::Index d = 0; d < n; ++d)
        grads(i, d) = row[static_cast<std::size_t>(grad_col[static_cast<std::size_t>(d)])];
  }
  return make_sampled_function<double>(std::move(points), std::move(values), std::move(grads),
                                       any_inf ? std::move(mask)
                                               : Eigen::Array<bool, Eigen::Dynamic, 1>());
}

SampledFunction read_sampled_function_csv(const std::string& path) {
  try {
    return parse_sampled_function_csv(read_text(path));
  } catch (const InvalidInputError& e) {
    throw InvalidInputError(path + ": " + e.what());
  }
}

std::string sampled_function_csv(const SampledFunction& f, const std::string& prefix) {
  std::ostringstream out;
  const Eigen::Index n = f.dim();
  for (Eigen::Index d = 0; d < n; ++d) out << prefix << "_" << (d + 1) << ",";
  out << "value";
  if (f.has_gradients())
    for (Eigen::Index d = 0; d < n; ++d) out << ",grad_" << (d + 1);
  if (f.has_mask()) out << ",infinite";
  out << "\n";
  for (Eigen::Index i = 0; i < f.size(); ++i) {
    for (Eigen::Index d = 0; d < n; ++d) out << format_double(f.points(i, d)) << ",";
    out << format_double(f.values[i]);
    if (f.has_gradients())
      for (Eigen::Index d = 0; d < n; ++d) out << "," << format_double(f.gradients(i, d));
    if (f.has_mask()) out << "," << (f.infinite[i] ? 1 : 0);
    out << "\n";
  }
  return out.str();
}

void write_sampled_function_csv(const std::string& path, const SampledFunction& f,
                                const std::string& prefix) {
  write_text_atomic(path, sampled_function_csv(f, prefix));
}

std::string envelope_csv(const EnvelopeResult& env) {
  std::ostringstream out;
  const Eigen::Index m = env.lifts.cols();
  for (Eigen::Index d = 0; d + 1 < m; ++d) out << "x_" << (d + 1) << ",";
  out << "degenerate\n";
  for (Eigen::Index i = 0; i < env.size(); ++i) {
    const EnvelopeFlag flag = env.flags[static_cast<std::size_t>(i)];
    int code = 0;
    bool finite = true;
    switch (flag) {
      case EnvelopeFlag::Ok: code = 0; break;
      case EnvelopeFlag::RankDeficient: code = 1; finite = false; break;
      case EnvelopeFlag::Ideal: code = 2; finite = false; break;
      case EnvelopeFlag::Collapsed: code = 3; break;
    }
    if (finite) {
      const Eigen::VectorXd x = dehomogenize(env.lifts.row(i).transpose());
      for (Eigen::Index d = 0; d < x.size(); ++d) out << format_double(x[d]) << ",";
    } else {
      for (Eigen::Index d = 0; d + 1 < m; ++d) out << "nan,";
    }
    out << code << "\n";
  }
  return out.str();
}

void write_envelope_csv(const std::string& path, const EnvelopeResult& env) {
  write_text_atomic(path, envelope_csv(env));
}

CostMatrix parse_cost_matrix_json(const std::string& text) {
  const ordered_json j = parse_json(text, "cost matrix");
  if (!j.contains("n") || !j.contains("C"))
    throw InvalidInputError("cost matrix JSON needs fields n and C");
  const Eigen::Index n = j["n"].get<Eigen::Index>();
  if (n < 0) throw InvalidInputError("cost matrix JSON: n must be nonnegative");
  const Eigen::VectorXd flat = vector_from_json(j["C"], "cost matrix C");
  if (flat.size() != (n + 2) * (n + 2))
    throw InvalidInputError("cost matrix JSON: C must hold (n+2)^2 row-major entries");
  Eigen::MatrixXd c(n + 2, n + 2);
  for (Eigen::Index i = 0; i < n + 2; ++i)
    for (Eigen::Index k = 0; k < n + 2; ++k) c(i, k) = flat[i * (n + 2) + k];
  return CostMatrix(std::move(c));
}

CostMatrix read_cost_matrix_json(const std::string& path) {
  try {
    return parse_cost_matrix_json(read_text(path));
  } catch (const InvalidInputError& e) {
    throw InvalidInputError(path + ": " + e.what());
  }
}

std::string cost_matrix_json(const CostMatrix& c) {
  ordered_json j;
  j["n"] = c.dim();
  j["C"] = json_row_major(c.matrix());
  return j.dump(2) + "\n";
}

ConvexBody parse_convex_body_json(const std::string& text) {
  const ordered_json j = parse_json(text, "convex body");
  if (!j.contains("n") || !j.contains("samples") || !j.contains("tangents"))
    throw InvalidInputError("convex body JSON needs fields n, samples and tangents");
  const Eigen::Index n = j["n"].get<Eigen::Index>();
  Eigen::MatrixXd samples = matrix_from_row_arrays(j["samples"], "body samples");
  if (samples.cols() != n + 2)
    throw InvalidInputError("convex body JSON: samples must have n+2 coordinates");
  const ordered_json& jt = j["tangents"];
  if (!jt.is_array() || static_cast<Eigen::Index>(jt.size()) != samples.rows())
    throw InvalidInputError("convex body JSON: one tangent list per sample required");
  std::vector<Eigen::MatrixXd> tangents(jt.size());
  for (std::size_t i = 0; i < jt.size(); ++i) {
    const Eigen::MatrixXd rows = matrix_from_row_arrays(jt[i], "body tangents");
    if (rows.rows() != n || rows.cols() != n + 2)
      throw InvalidInputError("convex body JSON: each sample needs n tangent vectors of length n+2");
    tangents[i] = rows.transpose();
  }
  const bool closed = j.value("closed", false);
  return make_convex_body<double>(n, std::move(samples), std::move(tangents), closed);
}

ConvexBody read_convex_body_json(const std::string& path) {
  try {
    return parse_convex_body_json(read_text(path));
  } catch (const InvalidInputError& e) {
    throw InvalidInputError(path + ": " + e.what());
  }
}

std::string convex_body_json(const ConvexBody& body) {
  ordered_json j;
  j["n"] = body.n;
  ordered_json samples = ordered_json::array();
  for (Eigen::Index i = 0; i < body.size(); ++i) {
    const ProjectivePoint p{Eigen::VectorXd(body.samples.row(i).transpose())};
    samples.push_back(json_from_vector(p.normalized().coords()));
  }
  j["samples"] = std::move(samples);
  ordered_json tangents = ordered_json::array();
  for (const auto& t : body.tangents) tangents.push_back(json_from_matrix_rows(t.transpose()));
  j["tangents"] = std::move(tangents);
  j["closed"] = body.closed;
  return j.dump(2) + "\n";
}

QuadraticCost parse_quadratic_cost_json(const std::string& text) {
  const ordered_json j = parse_json(text, "quadratic cost");
  if (!j.contains("Cn")) throw InvalidInputError("quadratic cost JSON needs field Cn");
  QuadraticCost cost;
  cost.Cn = matrix_from_row_arrays(j["Cn"], "quadratic cost Cn");
  cost.d = j.value("d", 0.0);
  cost.e = j.value("e", 0.0);
  if (j.contains("f_coef")) cost.f_coef = vector_from_json(j["f_coef"], "quadratic cost f_coef");
  if (j.contains("g_coef")) cost.g_coef = vector_from_json(j["g_coef"], "quadratic cost g_coef");
  cost.h = j.value("h", 0.0);
  validate_quadratic_cost(cost);
  return cost;
}

QuadraticCost read_quadratic_cost_json(const std::string& path) {
  try {
    return parse_quadratic_cost_json(read_text(path));
  } catch (const InvalidInputError& e) {
    throw InvalidInputError(path + ": " + e.what());
  }
}

std::string quadratic_cost_json(const QuadraticCost& cost) {
  ordered_json j;
  j["Cn"] = json_from_matrix_rows(cost.Cn);
  j["d"] = cost.d;
  j["e"] = cost.e;
  j["f_coef"] = cost.f_coef.size() ? json_from_vector(cost.f_coef) : ordered_json::array();
  j["g_coef"] = cost.g_coef.size() ? json_from_vector(cost.g_coef) : ordered_json::array();
  j["h"] = cost.h;
  return j.dump(2) + "\n";
}

DualSideParams parse_dual_side_params_json(const std::string& text) {
  const ordered_json j = parse_json(text, "dual-side params");
  DualSideParams p;
  p.mu = j.value("mu", 1.0);
  if (!j.contains("E")) throw InvalidInputError("dual-side params JSON needs field E");
  p.E = matrix_from_row_arrays(j["E"], "dual-side E");
  p.f = j.contains("f") ? vector_from_json(j["f"], "dual-side f")
                        : Eigen::VectorXd::Zero(p.E.rows()).eval();
  p.g = j.contains("g") ? vector_from_json(j["g"], "dual-side g")
                        : Eigen::VectorXd::Zero(p.E.rows()).eval();
  p.h = j.value("h", 0.0);
  return p;
}

std::string dual_side_params_json(const DualSideParams& p) {
  ordered_json j;
  j["mu"] = p.mu;
  j["E"] = json_from_matrix_rows(p.E);
  j["f"] = json_from_vector(p.f);
  j["g"] = json_from_vector(p.g);
  j["h"] = p.h;
  return j.dump(2) + "\n";
}

PrimalSideParams parse_primal_side_params_json(const std::string& text) {
  const ordered_json j = parse_json(text, "primal-side params");
  PrimalSideParams p;
  p.mu = j.value("mu", 1.0);
  if (!j.contains("A")) throw InvalidInputError("primal-side params JSON needs field A");
  p.A = matrix_from_row_arrays(j["A"], "primal-side A");
  p.b = j.contains("b") ? vector_from_json(j["b"], "primal-side b")
                        : Eigen::VectorXd::Zero(p.A.rows()).eval();
  p.c = j.contains("c") ? vector_from_json(j["c"], "primal-side c")
                        : Eigen::VectorXd::Zero(p.A.rows()).eval();
  p.d = j.value("d", 0.0);
  return p;
}

std::string primal_side_params_json(const PrimalSideParams& p) {
  ordered_json j;
  j["mu"] = p.mu;
  j["A"] = json_from_matrix_rows(p.A);
  j["b"] = json_from_vector(p.b);
  j["c"] = json_from_vector(p.c);
  j["d"] = p.d;
  return j.dump(2) + "\n";
}

ProjectivePoint parse_point_json(const std::string& text) {
  const ordered_json j = parse_json(text, "projective point");
  return ProjectivePoint(vector_from_json(j, "projective point"));
}

std::string point_json(const ProjectivePoint& p) {
  return json_from_vector(p.normalized().coords()).dump() + "\n";
}

std::string divergence_report_json(const DivergenceReport& report) {
  ordered_json j;
  j["fy"] = report.fy;
  if (report.bregman.has_value())
    j["bregman"] = *report.bregman;
  else
    j["bregman"] = nullptr;
  j["polar_fy"] = report.polar_fy;
  j["total_sqrt"] = report.total_sqrt;
  j["total_paper"] = report.total_paper;
  j["kappa_b"] = report.kappa_b;
  j["kappa_star_a"] = report.kappa_star_a;
  return j.dump(2) + "\n";
}

std::string decomposition_report_json(const AffineDeformation& mt, const AffineDeformation& ms,
                                      const DecompositionResiduals<double>& identities,
                                      const std::pair<double, double>& relate) {
  ordered_json j;
  j["n"] = mt.matrix.rows() - 2;
  j["M_T"] = json_row_major(mt.matrix);
  j["M_S"] = json_row_major(ms.matrix);
  ordered_json res;
  res["identity_T"] = identities.identity_T;
  res["identity_S"] = identities.identity_S;
  res["relate_T"] = relate.first;
  res["relate_S"] = relate.second;
  j["residuals"] = std::move(res);
  return j.dump(2) + "\n";
}

}  // namespace cvxpolar::io
