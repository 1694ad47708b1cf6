// CSV and JSON (de)serialization for the double-precision toolkit types.
// JSON objects keep insertion order so emitted files are stable.
#pragma once

#include <string>
#include <utility>

#include "cvxpolar/ctransform.hpp"
#include "cvxpolar/divergences.hpp"
#include "cvxpolar/legendre.hpp"
#include "cvxpolar/polarity.hpp"
#include "cvxpolar/projective.hpp"
#include "cvxpolar/transforms.hpp"

namespace cvxpolar::io {

/// Writes content to path via a temporary file in the same directory plus
/// rename, so readers never observe partial files.
void write_text_atomic(const std::string& path, const std::string& content);

std::string read_text(const std::string& path);

// SampledFunction CSV: columns <prefix>_1..<prefix>_n, value, optional
// grad_1..grad_n, optional infinite (0/1).  The reader accepts both theta_*
// and eta_* coordinate prefixes; +inf values mark masked nodes.
SampledFunction parse_sampled_function_csv(const std::string& text);
SampledFunction read_sampled_function_csv(const std::string& path);
std::string sampled_function_csv(const SampledFunction& f, const std::string& prefix = "theta");
void write_sampled_function_csv(const std::string& path, const SampledFunction& f,
                                const std::string& prefix = "theta");

// Envelope CSV: one row per input sample with dehomogenized coordinates
// x_1..x_{n+1} plus a degenerate flag column
// (0 ok, 1 rank-deficient, 2 ideal/recession, 3 collapsed duplicate);
// rows without finite coordinates carry nan.
std::string envelope_csv(const EnvelopeResult& env);
void write_envelope_csv(const std::string& path, const EnvelopeResult& env);

// CostMatrix JSON: {"n": int, "C": row-major array of (n+2)^2 numbers}.
CostMatrix parse_cost_matrix_json(const std::string& text);
CostMatrix read_cost_matrix_json(const std::string& path);
std::string cost_matrix_json(const CostMatrix& c);

// ConvexBody JSON: {"n": int, "samples": [[n+2 coords]...],
// "tangents": [[[n+2 coords] x n]...], optional "closed": bool}.
// Points in files are stored normalized.
ConvexBody parse_convex_body_json(const std::string& text);
ConvexBody read_convex_body_json(const std::string& path);
std::string convex_body_json(const ConvexBody& body);

// QuadraticCost JSON with the named fields Cn, d, e, f_coef, g_coef, h.
QuadraticCost parse_quadratic_cost_json(const std::string& text);
QuadraticCost read_quadratic_cost_json(const std::string& path);
std::string quadratic_cost_json(const QuadraticCost& cost);

// Transform parameter JSON: {"mu", "E", "f", "g", "h"} and
// {"mu", "A", "b", "c", "d"}; matrices as row arrays.
DualSideParams parse_dual_side_params_json(const std::string& text);
std::string dual_side_params_json(const DualSideParams& p);
PrimalSideParams parse_primal_side_params_json(const std::string& text);
std::string primal_side_params_json(const PrimalSideParams& p);

// A bare JSON array of homogeneous coordinates.
ProjectivePoint parse_point_json(const std::string& text);
std::string point_json(const ProjectivePoint& p);

std::string divergence_report_json(const DivergenceReport& report);

std::string decomposition_report_json(const AffineDeformation& mt, const AffineDeformation& ms,
                                      const DecompositionResiduals<double>& identities,
                                      const std::pair<double, double>& relate);

}  // namespace cvxpolar::io
