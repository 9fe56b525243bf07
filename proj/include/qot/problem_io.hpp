#pragma once

// JSON problem files and reports. Matrices are nested arrays of [re, im]
// pairs, row-major.

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "qot/dual.hpp"
#include "qot/functionals.hpp"
#include "qot/primal.hpp"

namespace qot {

using Json = nlohmann::ordered_json;

/// Throws ParseError on anything that is not an n x n array of [re, im] pairs.
Matrix matrix_from_json(const Json& j, Index n, const std::string& what);
Json matrix_to_json(const Matrix& m);

struct LoadedProblem {
  TransportProblem problem;
  Json config;                   // resolved configuration with defaults materialized
  std::vector<std::string> notices;
};

/// Parses a problem document. Structural/format problems raise ParseError;
/// jump sets are not validated here.
LoadedProblem parse_problem(const Json& doc);
LoadedProblem load_problem(const std::string& path);

/// Re-resolves `config` after command-line overrides.
LoadedProblem reload(const Json& config);

Json validation_to_json(const ValidationReport& r);
Json primal_to_json(const PrimalSolution& s);
Json dual_to_json(const DualSolution& s);
Json functionals_to_json(const FunctionalReport& r);

/// Rows: t, then re/im of every entry of rho (row-major), then the action
/// density of the interval starting at t (empty on the last row).
void write_rho_csv(std::ostream& out, const PrimalSolution& s);
/// Rows: t, then re/im of every entry of the node potential, then the
/// interval violation and re/im of the witness density (empty on the last row).
void write_potential_csv(std::ostream& out, const DualSolution& s, int grid_n);

}  // namespace qot
