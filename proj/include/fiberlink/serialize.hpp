#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "fiberlink/linalg.hpp"
#include "fiberlink/quantum.hpp"

namespace fiberlink::serialize {

/// Matrix text form: {"dim": n, "basis": [...], "entries": [[re, im], ...]},
/// entries row-major, every number printed with 17 significant digits.
std::string matrix_to_text(const CMatrix& m, const std::vector<std::string>& basis);

/// Accepts the text form above (basis optional).
CMatrix matrix_from_json(const nlohmann::json& j);

std::vector<std::string> state_basis(int dim);
std::vector<std::string> pauli_basis();

std::string density_to_text(const DensityMatrix& rho);
DensityMatrix density_from_json(const nlohmann::json& j);

/// Embeds a matrix into a JSON document (same layout, nlohmann number output).
nlohmann::json matrix_to_json(const CMatrix& m, const std::vector<std::string>& basis);

/// "%.17g"
std::string format_double(double v);

}  // namespace fiberlink::serialize
