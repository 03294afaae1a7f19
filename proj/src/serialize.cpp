#include "fiberlink/serialize.hpp"

#include <cstdio>
#include <sstream>

#include "fiberlink/error.hpp"

namespace fiberlink::serialize {

std::string format_double(double v) {
  // Normalize negative zero so equal matrices print identically.
  if (v == 0.0) v = 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> state_basis(int dim) {
  if (dim == 2) return {"H", "V"};
  if (dim == 4) return {"HH", "HV", "VH", "VV"};
  throw InvalidArgument("no basis labels for dimension " + std::to_string(dim));
}

std::vector<std::string> pauli_basis() { return {"I", "X", "Y", "Z"}; }

std::string matrix_to_text(const CMatrix& m, const std::vector<std::string>& basis) {
  std::ostringstream out;
  out << "{\"dim\": " << m.rows() << ", \"basis\": [";
  for (std::size_t i = 0; i < basis.size(); ++i) {
    out << (i ? ", " : "") << '"' << basis[i] << '"';
  }
  out << "], \"entries\": [";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out << ((i || j) ? ",\n  " : "\n  ") << '[' << format_double(m(i, j).real()) << ", "
          << format_double(m(i, j).imag()) << ']';
    }
  }
  out << "\n]}\n";
  return out.str();
}

nlohmann::json matrix_to_json(const CMatrix& m, const std::vector<std::string>& basis) {
  nlohmann::json entries = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      entries.push_back({m(i, j).real() + 0.0, m(i, j).imag() + 0.0});
    }
  }
  return {{"dim", m.rows()}, {"basis", basis}, {"entries", entries}};
}

CMatrix matrix_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("dim") || !j.contains("entries")) {
    throw InvalidArgument("matrix JSON needs 'dim' and 'entries'");
  }
  const auto dim = j.at("dim").get<Eigen::Index>();
  const auto& entries = j.at("entries");
  if (dim <= 0 || !entries.is_array() || entries.size() != static_cast<std::size_t>(dim * dim)) {
    throw InvalidArgument("matrix JSON entry count does not match dim");
  }
  CMatrix m(dim, dim);
  for (Eigen::Index k = 0; k < dim * dim; ++k) {
    const auto& e = entries[static_cast<std::size_t>(k)];
    if (!e.is_array() || e.size() != 2) throw InvalidArgument("matrix entry must be [re, im]");
    m(k / dim, k % dim) = Complex(e[0].get<double>(), e[1].get<double>());
  }
  return m;
}

std::string density_to_text(const DensityMatrix& rho) {
  return matrix_to_text(rho.matrix(), state_basis(rho.dim()));
}

DensityMatrix density_from_json(const nlohmann::json& j) {
  return DensityMatrix(matrix_from_json(j));
}

}  // namespace fiberlink::serialize
