#include "qot/field.hpp"

#include <cmath>

#include "qot/errors.hpp"

namespace qot {

VectorField VectorField::zero(std::size_t count, Index dim) {
  return VectorField(std::vector<Matrix>(count, Matrix::Zero(dim, dim)));
}

VectorField& VectorField::operator+=(const VectorField& other) {
  if (other.size() != size()) throw DimensionError("VectorField: component count mismatch");
  for (std::size_t j = 0; j < size(); ++j) components[j] += other.components[j];
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& other) {
  if (other.size() != size()) throw DimensionError("VectorField: component count mismatch");
  for (std::size_t j = 0; j < size(); ++j) components[j] -= other.components[j];
  return *this;
}

VectorField& VectorField::operator*=(Complex s) {
  for (auto& c : components) c *= s;
  return *this;
}

Complex field_inner(const VectorField& v, const VectorField& w) {
  if (v.size() != w.size()) throw DimensionError("field_inner: component count mismatch");
  Complex acc{};
  for (std::size_t j = 0; j < v.size(); ++j) acc += gns_inner(v[j], w[j]);
  return acc;
}

double field_norm(const VectorField& v) { return std::sqrt(std::max(0.0, field_inner(v, v).real())); }

}  // namespace qot
