#pragma once

#include <vector>

#include "qot/linalg.hpp"

namespace qot {

/// Element of H_{A,J}: one n x n matrix per jump index.
struct VectorField {
  std::vector<Matrix> components;

  VectorField() = default;
  explicit VectorField(std::vector<Matrix> c) : components(std::move(c)) {}

  static VectorField zero(std::size_t count, Index dim);

  std::size_t size() const { return components.size(); }
  Matrix& operator[](std::size_t j) { return components[j]; }
  const Matrix& operator[](std::size_t j) const { return components[j]; }

  VectorField& operator+=(const VectorField& other);
  VectorField& operator-=(const VectorField& other);
  VectorField& operator*=(Complex s);
  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(Complex s, VectorField a) { return a *= s; }
};

/// sum_j tau(V_j^* W_j).
Complex field_inner(const VectorField& v, const VectorField& w);
double field_norm(const VectorField& v);

}  // namespace qot
