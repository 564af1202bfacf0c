// Copyright 2026 The fedsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fedsim {

// Flat 64-bit real vector: the universal container for models, gradients,
// optimiser statistics, and perturbations.
using ParamVector = std::vector<double>;

namespace vec {

inline void require_same_dim(const ParamVector& a, const ParamVector& b, const char* what) {
  if (a.size() != b.size())
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
}

inline bool all_finite(const ParamVector& v) {
  for (double x : v)
    if (!std::isfinite(x)) return false;
  return true;
}

inline void require_finite(const ParamVector& v, const char* what) {
  if (!all_finite(v)) throw std::invalid_argument(std::string(what) + ": nonfinite entries");
}

inline ParamVector zeros(std::size_t dim) { return ParamVector(dim, 0.0); }

// y += c * x
inline void axpy(ParamVector& y, double c, const ParamVector& x) {
  require_same_dim(y, x, "axpy");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += c * x[i];
}

inline void add_inplace(ParamVector& y, const ParamVector& x) {
  require_same_dim(y, x, "add");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += x[i];
}

inline void scale_inplace(ParamVector& y, double c) {
  for (double& x : y) x *= c;
}

inline ParamVector sub(const ParamVector& a, const ParamVector& b) {
  require_same_dim(a, b, "sub");
  ParamVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

inline double dot(const ParamVector& a, const ParamVector& b) {
  require_same_dim(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2_sq(const ParamVector& a) { return dot(a, a); }

inline double norm2(const ParamVector& a) { return std::sqrt(norm2_sq(a)); }

inline double max_abs_diff(const ParamVector& a, const ParamVector& b) {
  require_same_dim(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace vec
}  // namespace fedsim
