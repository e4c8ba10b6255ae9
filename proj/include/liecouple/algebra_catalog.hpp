#pragma once

#include <optional>
#include <string>
#include <vector>

#include "liecouple/lie_algebra.hpp"

namespace liecouple::catalog {

inline LieAlgebra abelian(int n) {
  return LieAlgebra::from_brackets("abelian" + std::to_string(n), n, {});
}

/// [e1,e2]=e3, [e2,e3]=e1, [e3,e1]=e2
inline LieAlgebra so3() {
  return LieAlgebra::from_brackets("so3", 3,
                                   {{0, 1, {0, 0, 1}}, {1, 2, {1, 0, 0}}, {2, 0, {0, 1, 0}}});
}

/// Basis (h, e, f): [h,e]=2e, [h,f]=-2f, [e,f]=h
inline LieAlgebra sl2() {
  return LieAlgebra::from_brackets("sl2", 3,
                                   {{0, 1, {0, 2, 0}}, {0, 2, {0, 0, -2}}, {1, 2, {1, 0, 0}}});
}

/// [e1,e2]=e3
inline LieAlgebra heisenberg3() {
  return LieAlgebra::from_brackets("heisenberg3", 3, {{0, 1, {0, 0, 1}}});
}

/// Affine algebra of the line: [e1,e2]=e2
inline LieAlgebra affine2() {
  return LieAlgebra::from_brackets("affine2", 2, {{0, 1, {0, 1}}});
}

inline std::vector<std::string> names() {
  return {"abelian1", "abelian2", "abelian3", "abelian4", "so3", "sl2", "heisenberg3", "affine2"};
}

inline std::optional<LieAlgebra> find(const std::string& name) {
  if (name == "so3") return so3();
  if (name == "sl2") return sl2();
  if (name == "heisenberg3") return heisenberg3();
  if (name == "affine2") return affine2();
  if (name.size() == 8 && name.rfind("abelian", 0) == 0) {
    const int n = name[7] - '0';
    if (n >= 1 && n <= 4) return abelian(n);
  }
  return std::nullopt;
}

inline std::vector<LieAlgebra> all() {
  std::vector<LieAlgebra> out;
  for (const auto& n : names()) out.push_back(*find(n));
  return out;
}

}  // namespace liecouple::catalog
