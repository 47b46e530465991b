// Copyright 2026 The spintomo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "spintomo/core.hpp"

#include <compare>
#include <string>
#include <vector>

namespace spintomo {

// Half-integer stored as twice its value.
class HalfInt {
 public:
  constexpr HalfInt() = default;
  constexpr HalfInt(int n) : twice_(2 * n) {}  // NOLINT(google-explicit-constructor)
  static constexpr HalfInt from_twice(int twice) {
    HalfInt h;
    h.twice_ = twice;
    return h;
  }
  static HalfInt from_double(double x);

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }

  constexpr HalfInt operator-() const { return from_twice(-twice_); }
  constexpr HalfInt operator+(HalfInt o) const { return from_twice(twice_ + o.twice_); }
  constexpr HalfInt operator-(HalfInt o) const { return from_twice(twice_ - o.twice_); }
  constexpr auto operator<=>(const HalfInt&) const = default;

  std::string str() const;

 private:
  int twice_ = 0;
};

struct Ket {
  HalfInt F;
  HalfInt m;
};

// Direct sum of hyperfine manifolds. Kets are ordered with manifolds in
// ascending F and m = F ... -F inside each manifold.
class SpinSpace {
 public:
  explicit SpinSpace(std::vector<HalfInt> manifolds);
  static SpinSpace single(HalfInt F) { return SpinSpace({F}); }
  static SpinSpace cs_ground() { return SpinSpace({HalfInt(3), HalfInt(4)}); }

  int dim() const { return static_cast<int>(labels_.size()); }
  const std::vector<HalfInt>& manifolds() const { return manifolds_; }
  const std::vector<Ket>& labels() const { return labels_; }
  bool contains(HalfInt F) const;
  int offset(HalfInt F) const;
  int block_dim(HalfInt F) const { return F.twice() + 1; }
  int index(HalfInt F, HalfInt m) const;
  std::string tag() const;  // e.g. "F3+F4"

  bool operator==(const SpinSpace& o) const { return manifolds_ == o.manifolds_; }

 private:
  std::vector<HalfInt> manifolds_;
  std::vector<Ket> labels_;
};

struct AngularMomentum {
  CMatrix x, y, z;
};

AngularMomentum angular_momentum(HalfInt F);
// Components of a single manifold embedded in a larger space.
AngularMomentum angular_momentum(const SpinSpace& space, HalfInt F);
CMatrix projector(const SpinSpace& space, HalfInt F);
CVector basis_ket(const SpinSpace& space, HalfInt F, HalfInt m);

double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M);
double wigner6j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt j4, HalfInt j5, HalfInt j6);

// Orthonormal traceless Hermitian basis {E_a}, a = 1 .. d^2-1, completed by
// B_0 = I/sqrt(d) in the "full" coordinate vectors.
class HermitianBasis {
 public:
  static HermitianBasis gell_mann(int d);
  static HermitianBasis from_elements(std::vector<CMatrix> elements);

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(elements_.size()); }
  const CMatrix& operator[](int a) const { return elements_[a]; }
  const std::vector<CMatrix>& elements() const { return elements_; }

  // r_a = Tr(E_a A) (real part; exact for Hermitian A).
  RVector coordinates(const CMatrix& a) const;
  // (Tr(A)/sqrt(d), r_1, ..., r_{d^2-1}).
  RVector full_coordinates(const CMatrix& a) const;
  CMatrix from_full(const RVector& full) const;
  // I/d + sum_a r_a E_a.
  CMatrix density(const RVector& r) const;
  // Columns are vec(B_k) with B_0 = I/sqrt(d).
  const CMatrix& transfer() const { return transfer_; }

  // E'_a = sum_b Q_ba E_b for an orthogonal Q.
  HermitianBasis rotated(const RMatrix& q) const;
  // R_ab = Tr(other_a this_b), mapping coordinates in this basis to other.
  RMatrix change_to(const HermitianBasis& other) const;

 private:
  HermitianBasis(int d, std::vector<CMatrix> elements);
  int dim_ = 0;
  std::vector<CMatrix> elements_;
  CMatrix transfer_;
};

HermitianBasis hermitian_basis(const SpinSpace& space);

CMatrix embed(const CMatrix& op, const SpinSpace& from, const SpinSpace& into);
CMatrix project(const CMatrix& op, const SpinSpace& from, const SpinSpace& into);
// Places a (2Fr+1) x (2Fc+1) block at rows of manifold Fr and columns of Fc.
CMatrix embed_block(const CMatrix& block, HalfInt f_row, HalfInt f_col, const SpinSpace& space);

}  // namespace spintomo
