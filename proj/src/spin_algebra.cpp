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

#include "spintomo/spin_algebra.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace spintomo {

HalfInt HalfInt::from_double(double x) {
  const double t = 2.0 * x;
  const double r = std::round(t);
  if (std::abs(t - r) > 1e-9) throw invalid_argument("not a half-integer: " + std::to_string(x));
  return from_twice(static_cast<int>(r));
}

std::string HalfInt::str() const {
  if (is_integer()) return std::to_string(twice_ / 2);
  return std::to_string(twice_) + "/2";
}

SpinSpace::SpinSpace(std::vector<HalfInt> manifolds) : manifolds_(std::move(manifolds)) {
  if (manifolds_.empty()) throw invalid_argument("spin space needs at least one manifold");
  std::sort(manifolds_.begin(), manifolds_.end());
  if (std::adjacent_find(manifolds_.begin(), manifolds_.end()) != manifolds_.end())
    throw invalid_argument("duplicate manifold in spin space");
  for (HalfInt F : manifolds_) {
    if (F.twice() < 0) throw invalid_argument("negative F");
    for (int tm = F.twice(); tm >= -F.twice(); tm -= 2) labels_.push_back({F, HalfInt::from_twice(tm)});
  }
}

bool SpinSpace::contains(HalfInt F) const {
  return std::find(manifolds_.begin(), manifolds_.end(), F) != manifolds_.end();
}

int SpinSpace::offset(HalfInt F) const {
  int off = 0;
  for (HalfInt G : manifolds_) {
    if (G == F) return off;
    off += G.twice() + 1;
  }
  throw invalid_argument("manifold F=" + F.str() + " not in space " + tag());
}

int SpinSpace::index(HalfInt F, HalfInt m) const {
  if (std::abs(m.twice()) > F.twice() || (F.twice() - m.twice()) % 2 != 0)
    throw invalid_argument("m=" + m.str() + " invalid for F=" + F.str());
  return offset(F) + (F.twice() - m.twice()) / 2;
}

std::string SpinSpace::tag() const {
  std::ostringstream os;
  for (size_t i = 0; i < manifolds_.size(); ++i) os << (i ? "+" : "") << "F" << manifolds_[i].str();
  return os.str();
}

AngularMomentum angular_momentum(HalfInt F) {
  if (F.twice() < 0) throw invalid_argument("angular momentum needs F >= 0");
  const int d = F.twice() + 1;
  const double f = F.value();
  CMatrix raise = CMatrix::Zero(d, d), z = CMatrix::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    const double m = f - i;
    z(i, i) = m;
    // <m+1|F+|m> sits at row i-1, column i.
    if (i > 0) raise(i - 1, i) = std::sqrt(f * (f + 1) - m * (m + 1));
  }
  AngularMomentum out;
  out.x = 0.5 * (raise + raise.adjoint());
  out.y = (raise - raise.adjoint()) / (2.0 * kI);
  out.z = z;
  return out;
}

AngularMomentum angular_momentum(const SpinSpace& space, HalfInt F) {
  AngularMomentum a = angular_momentum(F);
  const SpinSpace from = SpinSpace::single(F);
  return {embed(a.x, from, space), embed(a.y, from, space), embed(a.z, from, space)};
}

CMatrix projector(const SpinSpace& space, HalfInt F) {
  const int n = F.twice() + 1;
  return embed(CMatrix::Identity(n, n), SpinSpace::single(F), space);
}

CVector basis_ket(const SpinSpace& space, HalfInt F, HalfInt m) {
  CVector v = CVector::Zero(space.dim());
  v(space.index(F, m)) = 1.0;
  return v;
}

namespace {

double log_fact(int n) { return std::lgamma(n + 1.0); }

// Integer value of a sum of half-integers given in doubled form; -1 when odd.
int half_sum(int twice) { return twice % 2 == 0 ? twice / 2 : -1; }

bool triangle(HalfInt a, HalfInt b, HalfInt c) {
  const int ta = a.twice(), tb = b.twice(), tc = c.twice();
  if (ta < 0 || tb < 0 || tc < 0) return false;
  if ((ta + tb + tc) % 2 != 0) return false;
  return tc <= ta + tb && tc >= std::abs(ta - tb);
}

double log_delta(HalfInt a, HalfInt b, HalfInt c) {
  return 0.5 * (log_fact(half_sum(a.twice() + b.twice() - c.twice())) +
                log_fact(half_sum(a.twice() - b.twice() + c.twice())) +
                log_fact(half_sum(-a.twice() + b.twice() + c.twice())) -
                log_fact(half_sum(a.twice() + b.twice() + c.twice()) + 1));
}

bool valid_projection(HalfInt j, HalfInt m) {
  return std::abs(m.twice()) <= j.twice() && (j.twice() - m.twice()) % 2 == 0;
}

}  // namespace

double clebsch_gordan(HalfInt j1, HalfInt m1, HalfInt j2, HalfInt m2, HalfInt J, HalfInt M) {
  if (M != m1 + m2) return 0.0;
  if (!triangle(j1, j2, J)) return 0.0;
  if (!valid_projection(j1, m1) || !valid_projection(j2, m2) || !valid_projection(J, M)) return 0.0;
  const int a = half_sum(j1.twice() + j2.twice() - J.twice());
  const int b = half_sum(j1.twice() - m1.twice());
  const int c = half_sum(j2.twice() + m2.twice());
  const int e = half_sum(J.twice() - j2.twice() + m1.twice());
  const int f = half_sum(J.twice() - j1.twice() - m2.twice());
  const double log_pre =
      0.5 * (std::log(J.twice() + 1.0) + 2.0 * log_delta(j1, j2, J) + log_fact(half_sum(J.twice() + M.twice())) +
             log_fact(half_sum(J.twice() - M.twice())) + log_fact(b) + log_fact(half_sum(j1.twice() + m1.twice())) +
             log_fact(half_sum(j2.twice() - m2.twice())) + log_fact(c));
  const int kmin = std::max({0, -e, -f});
  const int kmax = std::min({a, b, c});
  double sum = 0.0;
  for (int k = kmin; k <= kmax; ++k) {
    const double lt = log_fact(k) + log_fact(a - k) + log_fact(b - k) + log_fact(c - k) + log_fact(e + k) +
                      log_fact(f + k);
    sum += (k % 2 ? -1.0 : 1.0) * std::exp(log_pre - lt);
  }
  return sum;
}

double wigner6j(HalfInt j1, HalfInt j2, HalfInt j3, HalfInt j4, HalfInt j5, HalfInt j6) {
  if (!triangle(j1, j2, j3) || !triangle(j1, j5, j6) || !triangle(j4, j2, j6) || !triangle(j4, j5, j3)) return 0.0;
  const int a1 = half_sum(j1.twice() + j2.twice() + j3.twice());
  const int a2 = half_sum(j1.twice() + j5.twice() + j6.twice());
  const int a3 = half_sum(j4.twice() + j2.twice() + j6.twice());
  const int a4 = half_sum(j4.twice() + j5.twice() + j3.twice());
  const int b1 = half_sum(j1.twice() + j2.twice() + j4.twice() + j5.twice());
  const int b2 = half_sum(j2.twice() + j3.twice() + j5.twice() + j6.twice());
  const int b3 = half_sum(j3.twice() + j1.twice() + j6.twice() + j4.twice());
  const double log_pre = log_delta(j1, j2, j3) + log_delta(j1, j5, j6) + log_delta(j4, j2, j6) + log_delta(j4, j5, j3);
  const int tmin = std::max({a1, a2, a3, a4});
  const int tmax = std::min({b1, b2, b3});
  double sum = 0.0;
  for (int t = tmin; t <= tmax; ++t) {
    const double lt = log_fact(t + 1) - log_fact(t - a1) - log_fact(t - a2) - log_fact(t - a3) - log_fact(t - a4) -
                      log_fact(b1 - t) - log_fact(b2 - t) - log_fact(b3 - t);
    sum += (t % 2 ? -1.0 : 1.0) * std::exp(log_pre + lt);
  }
  return sum;
}

HermitianBasis::HermitianBasis(int d, std::vector<CMatrix> elements) : dim_(d), elements_(std::move(elements)) {
  transfer_.resize(d * d, d * d);
  transfer_.col(0) = vec(CMatrix::Identity(d, d) / std::sqrt(static_cast<double>(d)));
  for (int a = 0; a < size(); ++a) transfer_.col(a + 1) = vec(elements_[a]);
}

HermitianBasis HermitianBasis::gell_mann(int d) {
  if (d < 2) throw invalid_argument("Hermitian basis needs d >= 2");
  const double s = 1.0 / std::sqrt(2.0);
  std::vector<CMatrix> els;
  els.reserve(d * d - 1);
  for (int j = 0; j < d; ++j) {
    for (int k = j + 1; k < d; ++k) {
      CMatrix sym = CMatrix::Zero(d, d);
      sym(j, k) = sym(k, j) = s;
      els.push_back(sym);
      CMatrix anti = CMatrix::Zero(d, d);
      anti(j, k) = -kI * s;
      anti(k, j) = kI * s;
      els.push_back(anti);
    }
  }
  for (int l = 1; l < d; ++l) {
    CMatrix diag = CMatrix::Zero(d, d);
    const double norm = 1.0 / std::sqrt(l * (l + 1.0));
    for (int j = 0; j < l; ++j) diag(j, j) = norm;
    diag(l, l) = -l * norm;
    els.push_back(diag);
  }
  return HermitianBasis(d, std::move(els));
}

HermitianBasis HermitianBasis::from_elements(std::vector<CMatrix> elements) {
  if (elements.empty()) throw invalid_argument("empty basis");
  const int d = static_cast<int>(elements.front().rows());
  if (static_cast<int>(elements.size()) != d * d - 1) throw invalid_argument("basis needs d^2-1 elements");
  for (size_t a = 0; a < elements.size(); ++a) {
    if (elements[a].rows() != d || elements[a].cols() != d) throw invalid_argument("basis element shape mismatch");
    if (!is_hermitian(elements[a], 1e-12)) throw invalid_argument("basis element not Hermitian");
    if (std::abs(elements[a].trace()) > 1e-12) throw invalid_argument("basis element not traceless");
    for (size_t b = 0; b <= a; ++b) {
      const double g = (elements[a] * elements[b]).trace().real();
      if (std::abs(g - (a == b ? 1.0 : 0.0)) > 1e-12) throw invalid_argument("basis not orthonormal");
    }
  }
  return HermitianBasis(d, std::move(elements));
}

RVector HermitianBasis::full_coordinates(const CMatrix& a) const {
  if (a.rows() != dim_ || a.cols() != dim_) throw invalid_argument("operator/basis dimension mismatch");
  return (transfer_.adjoint() * vec(a)).real();
}

RVector HermitianBasis::coordinates(const CMatrix& a) const { return full_coordinates(a).tail(size()); }

CMatrix HermitianBasis::from_full(const RVector& full) const {
  if (full.size() != dim_ * dim_) throw invalid_argument("coordinate length mismatch");
  return unvec(transfer_ * full.cast<cplx>(), dim_);
}

CMatrix HermitianBasis::density(const RVector& r) const {
  if (r.size() != size()) throw invalid_argument("coordinate length mismatch");
  RVector full(dim_ * dim_);
  full(0) = 1.0 / std::sqrt(static_cast<double>(dim_));
  full.tail(size()) = r;
  return from_full(full);
}

HermitianBasis HermitianBasis::rotated(const RMatrix& q) const {
  if (q.rows() != size() || q.cols() != size()) throw invalid_argument("rotation size mismatch");
  if ((q.transpose() * q - RMatrix::Identity(size(), size())).cwiseAbs().maxCoeff() > 1e-10)
    throw invalid_argument("basis rotation is not orthogonal");
  std::vector<CMatrix> els(size(), CMatrix::Zero(dim_, dim_));
  for (int a = 0; a < size(); ++a)
    for (int b = 0; b < size(); ++b)
      if (q(b, a) != 0.0) els[a] += q(b, a) * elements_[b];
  return HermitianBasis(dim_, std::move(els));
}

RMatrix HermitianBasis::change_to(const HermitianBasis& other) const {
  if (other.dim_ != dim_) throw invalid_argument("basis dimension mismatch");
  return (other.transfer_.rightCols(other.size()).adjoint() * transfer_.rightCols(size())).real();
}

HermitianBasis hermitian_basis(const SpinSpace& space) { return HermitianBasis::gell_mann(space.dim()); }

CMatrix embed(const CMatrix& op, const SpinSpace& from, const SpinSpace& into) {
  if (op.rows() != from.dim() || op.cols() != from.dim()) throw invalid_argument("operator does not match source space");
  CMatrix out = CMatrix::Zero(into.dim(), into.dim());
  for (HalfInt Fr : from.manifolds()) {
    if (!into.contains(Fr)) throw invalid_argument("manifold F=" + Fr.str() + " missing from " + into.tag());
    for (HalfInt Fc : from.manifolds())
      out.block(into.offset(Fr), into.offset(Fc), Fr.twice() + 1, Fc.twice() + 1) =
          op.block(from.offset(Fr), from.offset(Fc), Fr.twice() + 1, Fc.twice() + 1);
  }
  return out;
}

CMatrix project(const CMatrix& op, const SpinSpace& from, const SpinSpace& into) {
  if (op.rows() != from.dim() || op.cols() != from.dim()) throw invalid_argument("operator does not match source space");
  CMatrix out = CMatrix::Zero(into.dim(), into.dim());
  for (HalfInt Fr : into.manifolds()) {
    if (!from.contains(Fr)) throw invalid_argument("manifold F=" + Fr.str() + " missing from " + from.tag());
    for (HalfInt Fc : into.manifolds())
      out.block(into.offset(Fr), into.offset(Fc), Fr.twice() + 1, Fc.twice() + 1) =
          op.block(from.offset(Fr), from.offset(Fc), Fr.twice() + 1, Fc.twice() + 1);
  }
  return out;
}

CMatrix embed_block(const CMatrix& block, HalfInt f_row, HalfInt f_col, const SpinSpace& space) {
  if (block.rows() != f_row.twice() + 1 || block.cols() != f_col.twice() + 1)
    throw invalid_argument("block shape does not match manifolds");
  CMatrix out = CMatrix::Zero(space.dim(), space.dim());
  out.block(space.offset(f_row), space.offset(f_col), block.rows(), block.cols()) = block;
  return out;
}

}  // namespace spintomo
