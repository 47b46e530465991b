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

#include "spintomo/dynamics.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace spintomo {

Superoperator to_basis(const CMatrix& vec_rep, const HermitianBasis& basis) {
  const int d = basis.dim();
  if (vec_rep.rows() != d * d || vec_rep.cols() != d * d) throw invalid_argument("superoperator dimension mismatch");
  const CMatrix& t = basis.transfer();
  const CMatrix s = t.adjoint() * (vec_rep * t);
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if (s.imag().cwiseAbs().maxCoeff() > 1e-9 * scale)
    throw numerical_error("map does not preserve Hermiticity");
  return {s.real(), d};
}

Superoperator hamiltonian_superoperator(const CMatrix& h_eff, const HermitianBasis& basis) {
  const int d = basis.dim();
  if (h_eff.rows() != d || h_eff.cols() != d) throw invalid_argument("Hamiltonian/basis dimension mismatch");
  const CMatrix id = CMatrix::Identity(d, d);
  return to_basis(-kI * (kron(h_eff, id) - kron(id, h_eff.conjugate())), basis);
}

Superoperator sandwich_superoperator(const std::vector<CMatrix>& jumps, const HermitianBasis& basis) {
  const int d = basis.dim();
  CMatrix m = CMatrix::Zero(d * d, d * d);
  for (const CMatrix& l : jumps) {
    if (l.rows() != d || l.cols() != d) throw invalid_argument("jump operator dimension mismatch");
    m += kron(l, l.conjugate());
  }
  return to_basis(m, basis);
}

CMatrix effective_hamiltonian(const CMatrix& h, const std::vector<CMatrix>& jumps) {
  CMatrix out = h;
  for (const CMatrix& l : jumps) out -= 0.5 * kI * (l.adjoint() * l);
  return out;
}

Superoperator lindblad_generator(const CMatrix& h_eff, const std::vector<CMatrix>& jumps, const HermitianBasis& basis) {
  Superoperator s = hamiltonian_superoperator(h_eff, basis);
  if (!jumps.empty()) s.matrix += sandwich_superoperator(jumps, basis).matrix;
  return s;
}

RMatrix segment_exponential(const Superoperator& gen, double dt) {
  if (!(dt > 0.0)) throw invalid_argument("segment duration must be positive");
  if (!gen.matrix.allFinite()) throw numerical_error("non-finite generator entries");
  RMatrix p = (gen.matrix * dt).exp();
  if (!p.allFinite()) throw numerical_error("non-finite matrix exponential");
  return p;
}

RMatrix matrix_power(const RMatrix& a, long n) {
  if (n < 0) throw invalid_argument("negative matrix power");
  RMatrix result = RMatrix::Identity(a.rows(), a.cols());
  RMatrix base = a;
  bool first = true;
  while (n > 0) {
    if (n & 1) {
      if (first) {
        result = base;
        first = false;
      } else {
        result = (result * base).eval();
      }
    }
    n >>= 1;
    if (n) base = (base * base).eval();
  }
  return result;
}

void PropagationPlan::add(Segment seg) {
  if (seg.steps < 1 || !(seg.step > 0.0)) throw invalid_argument("segment needs positive steps and step length");
  const int d = basis_->dim();
  if (seg.hamiltonian.rows() != d || seg.hamiltonian.cols() != d) throw invalid_argument("segment Hamiltonian size");
  if (seg.dissipator && seg.dissipator->dim != d) throw invalid_argument("segment dissipator size");
  segments_.push_back(std::move(seg));
}

int PropagationPlan::total_steps() const {
  int n = 0;
  for (const auto& s : segments_) n += s.steps;
  return n;
}

double PropagationPlan::total_time() const {
  double t = 0.0;
  for (const auto& s : segments_) t += s.steps * s.step;
  return t;
}

std::vector<double> PropagationPlan::sample_times() const {
  std::vector<double> out;
  out.reserve(total_steps());
  double t0 = 0.0;
  for (const auto& s : segments_) {
    for (int k = 1; k <= s.steps; ++k) out.push_back(t0 + k * s.step);
    t0 += s.steps * s.step;
  }
  return out;
}

Superoperator PropagationPlan::generator(size_t segment) const {
  const Segment& s = segments_.at(segment);
  Superoperator g = hamiltonian_superoperator(s.hamiltonian, *basis_);
  if (s.dissipator) g.matrix += s.dissipator->matrix;
  return g;
}

RVector ObservableSeries::offsets() const {
  return coords.col(0) / std::sqrt(static_cast<double>(dim()));
}

RMatrix ObservableSeries::traceless() const { return coords.rightCols(coords.cols() - 1); }

RVector ObservableSeries::expectation(const CMatrix& rho) const { return coords * basis->full_coordinates(rho); }

ObservableSeries ObservableSeries::head(int n) const {
  ObservableSeries out;
  out.coords = coords.topRows(n);
  out.times.assign(times.begin(), times.begin() + n);
  out.basis = basis;
  return out;
}

ObservableSeries propagate_observables(const PropagationPlan& plan, const CMatrix& o0) {
  return propagate_observables(plan, plan.basis().full_coordinates(o0));
}

ObservableSeries propagate_observables(const PropagationPlan& plan, const RVector& o0_full) {
  const int n2 = plan.basis().dim() * plan.basis().dim();
  if (o0_full.size() != n2) throw invalid_argument("observable coordinate length mismatch");
  ObservableSeries out;
  out.basis = plan.basis_ptr();
  out.times = plan.sample_times();
  out.coords.resize(plan.total_steps(), n2);
  RMatrix v = RMatrix::Identity(n2, n2);
  int row = 0;
  const auto& segs = plan.segments();
  for (size_t s = 0; s < segs.size(); ++s) {
    const RMatrix p = segment_exponential(plan.generator(s), segs[s].step);
    const int n = segs[s].steps;
    // Rows inside the segment: (P^T)^k o, then mapped through the accumulated V.
    RMatrix u(n, n2);
    RVector w = o0_full;
    for (int k = 0; k < n; ++k) {
      w = p.transpose() * w;
      u.row(k) = w.transpose();
    }
    out.coords.middleRows(row, n).noalias() = u * v;
    row += n;
    if (s + 1 < segs.size()) v = (matrix_power(p, n) * v).eval();
  }
  return out;
}

RMatrix propagate_state_coords(const PropagationPlan& plan, const CMatrix& rho0) {
  const HermitianBasis& basis = plan.basis();
  RVector r = basis.full_coordinates(rho0);
  const double sqrt_d = std::sqrt(static_cast<double>(basis.dim()));
  const double trace0 = r(0) * sqrt_d;
  RMatrix out(plan.total_steps(), r.size());
  int row = 0;
  const auto& segs = plan.segments();
  for (size_t s = 0; s < segs.size(); ++s) {
    const RMatrix p = segment_exponential(plan.generator(s), segs[s].step);
    for (int k = 0; k < segs[s].steps; ++k) {
      r = p * r;
      if (r(0) * sqrt_d > trace0 + 1e-8) throw numerical_error("trace of the state grew during propagation");
      out.row(row++) = r.transpose();
    }
  }
  return out;
}

std::vector<CMatrix> propagate_state(const PropagationPlan& plan, const CMatrix& rho0) {
  const RMatrix c = propagate_state_coords(plan, rho0);
  std::vector<CMatrix> out;
  out.reserve(c.rows());
  for (Eigen::Index i = 0; i < c.rows(); ++i) out.push_back(plan.basis().from_full(c.row(i).transpose()));
  return out;
}

}  // namespace spintomo
