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

#include "spintomo/spin_algebra.hpp"

#include <memory>
#include <vector>

namespace spintomo {

// Real matrix of a Hermiticity-preserving linear map in the basis
// {I/sqrt(d), E_1, ..., E_{d^2-1}}: S_ab = Tr(B_a L(B_b)).
struct Superoperator {
  RMatrix matrix;
  int dim = 0;  // Hilbert-space dimension d
};

// Converts a map given in the row-major vec representation.
Superoperator to_basis(const CMatrix& vec_rep, const HermitianBasis& basis);
// rho -> -i (H rho - rho H^dag); H may be non-Hermitian.
Superoperator hamiltonian_superoperator(const CMatrix& h_eff, const HermitianBasis& basis);
// rho -> sum_L L rho L^dag.
Superoperator sandwich_superoperator(const std::vector<CMatrix>& jumps, const HermitianBasis& basis);
// H - (i/2) sum L^dag L.
CMatrix effective_hamiltonian(const CMatrix& h, const std::vector<CMatrix>& jumps);
// -i (H_eff rho - rho H_eff^dag) + sum L rho L^dag. The anti-Hermitian part of
// H_eff carries the -1/2 {L^dag L, rho} term.
Superoperator lindblad_generator(const CMatrix& h_eff, const std::vector<CMatrix>& jumps, const HermitianBasis& basis);

RMatrix segment_exponential(const Superoperator& gen, double dt);
RMatrix matrix_power(const RMatrix& a, long n);

struct Segment {
  CMatrix hamiltonian;                             // effective, possibly non-Hermitian
  std::shared_ptr<const Superoperator> dissipator;  // sandwich part, may be null
  int steps = 1;
  double step = 0.0;  // sub-step length; samples are taken after every sub-step
};

class PropagationPlan {
 public:
  explicit PropagationPlan(std::shared_ptr<const HermitianBasis> basis) : basis_(std::move(basis)) {}
  void add(Segment seg);
  const HermitianBasis& basis() const { return *basis_; }
  std::shared_ptr<const HermitianBasis> basis_ptr() const { return basis_; }
  const std::vector<Segment>& segments() const { return segments_; }
  int total_steps() const;
  double total_time() const;
  std::vector<double> sample_times() const;
  Superoperator generator(size_t segment) const;

 private:
  std::shared_ptr<const HermitianBasis> basis_;
  std::vector<Segment> segments_;
};

// Heisenberg-picture observables at every sample time, as full basis
// coordinates (column 0 is the I/sqrt(d) component).
struct ObservableSeries {
  RMatrix coords;
  std::vector<double> times;
  std::shared_ptr<const HermitianBasis> basis;

  int samples() const { return static_cast<int>(coords.rows()); }
  int dim() const { return basis->dim(); }
  RVector offsets() const;      // Tr(O_i)/d
  RMatrix traceless() const;    // Tr(O_i E_a)
  CMatrix operator_at(int i) const { return basis->from_full(coords.row(i).transpose()); }
  RVector expectation(const CMatrix& rho) const;  // Tr(O_i rho)
  ObservableSeries head(int n) const;
};

// O_i = O_0 V_{t_i}, with V composed segment by segment, later segments on the left.
ObservableSeries propagate_observables(const PropagationPlan& plan, const CMatrix& o0);
ObservableSeries propagate_observables(const PropagationPlan& plan, const RVector& o0_full);
// Schroedinger picture, full basis coordinates of rho(t_i) per row.
RMatrix propagate_state_coords(const PropagationPlan& plan, const CMatrix& rho0);
std::vector<CMatrix> propagate_state(const PropagationPlan& plan, const CMatrix& rho0);

}  // namespace spintomo
