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

#include "spintomo/estimation.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace spintomo {

DesignMatrix DesignMatrix::head(int n) const {
  if (n < 0 || n > rows()) throw invalid_argument("design head length out of range");
  DesignMatrix out;
  out.matrix = matrix.topRows(n);
  out.offsets = offsets.head(n);
  out.times.assign(times.begin(), times.begin() + n);
  out.basis = basis;
  return out;
}

DesignMatrix build_design(const ObservableSeries& series, const BesselBandpass* filter) {
  return build_design(series, series.basis, filter);
}

DesignMatrix build_design(const ObservableSeries& series, std::shared_ptr<const HermitianBasis> basis,
                          const BesselBandpass* filter) {
  if (!basis || basis->dim() != series.dim()) throw invalid_argument("design basis does not match the observable space");
  DesignMatrix out;
  out.basis = basis;
  out.times = series.times;
  out.offsets = series.offsets();
  out.matrix = series.traceless();
  if (basis != series.basis) out.matrix = out.matrix * series.basis->change_to(*basis).transpose();
  if (filter) {
    out.matrix = filter->apply_columns(out.matrix);
    out.offsets = filter->apply(out.offsets);
  }
  if (!out.matrix.allFinite()) throw numerical_error("design matrix has non-finite entries");
  return out;
}

MlEstimate ml_estimate(const DesignMatrix& design, const RVector& record, double sigma, double rtol) {
  if (record.size() != design.rows()) throw invalid_argument("record length does not match the design");
  const RMatrix& o = design.matrix;
  if (o.size() == 0 || o.cwiseAbs().maxCoeff() == 0.0) throw Error(ErrorKind::Degenerate, "design matrix is identically zero");
  Eigen::BDCSVD<RMatrix> svd(o, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVector& s = svd.singularValues();
  MlEstimate est;
  est.singular_values = s;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rtol * s(0)) ++est.rank;
  const int k = est.rank;
  const RMatrix vk = svd.matrixV().leftCols(k);
  const RVector inv = s.head(k).cwiseInverse();
  est.r = vk * (inv.asDiagonal() * (svd.matrixU().leftCols(k).transpose() * (record - design.offsets)));
  est.covariance = (sigma * sigma) * vk * inv.cwiseAbs2().asDiagonal() * vk.transpose();
  est.information = o.transpose() * o;
  return est;
}

// ---------------------------------------------------------------------------
// Positivity projection: log-det barrier with Newton centering.

namespace {

struct BarrierPoint {
  bool feasible = false;
  double logdet = 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> eig;
};

BarrierPoint evaluate(const HermitianBasis& basis, const RVector& r) {
  BarrierPoint p;
  p.eig.compute(basis.density(r));
  const RVector& lam = p.eig.eigenvalues();
  if (lam.minCoeff() <= 0.0) return p;
  p.feasible = true;
  p.logdet = lam.array().log().sum();
  return p;
}

}  // namespace

ProjectionResult positivity_project(const RVector& r_ml, const RMatrix& metric, const HermitianBasis& basis,
                                    const ProjectionOptions& opts) {
  const int p = basis.size(), d = basis.dim();
  if (r_ml.size() != p || metric.rows() != p || metric.cols() != p) throw invalid_argument("projection size mismatch");
  ProjectionResult res;
  {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(basis.density(r_ml), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() >= -opts.psd_tolerance) {
      res.r = r_ml;
      res.rho = basis.density(r_ml);
      res.inside = true;
      return res;
    }
  }
  const double tr = metric.trace();
  if (!(tr > 0.0)) throw Error(ErrorKind::Degenerate, "projection metric has zero trace");
  const RMatrix q = 0.5 * (metric + metric.transpose()) / tr;
  const CMatrix tl = basis.transfer().rightCols(p);

  RVector r = RVector::Zero(p);
  double mu = opts.mu_initial;
  BarrierPoint pt = evaluate(basis, r);
  double dec_last = 0.0, dec_prev = 0.0;
  auto objective = [&](const RVector& x, const BarrierPoint& b, double m) {
    const RVector dx = x - r_ml;
    return dx.dot(q * dx) - m * b.logdet;
  };

  while (true) {
    bool centred = false;
    for (int it = 0; it < opts.max_newton; ++it) {
      if (++res.iterations > opts.max_total) throw ConvergenceError<RVector>("positivity projection did not converge", r);
      const RVector& lam = pt.eig.eigenvalues();
      const CMatrix& v = pt.eig.eigenvectors();
      const CMatrix rho_inv = v * lam.cwiseInverse().asDiagonal() * v.adjoint();
      const RVector g = 2.0 * q * (r - r_ml) - mu * basis.coordinates(rho_inv);
      // Hessian of -log det: Tr(X E_a X E_b) = Re <W o V^dag E_a V, W o V^dag E_b V>.
      CMatrix cols = kron(v.adjoint(), v.transpose()) * tl;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) cols.row(i * d + j) *= 1.0 / std::sqrt(lam(i) * lam(j));
      RMatrix h = 2.0 * q + mu * (cols.adjoint() * cols).real();
      Eigen::LDLT<RMatrix> ldlt(h);
      const RVector step = -ldlt.solve(g);
      if (!step.allFinite()) throw numerical_error("positivity projection Newton step is not finite");
      const double dec = -g.dot(step);
      dec_last = dec;
      const bool last = mu * d <= opts.mu_final;
      // Newton decrement of the self-concordant f / mu.
      const double lam2 = dec / mu;
      const bool at_floor = lam2 < opts.stall_tol && it > 0 && dec > 0.25 * dec_prev;
      dec_prev = dec;
      if (dec < 2.0 * opts.newton_tol || (!last && lam2 < opts.centring_tol) || at_floor) {
        centred = true;
        break;
      }
      // Full steps in the quadratic region; otherwise backtrack with Armijo down to the damped
      // step 1/(1 + lambda), which decreases f without a function test.
      const double t_damped = lam2 < 0.0625 ? 1.0 : 1.0 / (1.0 + std::sqrt(lam2));
      const double f0 = t_damped < 1.0 ? objective(r, pt, mu) : 0.0;
      double t = 1.0;
      BarrierPoint trial;
      RVector rn;
      for (;;) {
        rn = r + t * step;
        trial = evaluate(basis, rn);
        if (t <= t_damped) {
          if (trial.feasible) break;
          if (t < 1e-12) throw ConvergenceError<RVector>("positivity projection step left the state space", r);
        } else if (trial.feasible && objective(rn, trial, mu) <= f0 - 0.25 * t * dec) {
          break;
        }
        t = t > t_damped && 0.5 * t < t_damped ? t_damped : 0.5 * t;
      }
      r = rn;
      pt = std::move(trial);
    }
    if (!centred) throw ConvergenceError<RVector>("positivity projection centering did not converge", r);
    if (mu * d <= opts.mu_final) break;
    mu *= opts.mu_factor;
  }
  res.r = r;
  res.rho = basis.density(r);
  // Stationarity in the Newton (dual) norm and complementarity Tr(rho Z) = mu d.
  res.kkt = std::max(std::sqrt(std::max(dec_last, 0.0)), mu * d);
  return res;
}

// ---------------------------------------------------------------------------

namespace {

void check_state(const CMatrix& a, const char* name) {
  if (a.rows() != a.cols()) throw invalid_argument(std::string(name) + " is not square");
  if (!is_hermitian(a, 1e-8)) throw invalid_argument(std::string(name) + " is not Hermitian");
  if (std::abs(a.trace().real() - 1.0) > 1e-8) throw invalid_argument(std::string(name) + " does not have unit trace");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-8) throw invalid_argument(std::string(name) + " is not positive semidefinite");
}

CMatrix psd_sqrt(const CMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a));
  return es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
}

CMatrix hermitian_exp(const CMatrix& h, cplx factor) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
  CVector e(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < e.size(); ++i) e(i) = std::exp(factor * es.eigenvalues()(i));
  return es.eigenvectors() * e.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double fidelity(const CMatrix& a, const CMatrix& b) {
  check_state(a, "first state");
  check_state(b, "second state");
  if (a.rows() != b.rows()) throw invalid_argument("fidelity of states with different dimensions");
  const CMatrix sa = psd_sqrt(a);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(sa * b * sa), Eigen::EigenvaluesOnly);
  const double s = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
  return std::clamp(s * s, 0.0, 1.0);
}

double trace_distance(const CMatrix& a, const CMatrix& b) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a - b), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

StateKind state_kind_from_name(const std::string& name) {
  if (name == "haar-pure") return StateKind::HaarPure;
  if (name == "hilbert-schmidt" || name == "hilbert-schmidt-mixed") return StateKind::HilbertSchmidt;
  throw invalid_argument("unknown state kind '" + name + "'");
}

CMatrix sample_state(StateKind kind, int d, Rng& rng) {
  if (d < 2) throw invalid_argument("state dimension must be >= 2");
  if (kind == StateKind::HaarPure) {
    CVector z(d);
    for (int i = 0; i < d; ++i) z(i) = rng.complex_normal();
    z.normalize();
    return z * z.adjoint();
  }
  CMatrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.complex_normal();
  CMatrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

CMatrix sample_state(StateKind kind, int d, std::uint64_t seed) {
  Rng rng(seed);
  return sample_state(kind, d, rng);
}

CMatrix spin_coherent_state(HalfInt F, const Eigen::Vector3d& axis) {
  if (axis.norm() == 0.0) throw invalid_argument("spin coherent axis must be nonzero");
  const Eigen::Vector3d n = axis.normalized();
  const AngularMomentum J = angular_momentum(F);
  CVector top = CVector::Zero(F.twice() + 1);
  top(0) = 1.0;
  const double theta = std::acos(std::clamp(n.z(), -1.0, 1.0)), phi = std::atan2(n.y(), n.x());
  const CVector psi = hermitian_exp(J.z, cplx(0, -phi)) * (hermitian_exp(J.y, cplx(0, -theta)) * top);
  return psi * psi.adjoint();
}

CMatrix squeezed_cat_state() {
  const SpinSpace space = SpinSpace::cs_ground();
  const AngularMomentum J4 = angular_momentum(HalfInt(4));
  CVector mx4 = CVector::Zero(9);
  mx4(0) = 1.0;
  mx4 = hermitian_exp(J4.y, cplx(0, -kPi / 2)) * mx4;
  const CVector sq4 = hermitian_exp(J4.z * J4.z, cplx(0, -0.5)) * mx4;
  CVector psi = CVector::Zero(space.dim());
  psi.segment(space.offset(4), 9) = sq4 / std::sqrt(2.0);
  psi += (basis_ket(space, 3, 3) + basis_ket(space, 3, -3)) / 2.0;
  psi.normalize();
  return psi * psi.adjoint();
}

std::vector<double> log_horizons(double first, double last, int n) {
  if (!(first > 0.0) || !(last >= first) || n < 1) throw invalid_argument("invalid horizon range");
  std::vector<double> h(n);
  for (int i = 0; i < n; ++i) h[i] = n == 1 ? last : first * std::pow(last / first, static_cast<double>(i) / (n - 1));
  h.back() = last;
  return h;
}

ReconstructionResult reconstruct(const MeasurementRecord& record, const DesignMatrix& design,
                                 const ReconstructionOptions& opts, const CMatrix* reference) {
  const int n = record.samples();
  if (n == 0) throw invalid_argument("record is empty");
  if (n > design.rows()) throw invalid_argument("record is longer than the design");
  for (int i = 0; i < n; ++i)
    if (std::abs(record.times[i] - design.times[i]) > 1e-9 * std::max(1.0, std::abs(design.times[i])) + 1e-12)
      throw invalid_argument("record sample times do not match the design at sample " + std::to_string(i));
  const HermitianBasis& basis = *design.basis;
  auto solve = [&](int k, ReconstructionResult* full) {
    const DesignMatrix dk = design.head(k);
    MlEstimate ml = ml_estimate(dk, record.values.head(k), record.sigma, opts.rtol);
    ProjectionResult pr = positivity_project(ml.r, ml.information, basis, opts.projection);
    HorizonPoint hp;
    hp.horizon = design.times[k - 1];
    hp.rank = ml.rank;
    if (reference) hp.fidelity = fidelity(pr.rho, *reference);
    if (full) {
      full->ml = std::move(ml);
      full->estimate = std::move(pr);
    }
    return hp;
  };
  ReconstructionResult res;
  res.samples_used = n;
  const HorizonPoint last = solve(n, &res);
  if (reference) res.fidelity = last.fidelity;
  for (double h : opts.horizons) {
    int k = 0;
    while (k < n && record.times[k] <= h * (1.0 + 1e-12)) ++k;
    if (k == 0) continue;
    res.trajectory.push_back(k == n ? last : solve(k, nullptr));
  }
  return res;
}

}  // namespace spintomo
