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


#include "helpers.hpp"
#include "spintomo/pipeline.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

using namespace spintomo;
using namespace spintomo::testing;

namespace {

std::shared_ptr<const HermitianBasis> gm(int d) {
  return std::make_shared<const HermitianBasis>(HermitianBasis::gell_mann(d));
}

DesignMatrix random_design(int rows, int d, Rng& rng) {
  DesignMatrix dm;
  dm.basis = gm(d);
  dm.matrix.resize(rows, d * d - 1);
  for (Eigen::Index i = 0; i < dm.matrix.size(); ++i) dm.matrix(i) = rng.normal();
  dm.offsets = RVector::Zero(rows);
  for (int i = 0; i < rows; ++i) dm.times.push_back((i + 1) * 1e-6);
  return dm;
}

RMatrix random_metric(int p, Rng& rng) {
  RMatrix a(p, p);
  for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = rng.normal();
  return a * a.transpose() + 0.05 * RMatrix::Identity(p, p);
}

double cost(const RVector& r, const RVector& r_ml, const RMatrix& q) { return (r - r_ml).dot(q * (r - r_ml)); }

// Frobenius projection onto unit-trace PSD matrices: eigenvalues onto the simplex.
CMatrix project_density(const CMatrix& a) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(a));
  RVector lam = es.eigenvalues();
  std::vector<double> s(lam.data(), lam.data() + lam.size());
  std::sort(s.rbegin(), s.rend());
  double acc = 0.0, theta = 0.0;
  for (size_t k = 0; k < s.size(); ++k) {
    acc += s[k];
    const double t = (acc - 1.0) / static_cast<double>(k + 1);
    if (s[k] - t > 0.0) theta = t;
  }
  lam = (lam.array() - theta).cwiseMax(0.0);
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().adjoint();
}

// Accelerated projected gradient on the coordinates.
RVector projected_gradient(const RVector& r_ml, const RMatrix& q, const HermitianBasis& basis, int iters) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(q, Eigen::EigenvaluesOnly);
  const double step = 1.0 / (2.0 * es.eigenvalues().maxCoeff());
  RVector x = RVector::Zero(r_ml.size()), y = x;
  double t = 1.0;
  for (int k = 0; k < iters; ++k) {
    const RVector g = 2.0 * q * (y - r_ml);
    const RVector xn = basis.coordinates(project_density(basis.density(y - step * g)));
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = xn + ((t - 1.0) / tn) * (xn - x);
    x = xn;
    t = tn;
  }
  return x;
}

ObservableSeries rows_as_series(const std::vector<CMatrix>& ops, std::shared_ptr<const HermitianBasis> basis) {
  ObservableSeries s;
  s.basis = basis;
  s.coords.resize(static_cast<Eigen::Index>(ops.size()), basis->dim() * basis->dim());
  for (size_t i = 0; i < ops.size(); ++i) {
    s.coords.row(static_cast<Eigen::Index>(i)) = basis->full_coordinates(ops[i]).transpose();
    s.times.push_back((i + 1) * 1e-6);
  }
  return s;
}

}  // namespace

TEST_SUITE("estimation") {
  TEST_CASE("design matrix from a constant and from a complete series") {
    auto basis = gm(4);
    const DesignMatrix one = build_design(rows_as_series(std::vector<CMatrix>(5, (*basis)[6]), basis));
    CHECK(one.cols() == 15);
    CHECK(max_abs(one.matrix.col(6) - RVector::Ones(5)) < 1e-14);
    RMatrix rest = one.matrix;
    rest.col(6).setZero();
    CHECK(max_abs(rest) < 1e-14);
    CHECK(max_abs(one.offsets) < 1e-15);
    const DesignMatrix full = build_design(rows_as_series(basis->elements(), basis));
    CHECK(max_abs(full.matrix - RMatrix::Identity(15, 15)) < 1e-14);
    CHECK(error_kind([&] { build_design(rows_as_series(basis->elements(), basis), gm(3)); }) == ErrorKind::InvalidArgument);
  }

  TEST_CASE("ML estimate: exact recovery, minimum norm, degenerate design") {
    Rng rng(31);
    const DesignMatrix dm = random_design(200, 4, rng);
    const CMatrix rho = random_density(4, rng);
    const RVector r = dm.basis->coordinates(rho);
    const MlEstimate est = ml_estimate(dm, dm.matrix * r, 0.0);
    CHECK(est.rank == 15);
    CHECK(max_abs(est.r - r) < 1e-8);

    DesignMatrix deficient = dm;
    deficient.matrix.col(4).setZero();
    deficient.matrix.col(9) = deficient.matrix.col(2);
    const MlEstimate md = ml_estimate(deficient, deficient.matrix * r, 0.0);
    CHECK(md.rank == 13);
    CHECK(std::abs(md.r(4)) < 1e-12);
    CHECK(std::abs(md.r(9) - md.r(2)) < 1e-10);  // no weight on the unmeasured difference
    CHECK(std::abs(md.r(2) - 0.5 * (r(2) + r(9))) < 1e-10);

    DesignMatrix zero = dm;
    zero.matrix.setZero();
    CHECK(error_kind([&] { ml_estimate(zero, RVector::Zero(200), 0.1); }) == ErrorKind::Degenerate);
    CHECK(error_kind([&] { ml_estimate(dm, RVector::Zero(10), 0.1); }) == ErrorKind::InvalidArgument);
  }

  TEST_CASE("ML covariance matches Monte Carlo") {
    Rng rng(32);
    const DesignMatrix dm = random_design(60, 2, rng);
    const RVector r = dm.basis->coordinates(random_density(2, rng));
    const double sigma = 0.2;
    const MlEstimate ref = ml_estimate(dm, dm.matrix * r, sigma);
    const int n = 200;
    RMatrix samples(n, 3);
    for (int k = 0; k < n; ++k) {
      Rng noise(derive_seed(99, k));
      samples.row(k) = ml_estimate(dm, dm.matrix * r + sigma * noise.normal_vector(60), sigma).r.transpose();
    }
    const RMatrix centred = samples.rowwise() - r.transpose();
    const RMatrix mc = centred.transpose() * centred / n;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(std::abs(mc(i, j) - ref.covariance(i, j)) <=
              0.2 * std::sqrt(ref.covariance(i, i) * ref.covariance(j, j)));
  }

  TEST_CASE("projection is the identity inside the state space") {
    Rng rng(33);
    const auto basis = gm(7);
    const RVector r = basis->coordinates(random_density(7, rng));
    const ProjectionResult p = positivity_project(r, random_metric(48, rng), *basis);
    CHECK(p.inside);
    CHECK(max_abs(p.r - r) < 1e-8);
  }

  TEST_CASE("isotropic qubit projection rescales the Bloch vector") {
    const auto basis = gm(2);
    RVector r(3);
    r << 0.9, -0.4, 0.7;  // Bloch vector sqrt(2) r, outside the ball
    const ProjectionResult p = positivity_project(r, RMatrix::Identity(3, 3), *basis);
    CHECK_FALSE(p.inside);
    const RVector expect = r * (1.0 / std::sqrt(2.0)) / r.norm();
    CHECK(max_abs(p.r - expect) < 1e-6);
    CHECK(p.kkt <= 1e-7);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(p.rho);
    CHECK(es.eigenvalues().minCoeff() >= -1e-9);
    CHECK(std::abs(p.rho.trace().real() - 1.0) < 1e-12);
  }

  TEST_CASE("anisotropic qubit projection against a Bloch-sphere grid") {
    Rng rng(34);
    const auto basis = gm(2);
    for (int trial = 0; trial < 3; ++trial) {
      RVector r = rng.normal_vector(3);
      r *= 1.5 / r.norm();
      const RMatrix q = random_metric(3, rng);
      const ProjectionResult p = positivity_project(r, q, *basis);
      // The minimizer of a convex cost centred outside the ball lies on its surface.
      double grid = INFINITY;
      const int nt = 1200, np = 2400;
      for (int i = 0; i <= nt; ++i) {
        const double th = kPi * i / nt;
        for (int j = 0; j < np; ++j) {
          const double ph = kTwoPi * j / np;
          RVector x(3);
          x << std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th);
          grid = std::min(grid, cost(x / std::sqrt(2.0), r, q));
        }
      }
      const double ours = cost(p.r, r, q);
      CHECK(ours <= grid + 1e-9);
      CHECK(std::abs(std::sqrt(ours) - std::sqrt(grid)) <= 1e-3);
    }
  }

  TEST_CASE("projection agrees with accelerated projected gradient at d = 7") {
    Rng rng(35);
    const auto basis = gm(7);
    const CMatrix target = sample_state(StateKind::HaarPure, 7, rng);
    RVector r = basis->coordinates(target) + 0.05 * rng.normal_vector(48);
    const RMatrix q = random_metric(48, rng);
    const ProjectionResult p = positivity_project(r, q, *basis);
    const RVector pg = projected_gradient(r, q, *basis, 20000);
    CHECK(trace_distance(p.rho, basis->density(pg)) < 1e-4);
    CHECK(cost(p.r, r, q) <= cost(pg, r, q) * (1.0 + 1e-6));
    CHECK(p.kkt <= 1e-7);
    // Any feasible direction does not decrease the cost.
    const double c0 = cost(p.r, r, q);
    int worse = 0;
    for (int k = 0; k < 100; ++k) {
      const RVector dir = basis->coordinates(random_density(7, rng)) - p.r;
      if (cost(p.r + 1e-4 * dir, r, q) < c0 - 1e-9 * c0) ++worse;
    }
    CHECK(worse == 0);
  }

  TEST_CASE("projection reports non-convergence with its last iterate") {
    const auto basis = gm(2);
    RVector r(3);
    r << 2.0, 0.0, 0.0;
    ProjectionOptions opts;
    opts.max_total = 2;
    try {
      positivity_project(r, RMatrix::Identity(3, 3), *basis, opts);
      FAIL("expected a convergence error");
    } catch (const ConvergenceError<RVector>& e) {
      CHECK(e.kind() == ErrorKind::Convergence);
      CHECK(e.last_iterate().size() == 3);
    }
  }

  TEST_CASE("fidelity") {
    Rng rng(36);
    const CMatrix rho = random_density(16, rng);
    CHECK(fidelity(rho, rho) == doctest::Approx(1.0).epsilon(1e-9));
    CVector a = CVector::Zero(16), b = CVector::Zero(16);
    a(0) = 1.0;
    b(5) = 1.0;
    const CMatrix pa = a * a.adjoint(), pb = b * b.adjoint();
    CHECK(fidelity(pa, pb) == doctest::Approx(0.0));
    CHECK(fidelity(CMatrix::Identity(16, 16) / 16.0, pa) == doctest::Approx(1.0 / 16.0).epsilon(1e-12));
    const CMatrix psi = sample_state(StateKind::HaarPure, 16, rng);
    CHECK(fidelity(psi, rho) == doctest::Approx((psi * rho).trace().real()).epsilon(1e-7));
    CHECK(fidelity(psi, rho) == doctest::Approx(fidelity(rho, psi)).epsilon(1e-9));
    CMatrix bad = pa;
    bad(1, 1) = -0.5;
    bad(0, 0) = 1.5;
    CHECK(error_kind([&] { fidelity(bad, pa); }) == ErrorKind::InvalidArgument);
  }

  TEST_CASE("random state ensembles") {
    Rng rng(37);
    double purity = 0.0, pop = 0.0;
    const int n = 10000;
    for (int k = 0; k < n; ++k) {
      const CMatrix h = sample_state(StateKind::HilbertSchmidt, 2, rng);
      purity += (h * h).trace().real();
      const CMatrix p = sample_state(StateKind::HaarPure, 4, rng);
      pop += p(0, 0).real();
      if (k < 20) {
        CHECK(std::abs(p.trace().real() - 1.0) < 1e-12);
        CHECK(std::abs((p * p).trace().real() - 1.0) < 1e-12);
        Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
        CHECK(es.eigenvalues().minCoeff() >= -1e-12);
        CHECK(std::abs(h.trace().real() - 1.0) < 1e-12);
      }
    }
    CHECK(purity / n == doctest::Approx(2.0 * 2 / (2 * 2 + 1)).epsilon(0.01));  // 2d / (d^2 + 1)
    CHECK(pop / n == doctest::Approx(0.25).epsilon(0.03));
    CHECK(max_abs(sample_state(StateKind::HaarPure, 5, 9) - sample_state(StateKind::HaarPure, 5, 9)) == 0.0);
  }

  TEST_CASE("squeezed cat and spin-coherent states") {
    const SpinSpace s = SpinSpace::cs_ground();
    const CMatrix cat = squeezed_cat_state();
    CHECK(std::abs(cat.trace().real() - 1.0) < 1e-12);
    CHECK(std::abs((cat * cat).trace().real() - 1.0) < 1e-12);
    CHECK((projector(s, 3) * cat).trace().real() == doctest::Approx(0.5).epsilon(1e-12));
    // Coefficients 1/2 on |3,3> and |3,-3>.
    CHECK(std::abs(cat(s.index(3, 3), s.index(3, -3))) == doctest::Approx(0.25).epsilon(1e-12));
    // F=4 block: half of exp(-i Fz^2 / 2) |m_x = 4><m_x = 4| exp(i Fz^2 / 2).
    const AngularMomentum J = angular_momentum(HalfInt(4));
    Eigen::SelfAdjointEigenSolver<CMatrix> ex(J.x);
    const CVector mx4 = ex.eigenvectors().col(8);
    CHECK(ex.eigenvalues()(8) == doctest::Approx(4.0));
    CMatrix sq = CMatrix::Zero(9, 9);
    for (int i = 0; i < 9; ++i) sq(i, i) = std::exp(-0.5 * kI * J.z(i, i) * J.z(i, i));
    const CMatrix block = 0.5 * sq * mx4 * mx4.adjoint() * sq.adjoint();
    CHECK(max_abs(cat.block(s.offset(4), s.offset(4), 9, 9) - block) < 1e-12);

    const Eigen::Vector3d n(0.3, -0.5, 0.8);
    const CMatrix c = spin_coherent_state(3, n);
    const AngularMomentum J3 = angular_momentum(HalfInt(3));
    const Eigen::Vector3d u = n.normalized();
    const CMatrix fn = u.x() * J3.x + u.y() * J3.y + u.z() * J3.z;
    CHECK((fn * c).trace().real() == doctest::Approx(3.0).epsilon(1e-12));
  }
}

TEST_SUITE("estimation") {
  TEST_CASE("end-to-end reconstruction on the default 16-level model") {
    const Model m = build_model(default_config(ScenarioKind::Full16));
    CHECK(m.design.cols() == 255);
    CHECK(m.design.rows() == 2000);
    Rng rng(38);
    const CMatrix psi = sample_state(StateKind::HaarPure, 16, rng);
    const MeasurementRecord clean = synthesize_record(m.series, psi, 0.0, 1, m.filter_ptr());
    ReconstructionOptions opts;
    opts.horizons = log_horizons(60e-6, 2e-3, 8);
    const ReconstructionResult res = reconstruct(clean, m.design, opts, &psi);
    CHECK(res.ml.rank == 255);
    REQUIRE(res.fidelity);
    CHECK(*res.fidelity >= 1.0 - 1e-6);
    REQUIRE(res.trajectory.size() == 8);
    for (size_t k = 1; k < res.trajectory.size(); ++k) CHECK(res.trajectory[k].rank >= res.trajectory[k - 1].rank);
    CHECK(res.trajectory.front().rank < 255);

    // Same record, design expressed in a rotated orthonormal basis.
    RMatrix a(255, 255);
    for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = rng.normal();
    const RMatrix qmat = Eigen::HouseholderQR<RMatrix>(a).householderQ();
    auto rotated = std::make_shared<const HermitianBasis>(m.design.basis->rotated(qmat));
    const DesignMatrix dr = build_design(m.series, rotated, m.filter_ptr());
    MeasurementRecord noisy = simulate_record(m, psi, 5);
    const ReconstructionResult r1 = reconstruct(noisy, m.design), r2 = reconstruct(noisy, dr);
    CHECK(trace_distance(r1.estimate.rho, r2.estimate.rho) <= 1e-7);
    CHECK(r1.estimate.kkt <= 1e-7);
  }

  TEST_CASE("fidelity deficit grows as the SNR drops") {
    const Model m = build_model(default_config(ScenarioKind::F3LightShift));
    const auto rows = run_benchmark(m, {200, 100, 50, 25}, 5, 7, 1);
    std::map<double, double> deficit;
    for (const auto& r : rows) deficit[r.snr] += (1.0 - r.fidelity) / 5.0;
    MESSAGE("deficits " << deficit[200] << " " << deficit[100] << " " << deficit[50] << " " << deficit[25]);
    CHECK(deficit[200] < deficit[100]);
    CHECK(deficit[100] < deficit[50]);
    CHECK(deficit[50] < deficit[25]);
  }
}

TEST_SUITE("estimation") {
  TEST_CASE("projection converges on every horizon of a short record") {
    // Rank-deficient early horizons put the barrier objective at its roundoff floor.
    const Config c = parse_config(
        "[scenario]\nkind = \"f3-lightshift\"\n[record]\nduration_s = 5e-4\nsnr = 100\n"
        "[state]\nkind = \"hilbert-schmidt\"\n");
    const Model m = build_model(c);
    for (std::uint64_t seed : {3, 4, 5, 6}) {
      const CMatrix rho = make_state(c, seed);
      const MeasurementRecord rec = simulate_record(m, rho, 5);
      ReconstructionResult res;
      REQUIRE_NOTHROW(res = reconstruct_record(m, rec, &rho));
      CHECK(res.estimate.kkt <= 1e-7);
      CHECK(*res.fidelity > 0.9);
      CHECK(res.trajectory.size() == default_horizons(m).size());
    }
  }
}
