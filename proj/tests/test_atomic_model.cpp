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
#include "oracles.hpp"
#include "spintomo/atomic_model.hpp"

#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <Eigen/Eigenvalues>

using namespace spintomo;
using namespace spintomo::testing;

namespace {

constexpr double kMHz = kTwoPi * 1e6;

ProbeSettings probe_at(double detuning_mhz, const Eigen::Vector3cd& pol = Eigen::Vector3cd(1, 0, 0),
                       double gamma = kTwoPi * 81.4) {
  return ProbeSettings::make(Line::D1, detuning_mhz * kMHz, pol, gamma);
}

CMatrix sum_loss(const std::vector<JumpOperator>& jumps, int d) {
  CMatrix s = CMatrix::Zero(d, d);
  for (const auto& j : jumps) s += j.op.adjoint() * j.op;
  return s;
}

}  // namespace

TEST_SUITE("atomic_model") {
  TEST_CASE("dipole components obey the magnetic selection rule") {
    const AtomConstants cs = AtomConstants::cesium();
    const DipoleComponents r44 = dipole_raising(cs, Line::D1, 4, 4);
    CHECK(max_abs(r44[2].col(0)) == 0.0);  // q = +1 from m = 4 has no F'=4 partner
    const DipoleComponents r33 = dipole_raising(cs, Line::D1, 3, 3);
    CHECK(max_abs(r33[2].col(0)) == 0.0);
    CHECK(max_abs(r33[0].col(6)) == 0.0);  // q = -1 from m = -3
    CHECK(max_abs(r33[1]) > 0.0);
  }

  TEST_CASE("reduced coupling for D1 F=3 -> F'=3 matches the exact 6j sum") {
    const AtomConstants cs = AtomConstants::cesium();
    const DipoleComponents r = dipole_raising(cs, Line::D1, 3, 3);
    // <3,1|D_{+1}^dag|3,0> = K <3 0; 1 1 | 3 1>.
    const double element = r[2](2, 3).real();
    const double cg = clebsch_gordan(3, 0, 1, 1, 3, 1);
    const auto [sq, sign] = racah_6j({6, 7, 1, 1, 2, 6});  // {F' I J'; J 1 F} in twice-values
    // Phase (-1)^(F'+I+J'+1) = (-1)^(3 + 7/2 + 1/2 + 1) = +1, magnitude sqrt((2J'+1)(2F+1)).
    const double k_oracle = sign * std::sqrt(2.0 * 7.0 * sq.value());
    CHECK(element / cg == doctest::Approx(k_oracle).epsilon(1e-13));
  }

  TEST_CASE("dipole closure: ground and excited completeness") {
    const AtomConstants cs = AtomConstants::cesium();
    for (Line line : {Line::D1, Line::D2}) {
      const LineData& ld = cs.line(line);
      const double jp = ld.j_excited.twice() + 1.0;  // 2J'+1
      for (HalfInt fg : {HalfInt(3), HalfInt(4)}) {
        CMatrix s = CMatrix::Zero(fg.twice() + 1, fg.twice() + 1);
        for (const auto& lev : ld.levels) {
          if (std::abs(lev.F.twice() - fg.twice()) > 2) continue;
          const DipoleComponents r = dipole_raising(cs, line, lev.F, fg);
          for (const CMatrix& q : r) s += q.adjoint() * q;
        }
        CHECK(max_abs(s - (jp / 2.0) * CMatrix::Identity(s.rows(), s.cols())) < 1e-12);
      }
      // Each excited manifold decays with unit total strength and no F'-F'' cross terms.
      for (const auto& a : ld.levels)
        for (const auto& b : ld.levels) {
          CMatrix c = CMatrix::Zero(a.F.twice() + 1, b.F.twice() + 1);
          for (HalfInt fg : {HalfInt(3), HalfInt(4)}) {
            if (std::abs(a.F.twice() - fg.twice()) > 2 || std::abs(b.F.twice() - fg.twice()) > 2) continue;
            const DipoleComponents ra = dipole_raising(cs, line, a.F, fg), rb = dipole_raising(cs, line, b.F, fg);
            for (int q = 0; q < 3; ++q) c += ra[q] * rb[q].adjoint();
          }
          if (a.F == b.F) CHECK(max_abs(c - CMatrix::Identity(c.rows(), c.cols())) < 1e-12);
          else CHECK(max_abs(c) < 1e-12);
        }
    }
  }

  TEST_CASE("light shift becomes Hermitian as the linewidth vanishes") {
    AtomConstants cs = AtomConstants::cesium();
    cs.d1.linewidth = kTwoPi * 1e-3;
    const CMatrix h = light_shift_hamiltonian(probe_at(642.78), cs, SpinSpace::cs_ground());
    CHECK(max_abs(h - h.adjoint()) < 1e-10 * max_abs(h));
  }

  TEST_CASE("x-polarized light shift is a function of Fx^2 on each manifold") {
    const AtomConstants cs = AtomConstants::cesium();
    const ProbeSettings p = probe_at(642.78);
    const SpinSpace f3 = SpinSpace::single(3);
    const CMatrix h = light_shift_hamiltonian(p, cs, f3);
    const AngularMomentum J = angular_momentum(HalfInt(3));
    CHECK(max_abs(h * J.x - J.x * h) < 1e-12 * max_abs(h));
    const BetaCoefficients b = beta_coefficients(p, cs);
    CHECK(b.at(3).residual < 1e-12);
    CHECK(b.at(4).residual < 1e-12);
    CHECK(max_abs(h - h_lightshift_control(0.0, 0.0, b.at(3), p.gamma_sc, 3)) < 1e-9 * max_abs(h));
    // Circular light breaks the {I, Fx^2} form.
    CHECK_THROWS(beta_coefficients(probe_at(642.78, spherical_unit(1)), cs));
  }

  TEST_CASE("beta coefficients at 642.78 MHz") {
    const BetaPair b = beta_coefficients(probe_at(642.78), AtomConstants::cesium()).at(3);
    CHECK(b.beta2.real() == doctest::Approx(6.53).epsilon(0.05 / 6.53));
    CHECK(b.beta0.imag() == doctest::Approx(-0.23).epsilon(0.02 / 0.23));
    CHECK(std::abs(b.beta2.imag() - 0.005) <= 0.002);
  }

  TEST_CASE("beta is independent of intensity and gamma_sc scales with Omega^2") {
    const AtomConstants cs = AtomConstants::cesium();
    const BetaPair b1 = beta_coefficients(probe_at(642.78, {1, 0, 0}, 1.0), cs).at(3);
    const BetaPair b2 = beta_coefficients(probe_at(642.78, {1, 0, 0}, 2.0), cs).at(3);
    CHECK(std::abs(b1.beta0 - b2.beta0) < 1e-15);
    CHECK(std::abs(b1.beta2 - b2.beta2) < 1e-15);
    const double g1 = ProbeSettings::gamma_from_rabi(1e8, 642.78 * kMHz, cs.d1.linewidth);
    const double g2 = ProbeSettings::gamma_from_rabi(std::sqrt(2.0) * 1e8, 642.78 * kMHz, cs.d1.linewidth);
    CHECK(g2 == doctest::Approx(2.0 * g1).epsilon(1e-14));
    const ProbeSettings p = probe_at(642.78);
    CHECK(ProbeSettings::gamma_from_rabi(p.rabi(cs), p.detuning, cs.d1.linewidth) ==
          doctest::Approx(p.gamma_sc).epsilon(1e-13));
  }

  TEST_CASE("magic detuning of the F=3 scalar light shift") {
    const AtomConstants cs = AtomConstants::cesium();
    const double tol = kTwoPi * 1e3;
    const double root = find_magic_detuning(cs, Line::D1, 3, tol);
    CHECK(std::abs(root / kMHz - 291.89) <= 0.5);
    const double half = find_magic_detuning(cs, Line::D1, 3, 0.5 * tol);
    CHECK(std::abs(half - root) <= tol);
    // |Re beta0| at the root against its maximum between the F'=3 and F'=4 resonances.
    ProbeSettings p = probe_at(0.0);
    double peak = 0.0;
    for (int k = 1; k < 200; ++k) {
      p.detuning = (10.0 * 4.575 + (1167.68 - 20.0 * 4.575) * k / 200.0) * kMHz;
      peak = std::max(peak, std::abs(beta_coefficients(p, cs).at(3).beta0.real()));
    }
    p.detuning = root;
    const BetaPair b = beta_coefficients(p, cs).at(3);
    CHECK(std::abs(b.beta0.real()) <= 1e-6 * peak);
    CHECK(b.beta2.real() > 0.0);
  }

  TEST_CASE("jump rates satisfy the optical theorem") {
    const AtomConstants cs = AtomConstants::cesium();
    const SpinSpace s = SpinSpace::cs_ground();
    for (double det : {642.78, 291.9, -400.0})
      for (const Eigen::Vector3cd& pol : {Eigen::Vector3cd(1, 0, 0), spherical_unit(1), Eigen::Vector3cd(0, 1, 0)}) {
        const ProbeSettings p = probe_at(det, pol);
        const CMatrix h = light_shift_hamiltonian(p, cs, s);
        const CMatrix loss = sum_loss(jump_operators(p, cs, s), s.dim());
        CHECK(max_abs(loss - kI * (h - h.adjoint())) < 1e-10 * max_abs(loss));
      }
  }

  TEST_CASE("x-polarized scattering rates are symmetric under m -> -m") {
    const AtomConstants cs = AtomConstants::cesium();
    const SpinSpace s = SpinSpace::cs_ground();
    const CMatrix loss = sum_loss(jump_operators(probe_at(642.78), cs, s), s.dim());
    for (int F : {3, 4})
      for (int m = 1; m <= F; ++m)
        CHECK(loss(s.index(F, m), s.index(F, m)).real() ==
              doctest::Approx(loss(s.index(F, -m), s.index(F, -m)).real()).epsilon(1e-12));
  }

  TEST_CASE("total scattering from the stretched state matches the direct perturbative sum") {
    const AtomConstants cs = AtomConstants::cesium();
    const SpinSpace s = SpinSpace::cs_ground();
    const ProbeSettings p = probe_at(642.78);
    const double G = cs.d1.linewidth, rabi = p.rabi(cs);
    const CMatrix loss = sum_loss(jump_operators(p, cs, s), s.dim());
    for (int F : {3, 4}) {
      double direct = 0.0;
      for (const auto& lev : cs.d1.levels) {
        const double delta = p.transition_detuning(cs, lev.F, F);
        const CMatrix a = dipole_dot(dipole_raising(cs, Line::D1, lev.F, F), p.polarization);
        direct += G * 0.25 * rabi * rabi * a.col(0).squaredNorm() / (delta * delta + 0.25 * G * G);
      }
      const int i = s.index(F, F);
      CHECK(loss(i, i).real() == doctest::Approx(direct).epsilon(1e-12));
    }
  }
}

TEST_SUITE("atomic_model") {
  TEST_CASE("bias Hamiltonian in the rotating frame") {
    AtomConstants cs = AtomConstants::cesium();
    RfUwDrive d;
    d.omega_0 = kMHz;
    const SpinSpace s = SpinSpace::cs_ground();
    const CMatrix h = h0_rwa(d, cs);
    CHECK(max_abs(h - h.adjoint()) == 0.0);
    CHECK(h.isDiagonal(0.0));
    // Resonant microwave: |3,3> and |4,4> are degenerate in the frame.
    CHECK(h(s.index(4, 4), s.index(4, 4)).real() == doctest::Approx(h(s.index(3, 3), s.index(3, 3)).real()).epsilon(1e-12));
    // Degenerate limit g_r = 1, no quadratic Zeeman, no RF detuning.
    cs.g_upper = -cs.g_lower;
    cs.g_i = cs.g_e;
    d.uw_detuning = kTwoPi * 2e3;
    const CMatrix hd = h0_rwa(d, cs);
    const CMatrix expect = -0.5 * d.uw_detuning * (projector(s, 4) - projector(s, 3));
    CHECK(max_abs(hd - expect) < 1e-9);
  }

  TEST_CASE("RF Hamiltonian limits") {
    const AtomConstants cs = AtomConstants::cesium();
    RfUwDrive d;
    d.omega_0 = kMHz;
    RfUwControls zero;
    CHECK(max_abs(h_rf_rwa(d, cs, zero)) == 0.0);
    AtomConstants sym = cs;
    sym.g_upper = -sym.g_lower;
    d.omega_0 = 1e4 * kMHz;
    RfUwControls u;
    u.omega_x = kTwoPi * 15e3;
    u.omega_y = kTwoPi * 11e3;
    u.phi_x = 0.4;
    u.phi_y = -2.2;
    const SpinSpace s = SpinSpace::cs_ground();
    const AngularMomentum f3 = angular_momentum(s, 3), f4 = angular_momentum(s, 4);
    const CMatrix first = 0.5 * u.omega_x * (std::cos(u.phi_x) * (f4.x - f3.x) - std::sin(u.phi_x) * (f4.y + f3.y)) +
                          0.5 * u.omega_y * (std::cos(u.phi_y) * (f4.y - f3.y) + std::sin(u.phi_y) * (f4.x + f3.x));
    CHECK(max_abs(h_rf_rwa(d, sym, u) - first) < 1e-6 * max_abs(first));
    CHECK(max_abs(h_rf_rwa_first_order(d, sym, u) - first) < 1e-12 * max_abs(first));
  }

  TEST_CASE("second-order RF frame Hamiltonian beats first order against the lab frame") {
    const AtomConstants cs = AtomConstants::cesium();
    RfUwDrive d;
    d.omega_0 = kMHz;
    RfUwControls u;
    u.omega_x = u.omega_y = kTwoPi * 15e3;  // Omega / omega_RF = 0.015
    u.phi_x = 0.7;
    u.phi_y = -1.9;
    const double T = 100e-6;
    const CMatrix exact = lab_frame_rf_propagator(d, cs, u, T, 200000);
    const CMatrix h0 = h0_rwa(d, cs);
    const CMatrix u2 = (CMatrix(-kI * T * (h0 + h_rf_rwa(d, cs, u)))).exp();
    const CMatrix u1 = (CMatrix(-kI * T * (h0 + h_rf_rwa_first_order(d, cs, u)))).exp();
    const double e2 = (u2 - exact).norm(), e1 = (u1 - exact).norm();
    MESSAGE("first-order error " << e1 << ", second-order error " << e2);
    CHECK(e2 < e1);
    CHECK(e2 < 0.1 * e1);
  }

  TEST_CASE("microwave Hamiltonian") {
    const AtomConstants cs = AtomConstants::cesium();
    RfUwDrive d;
    d.omega_0 = kMHz;
    RfUwControls u;
    CHECK(max_abs(h_uw_rwa(d, cs, u)) == 0.0);
    u.omega_uw = kTwoPi * 33e3;
    const SpinSpace s = SpinSpace::cs_ground();
    const CMatrix h = h_uw_rwa(d, cs, u);
    const int a = s.index(3, 3), b = s.index(4, 4);
    CHECK(h(b, a).real() == doctest::Approx(0.5 * u.omega_uw).epsilon(1e-14));
    CHECK(h(a, b).real() == doctest::Approx(0.5 * u.omega_uw).epsilon(1e-14));
    const double w = d.omega_rf();
    for (int m = -3; m <= 2; ++m) {
      const double cg = clebsch_gordan(3, m, 1, 1, 4, m + 1);
      const double shift = u.omega_uw * u.omega_uw * cg * cg / (8.0 * w * (3.0 - m));
      CHECK(h(s.index(3, m), s.index(3, m)).real() == doctest::Approx(shift).epsilon(1e-12));
      CHECK(h(s.index(4, m + 1), s.index(4, m + 1)).real() == doctest::Approx(-shift).epsilon(1e-12));
    }
    CHECK(h(s.index(3, 3), s.index(3, 3)) == cplx(0.0));
  }

  TEST_CASE("rotating-frame light shift") {
    const AtomConstants cs = AtomConstants::cesium();
    const SpinSpace s = SpinSpace::cs_ground();
    const double magic = find_magic_detuning(cs, Line::D1, 3);
    const ProbeSettings p = ProbeSettings::make(Line::D1, magic, Eigen::Vector3cd(1, 0, 0), kTwoPi * 410.7);
    const BetaCoefficients beta = beta_coefficients(p, cs);
    const CMatrix h = light_shift_rwa(beta, p.gamma_sc, s);
    CHECK(h.isDiagonal(0.0));
    const CMatrix re = hermitian_part(h);
    CHECK(std::abs((projector(s, 3) * re).trace().real() / 7.0) < 1e-6 * p.gamma_sc);
    BetaCoefficients scalar = beta;
    for (auto& kv : scalar.per_manifold) kv.second.beta2 = 0.0;
    const CMatrix hs = light_shift_rwa(scalar, p.gamma_sc, s);
    CHECK(max_abs(hs - p.gamma_sc * (beta.at(3).beta0 * projector(s, 3) + beta.at(4).beta0 * projector(s, 4))) < 1e-9);
  }

  TEST_CASE("light-shift control Hamiltonian on F=3") {
    const BetaPair beta{cplx(0.0, -0.23), cplx(6.53, 0.005), 0.0};
    const AngularMomentum J = angular_momentum(HalfInt(3));
    const double om = kTwoPi * 17.5e3, g = kTwoPi * 81.4;
    CHECK(max_abs(h_lightshift_control(0.0, om, BetaPair{}, 0.0, 3) - om * J.x) < 1e-9);
    const CMatrix h = h_lightshift_control(0.5 * kPi, om, beta, g, 3);
    CHECK(max_abs(hermitian_part(h) - om * J.y - g * beta.beta2.real() * (J.x * J.x - 4.0 * CMatrix::Identity(7, 7))) <
          1e-8);
    // phi = 0: eigenvalues Omega m + g Re b2 (m^2 - 4) exactly.
    const CMatrix h0 = hermitian_part(h_lightshift_control(0.0, om, beta, g, 3));
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h0);
    std::vector<double> expect;
    for (int m = -3; m <= 3; ++m) expect.push_back(om * m + g * beta.beta2.real() * (m * m - 4.0));
    std::sort(expect.begin(), expect.end());
    for (int k = 0; k < 7; ++k) CHECK(es.eigenvalues()(k) == doctest::Approx(expect[k]).epsilon(1e-12));
    // General phase: Hermitian solver against the general complex eigensolver.
    const CMatrix hg = hermitian_part(h_lightshift_control(1.1, om, beta, g, 3));
    Eigen::SelfAdjointEigenSolver<CMatrix> e1(hg);
    Eigen::ComplexEigenSolver<CMatrix> e2(hg);
    std::vector<double> v2;
    for (int k = 0; k < 7; ++k) v2.push_back(e2.eigenvalues()(k).real());
    std::sort(v2.begin(), v2.end());
    for (int k = 0; k < 7; ++k) CHECK(e1.eigenvalues()(k) == doctest::Approx(v2[k]).epsilon(1e-10));
  }

  TEST_CASE("phase-averaged dissipator") {
    const AtomConstants cs = AtomConstants::cesium();
    const SpinSpace s = SpinSpace::cs_ground();
    const double magic = find_magic_detuning(cs, Line::D1, 3);
    const ProbeSettings p = ProbeSettings::make(Line::D1, magic, Eigen::Vector3cd(1, 0, 0), kTwoPi * 410.7);
    const std::vector<CMatrix> ops = lindblad_operators(jump_operators(p, cs, s), s);
    const CMatrix G = rf_frame_generator(s, cs);
    CMatrix lab = CMatrix::Zero(256, 256), lab_loss = CMatrix::Zero(16, 16);
    for (const CMatrix& l : ops) {
      lab += kron(l, l.conjugate());
      lab_loss += l.adjoint() * l;
    }
    const AveragedDissipator still = rotating_frame_dissipator(ops, G, 0.0);
    CHECK(max_abs(still.sandwich - lab) < 1e-15 * max_abs(lab) + 1e-300);
    CHECK(max_abs(still.loss - lab_loss) < 1e-15 * max_abs(lab_loss) + 1e-300);
    const AveragedDissipator a64 = rotating_frame_dissipator(ops, G, kMHz, 64);
    const AveragedDissipator a128 = rotating_frame_dissipator(ops, G, kMHz, 128);
    CHECK(max_abs(a64.sandwich - a128.sandwich) < 1e-10 * max_abs(a128.sandwich));
    // Trace action: Tr D(rho) = Tr(rho (S^dag(1) - loss)); non-positive spectrum.
    CMatrix dual = CMatrix::Zero(16, 16);
    for (int i = 0; i < 16; ++i)
      for (int j = 0; j < 16; ++j) {
        cplx t = 0.0;
        for (int k = 0; k < 16; ++k) t += a64.sandwich(k * 16 + k, i * 16 + j);
        dual(j, i) = t;
      }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(dual - a64.loss));
    CHECK(es.eigenvalues().maxCoeff() <= 1e-12 * max_abs(a64.loss));
    // The averaged loss matches the anti-Hermitian part of the rotating-frame light shift.
    const CMatrix h = light_shift_rwa(beta_coefficients(p, cs), p.gamma_sc, s);
    CHECK(max_abs(-0.5 * a64.loss - (h - h.adjoint()) / (2.0 * kI)) < 1e-12 * max_abs(a64.loss));
  }
}
