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

#include <array>
#include <functional>
#include <map>
#include <vector>

namespace spintomo {

enum class Line { D1, D2 };

struct ExcitedLevel {
  HalfInt F;
  double energy = 0.0;  // rad/s, relative to the reference excited level
};

struct LineData {
  HalfInt j_excited;
  double linewidth = 0.0;  // Gamma, rad/s
  std::vector<ExcitedLevel> levels;
  HalfInt reference_F;  // Delta_c is measured on lower ground F -> this F'
  double oscillator_strength = 1.0;
};

// Alkali ground state (J = 1/2) with two hyperfine manifolds.
struct AtomConstants {
  HalfInt nuclear_spin = HalfInt::from_twice(7);
  HalfInt j_ground = HalfInt::from_twice(1);
  double hyperfine_splitting = 0.0;  // omega_HF, rad/s
  double g_e = 0.0, g_i = 0.0, g_lower = 0.0, g_upper = 0.0;
  LineData d1, d2;

  static AtomConstants cesium();
  HalfInt lower_F() const { return nuclear_spin - j_ground; }
  HalfInt upper_F() const { return nuclear_spin + j_ground; }
  double g_r() const;
  const LineData& line(Line l) const { return l == Line::D1 ? d1 : d2; }
  double ground_energy(HalfInt F) const;
  const ExcitedLevel& excited(Line l, HalfInt F) const;
  // Quadratic Zeeman coefficient for a bias Larmor frequency Omega_0 = |g_upper| mu_B B0.
  double quadratic_zeeman(double omega_0) const;
  // |3,3> <-> |4,4> transition frequency in the bias field.
  double stretched_transition(double omega_0) const;
};

struct ProbeSettings {
  Line line = Line::D1;
  double detuning = 0.0;  // Delta_c, rad/s
  Eigen::Vector3cd polarization = Eigen::Vector3cd(1, 0, 0);
  double gamma_sc = 0.0;  // rad/s

  static ProbeSettings make(Line line, double detuning, const Eigen::Vector3cd& polarization, double gamma_sc);
  // Same gamma_sc for a given intensity; the Rabi frequency follows from
  // gamma_sc = Omega^2 Gamma / (4 Delta_c^2).
  double rabi(const AtomConstants& atom) const;
  static double gamma_from_rabi(double rabi, double detuning, double linewidth);
  // Delta_{F'F} = omega_laser - omega(F -> F').
  double transition_detuning(const AtomConstants& atom, HalfInt f_excited, HalfInt f_ground) const;
};

Eigen::Vector3cd spherical_unit(int q);  // e_{+1} = -(x+iy)/sqrt2, e_0 = z, e_{-1} = (x-iy)/sqrt2
Eigen::Vector3cd polarization_from_name(const std::string& name);

struct BetaPair {
  cplx beta0;
  cplx beta2;
  double residual = 0.0;  // relative residual of the {I, Fx^2} decomposition
};

struct BetaCoefficients {
  std::map<HalfInt, BetaPair> per_manifold;
  const BetaPair& at(HalfInt F) const;
};

// Raising components e_q . D^dag, (2F'+1) x (2F+1), indexed by q+1.
using DipoleComponents = std::array<CMatrix, 3>;
DipoleComponents dipole_raising(const AtomConstants& atom, Line line, HalfInt f_excited, HalfInt f_ground);
// D^dag . eps = sum_q (e_q^* . eps) (e_q . D^dag).
CMatrix dipole_dot(const DipoleComponents& raising, const Eigen::Vector3cd& eps);

// Block diagonal over the manifolds of `space`.
CMatrix light_shift_hamiltonian(const ProbeSettings& probe, const AtomConstants& atom, const SpinSpace& space);
BetaCoefficients beta_coefficients(const ProbeSettings& probe, const AtomConstants& atom);
double find_magic_detuning(const AtomConstants& atom, Line line, HalfInt F, double tolerance = kTwoPi * 1e3);

struct JumpOperator {
  int q = 0;
  HalfInt f_to, f_from;
  CMatrix op;  // includes sqrt(Gamma); rates are |<b|op|a>|^2
};

std::vector<JumpOperator> jump_operators(const ProbeSettings& probe, const AtomConstants& atom, const SpinSpace& space);
// Lindblad operators: per q, the elastic channels of all manifolds are summed
// into one operator (keeps coherence transfer); inelastic channels stay separate.
std::vector<CMatrix> lindblad_operators(const std::vector<JumpOperator>& jumps, const SpinSpace& space);

// Polarization-tensor components of the light shift on ground manifold F:
// rank-1 (Fz) coefficient of [A(e_-) - A(e_+)]/2 and rank-2 coefficient of
// [A(d_+) - A(d_-)]/2 on (FxFy+FyFx)/2, with A = (eps^* . D)(D^dag . eps).
double vector_coupling(const AtomConstants& atom, Line line, HalfInt f_excited, HalfInt f_ground);
double tensor_coupling(const AtomConstants& atom, Line line, HalfInt f_excited, HalfInt f_ground);

struct RfUwControls {
  double omega_x = 0.0, omega_y = 0.0, omega_uw = 0.0;
  double phi_x = 0.0, phi_y = 0.0, phi_uw = 0.0;
};

struct RfUwDrive {
  double omega_0 = 0.0;  // bias Larmor frequency
  double rf_detuning = 0.0;
  double uw_detuning = 0.0;
  double omega_x = 0.0, omega_y = 0.0, omega_uw = 0.0;
  std::function<RfUwControls(double)> controls;  // defaults to constant amplitudes, zero phases

  double omega_rf() const { return omega_0 + rf_detuning; }
  RfUwControls at(double t) const;
};

CMatrix h0_rwa(const RfUwDrive& drive, const AtomConstants& atom);
CMatrix h_rf_rwa(const RfUwDrive& drive, const AtomConstants& atom, const RfUwControls& u);
CMatrix h_rf_rwa(const RfUwDrive& drive, const AtomConstants& atom, double t);
CMatrix h_rf_rwa_first_order(const RfUwDrive& drive, const AtomConstants& atom, const RfUwControls& u);
CMatrix h_uw_rwa(const RfUwDrive& drive, const AtomConstants& atom, const RfUwControls& u);
CMatrix h_uw_rwa(const RfUwDrive& drive, const AtomConstants& atom, double t);
CMatrix light_shift_rwa(const BetaCoefficients& beta, double gamma_sc, const SpinSpace& space);

// Omega_x cos(phi) Fx + Omega_y sin(phi) Fy + gamma_sc [beta0 I + beta2 (Fx^2 - F(F+1)/3)].
CMatrix h_lightshift_control(double phi, double omega_lx, double omega_ly, const BetaPair& beta, double gamma_sc,
                             HalfInt F);
inline CMatrix h_lightshift_control(double phi, double omega_l, const BetaPair& beta, double gamma_sc, HalfInt F) {
  return h_lightshift_control(phi, omega_l, omega_l, beta, gamma_sc, F);
}

struct AveragedDissipator {
  CMatrix sandwich;  // phase average of sum_L L kron conj(L), row-major vec representation
  CMatrix loss;      // phase average of sum_L L^dag L
};

// Average over n_phases uniform samples of one period of U(t) = exp(-i omega t G)
// applied as U^dag L U; G must be diagonal with integer spectrum differences.
AveragedDissipator rotating_frame_dissipator(const std::vector<CMatrix>& lindblad_ops, const CMatrix& frame_generator,
                                             double omega, int n_phases = 64);
// The RF frame generator Fz^(4) - Fz^(3) on the full ground space.
CMatrix rf_frame_generator(const SpinSpace& space, const AtomConstants& atom);

}  // namespace spintomo
