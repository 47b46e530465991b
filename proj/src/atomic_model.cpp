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

#include "spintomo/atomic_model.hpp"

#include <algorithm>
#include <cmath>

namespace spintomo {

namespace {

constexpr double kMHz = kTwoPi * 1e6;

bool couples(HalfInt a, HalfInt b, HalfInt c) {
  const int ta = a.twice(), tb = b.twice(), tc = c.twice();
  return (ta + tb + tc) % 2 == 0 && tc <= ta + tb && tc >= std::abs(ta - tb);
}

}  // namespace

AtomConstants AtomConstants::cesium() {
  AtomConstants a;
  a.hyperfine_splitting = 9192.631770 * kMHz;
  a.g_e = 2.0023;
  a.g_i = -0.0004;
  a.g_lower = 0.2499;
  a.g_upper = -0.2507;
  a.d1.j_excited = HalfInt::from_twice(1);
  a.d1.linewidth = 4.575 * kMHz;
  a.d1.levels = {{HalfInt(3), 0.0}, {HalfInt(4), 1167.68 * kMHz}};
  a.d1.reference_F = HalfInt(3);
  a.d2.j_excited = HalfInt::from_twice(3);
  a.d2.linewidth = 5.234 * kMHz;
  a.d2.levels = {{HalfInt(2), -151.2247 * kMHz},
                 {HalfInt(3), 0.0},
                 {HalfInt(4), 201.2871 * kMHz},
                 {HalfInt(5), 452.3787 * kMHz}};
  a.d2.reference_F = HalfInt(3);
  return a;
}

double AtomConstants::g_r() const { return std::abs(g_upper / g_lower); }

double AtomConstants::ground_energy(HalfInt F) const {
  if (F == lower_F()) return 0.0;
  if (F == upper_F()) return hyperfine_splitting;
  throw invalid_argument("F=" + F.str() + " is not a ground manifold");
}

const ExcitedLevel& AtomConstants::excited(Line l, HalfInt F) const {
  for (const auto& lev : line(l).levels)
    if (lev.F == F) return lev;
  throw invalid_argument("no excited level F'=" + F.str() + " on this line");
}

double AtomConstants::quadratic_zeeman(double omega_0) const {
  const double mu_b_field = omega_0 / std::abs(g_upper);
  const double x = (g_e - g_i) * mu_b_field / hyperfine_splitting;
  const double n = nuclear_spin.twice() + 1.0;
  return x * x * hyperfine_splitting / (n * n);
}

double AtomConstants::stretched_transition(double omega_0) const {
  return hyperfine_splitting + (4.0 + 3.0 * g_r()) * omega_0 + 7.0 * quadratic_zeeman(omega_0);
}

ProbeSettings ProbeSettings::make(Line line, double detuning, const Eigen::Vector3cd& polarization, double gamma_sc) {
  const double n = polarization.norm();
  if (n == 0.0) throw invalid_argument("zero polarization vector");
  if (gamma_sc < 0.0) throw invalid_argument("negative scattering rate");
  ProbeSettings p;
  p.line = line;
  p.detuning = detuning;
  p.polarization = polarization / n;
  p.gamma_sc = gamma_sc;
  return p;
}

double ProbeSettings::rabi(const AtomConstants& atom) const {
  const LineData& ld = atom.line(line);
  return std::sqrt(4.0 * detuning * detuning * gamma_sc / ld.linewidth);
}

double ProbeSettings::gamma_from_rabi(double rabi, double detuning, double linewidth) {
  return rabi * rabi * linewidth / (4.0 * detuning * detuning);
}

double ProbeSettings::transition_detuning(const AtomConstants& atom, HalfInt f_excited, HalfInt f_ground) const {
  const LineData& ld = atom.line(line);
  const double e_ref = atom.excited(line, ld.reference_F).energy;
  return detuning - (atom.excited(line, f_excited).energy - e_ref) + (atom.ground_energy(f_ground) - 0.0);
}

Eigen::Vector3cd spherical_unit(int q) {
  const double s = 1.0 / std::sqrt(2.0);
  switch (q) {
    case 1: return Eigen::Vector3cd(-s, -kI * s, 0.0);
    case 0: return Eigen::Vector3cd(0.0, 0.0, 1.0);
    case -1: return Eigen::Vector3cd(s, -kI * s, 0.0);
    default: throw invalid_argument("spherical index must be -1, 0 or 1");
  }
}

Eigen::Vector3cd polarization_from_name(const std::string& name) {
  if (name == "x") return {1.0, 0.0, 0.0};
  if (name == "y") return {0.0, 1.0, 0.0};
  if (name == "z") return {0.0, 0.0, 1.0};
  if (name == "sigma+") return spherical_unit(1);
  if (name == "sigma-") return spherical_unit(-1);
  throw invalid_argument("unknown polarization '" + name + "' (x, y, z, sigma+, sigma-)");
}

const BetaPair& BetaCoefficients::at(HalfInt F) const {
  auto it = per_manifold.find(F);
  if (it == per_manifold.end()) throw invalid_argument("no beta coefficients for F=" + F.str());
  return it->second;
}

DipoleComponents dipole_raising(const AtomConstants& atom, Line line, HalfInt f_excited, HalfInt f_ground) {
  const LineData& ld = atom.line(line);
  const HalfInt I = atom.nuclear_spin, J = atom.j_ground, Jp = ld.j_excited;
  if (!couples(I, Jp, f_excited)) throw invalid_argument("F'=" + f_excited.str() + " not allowed for this line");
  if (!couples(I, J, f_ground)) throw invalid_argument("F=" + f_ground.str() + " not a ground manifold");
  const int phase_twice = f_excited.twice() + I.twice() + Jp.twice() + 2;
  const double sign = (phase_twice / 2) % 2 ? -1.0 : 1.0;
  const double k = sign * std::sqrt((Jp.twice() + 1.0) * (f_ground.twice() + 1.0)) *
                   wigner6j(f_excited, I, Jp, J, HalfInt(1), f_ground);
  DipoleComponents out;
  const int ne = f_excited.twice() + 1, ng = f_ground.twice() + 1;
  for (int q = -1; q <= 1; ++q) {
    CMatrix m = CMatrix::Zero(ne, ng);
    for (int j = 0; j < ng; ++j) {
      const HalfInt mg = HalfInt::from_twice(f_ground.twice() - 2 * j);
      const HalfInt me = mg + HalfInt(q);
      if (std::abs(me.twice()) > f_excited.twice()) continue;
      const int i = (f_excited.twice() - me.twice()) / 2;
      m(i, j) = k * clebsch_gordan(f_ground, mg, HalfInt(1), HalfInt(q), f_excited, me);
    }
    out[q + 1] = m;
  }
  return out;
}

CMatrix dipole_dot(const DipoleComponents& raising, const Eigen::Vector3cd& eps) {
  CMatrix out = CMatrix::Zero(raising[0].rows(), raising[0].cols());
  for (int q = -1; q <= 1; ++q) out += spherical_unit(q).dot(eps) * raising[q + 1];  // dot() conjugates the left
  return out;
}

namespace {

// Sum over F' of A^dag A / (Delta + i Gamma/2), times Delta_c^2 s / Gamma, on one manifold.
CMatrix light_shift_block(const ProbeSettings& probe, const AtomConstants& atom, HalfInt F) {
  const LineData& ld = atom.line(probe.line);
  const int n = F.twice() + 1;
  CMatrix h = CMatrix::Zero(n, n);
  for (const auto& lev : ld.levels) {
    if (!couples(lev.F, HalfInt(1), F)) continue;
    const double delta = probe.transition_detuning(atom, lev.F, F);
    if (delta == 0.0) throw numerical_error("probe is resonant with F=" + F.str() + " -> F'=" + lev.F.str());
    const CMatrix a = dipole_dot(dipole_raising(atom, probe.line, lev.F, F), probe.polarization);
    h += (a.adjoint() * a) / cplx(delta, 0.5 * ld.linewidth);
  }
  return h * (probe.detuning * probe.detuning * ld.oscillator_strength / ld.linewidth);
}

}  // namespace

CMatrix light_shift_hamiltonian(const ProbeSettings& probe, const AtomConstants& atom, const SpinSpace& space) {
  CMatrix h = CMatrix::Zero(space.dim(), space.dim());
  for (HalfInt F : space.manifolds()) {
    const int off = space.offset(F), n = F.twice() + 1;
    h.block(off, off, n, n) = probe.gamma_sc * light_shift_block(probe, atom, F);
  }
  return h;
}

BetaCoefficients beta_coefficients(const ProbeSettings& probe, const AtomConstants& atom) {
  BetaCoefficients out;
  for (HalfInt F : {atom.lower_F(), atom.upper_F()}) {
    const CMatrix h = light_shift_block(probe, atom, F);
    const int n = F.twice() + 1;
    const CMatrix id = CMatrix::Identity(n, n);
    const AngularMomentum J = angular_momentum(F);
    const CMatrix fx2 = J.x * J.x;
    Eigen::Matrix2d gram;
    gram << n, fx2.trace().real(), fx2.trace().real(), (fx2 * fx2).trace().real();
    const Eigen::Vector2cd rhs(h.trace(), (fx2 * h).trace());
    const Eigen::Vector2cd c = gram.cast<cplx>().inverse() * rhs;
    const double scale = h.norm();
    const double residual = scale > 0 ? (h - c(0) * id - c(1) * fx2).norm() / scale : 0.0;
    if (residual > 1e-8)
      throw Error(ErrorKind::ModelInconsistency,
                  "light shift on F=" + F.str() + " is not of the {I, Fx^2} form (residual " +
                      std::to_string(residual) + "); the beta form needs x-linear polarization");
    const double ff = F.value() * (F.value() + 1.0);
    out.per_manifold[F] = BetaPair{c(0) + c(1) * ff / 3.0, c(1), residual};
  }
  return out;
}

double find_magic_detuning(const AtomConstants& atom, Line line, HalfInt F, double tolerance) {
  const LineData& ld = atom.line(line);
  ProbeSettings probe = ProbeSettings::make(line, 1.0, Eigen::Vector3cd(1, 0, 0), 0.0);
  auto re_beta0 = [&](double dc) {
    probe.detuning = dc;
    return beta_coefficients(probe, atom).at(F).beta0.real();
  };
  const double e_ref = atom.excited(line, ld.reference_F).energy;
  std::vector<double> resonances;
  for (const auto& lev : ld.levels)
    if (couples(lev.F, HalfInt(1), F)) resonances.push_back(lev.energy - e_ref - atom.ground_energy(F));
  std::sort(resonances.begin(), resonances.end());
  const double margin = 10.0 * ld.linewidth;
  for (size_t k = 0; k + 1 < resonances.size(); ++k) {
    const double lo_edge = resonances[k] + margin, hi_edge = resonances[k + 1] - margin;
    if (!(hi_edge > lo_edge)) continue;
    const int n = 2000;
    double a = lo_edge, fa = re_beta0(a);
    for (int i = 1; i <= n; ++i) {
      const double b = lo_edge + (hi_edge - lo_edge) * i / n;
      const double fb = re_beta0(b);
      if ((fa < 0) != (fb < 0)) {
        double lo = a, hi = b, flo = fa;
        while (hi - lo > tolerance) {
          const double mid = 0.5 * (lo + hi);
          const double fm = re_beta0(mid);
          if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
          } else {
            hi = mid;
          }
        }
        return 0.5 * (lo + hi);
      }
      a = b;
      fa = fb;
    }
  }
  throw Error(ErrorKind::NotFound, "no sign change of Re beta0 for F=" + F.str() + " between excited levels");
}

std::vector<JumpOperator> jump_operators(const ProbeSettings& probe, const AtomConstants& atom, const SpinSpace& space) {
  const LineData& ld = atom.line(probe.line);
  const double rabi = probe.rabi(atom) * std::sqrt(ld.oscillator_strength);
  std::vector<JumpOperator> out;
  for (HalfInt fa : space.manifolds()) {
    for (HalfInt fb : space.manifolds()) {
      for (int q = -1; q <= 1; ++q) {
        CMatrix w = CMatrix::Zero(fb.twice() + 1, fa.twice() + 1);
        for (const auto& lev : ld.levels) {
          if (!couples(lev.F, HalfInt(1), fa) || !couples(lev.F, HalfInt(1), fb)) continue;
          const double delta = probe.transition_detuning(atom, lev.F, fa);
          if (delta == 0.0) throw numerical_error("probe is resonant with F=" + fa.str() + " -> F'=" + lev.F.str());
          const CMatrix up = dipole_dot(dipole_raising(atom, probe.line, lev.F, fa), probe.polarization);
          const CMatrix down = dipole_raising(atom, probe.line, lev.F, fb)[q + 1].adjoint();
          w += (0.5 * rabi / cplx(delta, 0.5 * ld.linewidth)) * (down * up);
        }
        out.push_back({q, fb, fa, embed_block(std::sqrt(ld.linewidth) * w, fb, fa, space)});
      }
    }
  }
  return out;
}

std::vector<CMatrix> lindblad_operators(const std::vector<JumpOperator>& jumps, const SpinSpace& space) {
  std::vector<CMatrix> out;
  for (int q = -1; q <= 1; ++q) {
    CMatrix elastic = CMatrix::Zero(space.dim(), space.dim());
    for (const auto& j : jumps)
      if (j.q == q && j.f_to == j.f_from) elastic += j.op;
    out.push_back(elastic);
    for (const auto& j : jumps)
      if (j.q == q && j.f_to != j.f_from) out.push_back(j.op);
  }
  return out;
}

namespace {

CMatrix polarizability_projection(const AtomConstants& atom, Line line, HalfInt fe, HalfInt fg,
                                  const Eigen::Vector3cd& e_plus, const Eigen::Vector3cd& e_minus) {
  const DipoleComponents r = dipole_raising(atom, line, fe, fg);
  const CMatrix ap = dipole_dot(r, e_plus), am = dipole_dot(r, e_minus);
  return 0.5 * (ap.adjoint() * ap - am.adjoint() * am);
}

}  // namespace

double vector_coupling(const AtomConstants& atom, Line line, HalfInt f_excited, HalfInt f_ground) {
  const CMatrix m = polarizability_projection(atom, line, f_excited, f_ground, spherical_unit(-1), spherical_unit(1));
  const CMatrix fz = angular_momentum(f_ground).z;
  const double norm = (fz * fz).trace().real();
  return norm > 0 ? (m * fz).trace().real() / norm : 0.0;
}

double tensor_coupling(const AtomConstants& atom, Line line, HalfInt f_excited, HalfInt f_ground) {
  const double s = 1.0 / std::sqrt(2.0);
  const CMatrix m = polarizability_projection(atom, line, f_excited, f_ground, Eigen::Vector3cd(s, s, 0),
                                              Eigen::Vector3cd(s, -s, 0));
  const AngularMomentum J = angular_momentum(f_ground);
  const CMatrix x = 0.5 * (J.x * J.y + J.y * J.x);
  const double norm = (x * x).trace().real();
  return norm > 0 ? (m * x).trace().real() / norm : 0.0;
}

RfUwControls RfUwDrive::at(double t) const {
  if (controls) return controls(t);
  RfUwControls u;
  u.omega_x = omega_x;
  u.omega_y = omega_y;
  u.omega_uw = omega_uw;
  return u;
}

namespace {

struct GroundOps {
  SpinSpace space = SpinSpace::cs_ground();
  AngularMomentum f3, f4;
  CMatrix p3, p4;
  explicit GroundOps(const AtomConstants& atom) {
    f3 = angular_momentum(space, atom.lower_F());
    f4 = angular_momentum(space, atom.upper_F());
    p3 = projector(space, atom.lower_F());
    p4 = projector(space, atom.upper_F());
  }
};

void require_cs_like(const AtomConstants& atom) {
  if (atom.lower_F() != HalfInt(3) || atom.upper_F() != HalfInt(4))
    throw invalid_argument("RF/microwave Hamiltonians assume F=3 and F=4 ground manifolds");
}

}  // namespace

CMatrix h0_rwa(const RfUwDrive& drive, const AtomConstants& atom) {
  require_cs_like(atom);
  const GroundOps g(atom);
  const double gr = atom.g_r();
  const double alpha = atom.quadratic_zeeman(drive.omega_0);
  const double w0 = drive.omega_0 * (1.0 - gr);
  const double c = 1.5 * w0 + 12.5 * alpha + 0.5 * (7.0 * drive.rf_detuning - drive.uw_detuning);
  return c * (g.p4 - g.p3) - drive.rf_detuning * g.f4.z + (drive.rf_detuning + w0) * g.f3.z -
         alpha * (g.f4.z * g.f4.z - g.f3.z * g.f3.z);
}

CMatrix h_rf_rwa(const RfUwDrive& drive, const AtomConstants& atom, const RfUwControls& u) {
  require_cs_like(atom);
  const double w = drive.omega_rf();
  if (w == 0.0) throw invalid_argument("RF frequency must be nonzero");
  const GroundOps g(atom);
  const double gr = atom.g_r();
  const double e = drive.omega_0 * (1.0 - gr) / (2.0 * w);
  const double dl = drive.rf_detuning / (2.0 * w);
  const double cx = std::cos(u.phi_x), sx = std::sin(u.phi_x);
  const double cy = std::cos(u.phi_y), sy = std::sin(u.phi_y);
  const auto &F3 = g.f3, &F4 = g.f4;
  CMatrix h = 0.5 * u.omega_x *
              (cx * (F4.x - gr * (1 - e) * F3.x) - sx * (F4.y + gr * (1 + e) * F3.y) +
               dl * (sx * F4.x - gr * cx * F3.x) - dl * (cx * F4.y + gr * sx * F3.y));
  h += 0.5 * u.omega_y *
       (cy * (F4.y - gr * (1 - e) * F3.y) + sy * (F4.x + gr * (1 + e) * F3.x) +
        dl * (cy * F4.x + gr * sy * F3.x) + dl * (sy * F4.y + gr * cy * F3.y));
  const double quad = u.omega_x * u.omega_x * (1 - 2 * std::cos(2 * u.phi_x)) +
                      u.omega_y * u.omega_y * (1 - 2 * std::cos(2 * u.phi_y));
  const double cross = 2 * u.omega_x * u.omega_y * std::sin(u.phi_x - u.phi_y);
  h += (quad + cross) / (16 * w) * F4.z - gr * gr * (quad - cross) / (16 * w) * F3.z;
  return h;
}

CMatrix h_rf_rwa(const RfUwDrive& drive, const AtomConstants& atom, double t) {
  return h_rf_rwa(drive, atom, drive.at(t));
}

CMatrix h_rf_rwa_first_order(const RfUwDrive& drive, const AtomConstants& atom, const RfUwControls& u) {
  require_cs_like(atom);
  (void)drive;
  const GroundOps g(atom);
  const double gr = atom.g_r();
  const auto &F3 = g.f3, &F4 = g.f4;
  return 0.5 * u.omega_x * (std::cos(u.phi_x) * (F4.x - gr * F3.x) - std::sin(u.phi_x) * (F4.y + gr * F3.y)) +
         0.5 * u.omega_y * (std::cos(u.phi_y) * (F4.y - gr * F3.y) + std::sin(u.phi_y) * (F4.x + gr * F3.x));
}

CMatrix h_uw_rwa(const RfUwDrive& drive, const AtomConstants& atom, const RfUwControls& u) {
  require_cs_like(atom);
  const SpinSpace space = SpinSpace::cs_ground();
  const HalfInt f3 = atom.lower_F(), f4 = atom.upper_F();
  CMatrix h = CMatrix::Zero(space.dim(), space.dim());
  if (u.omega_uw == 0.0) return h;
  const CVector k33 = basis_ket(space, f3, HalfInt(3)), k44 = basis_ket(space, f4, HalfInt(4));
  const CMatrix up = k44 * k33.adjoint();
  const CMatrix sigma_x = up + up.adjoint();
  const CMatrix sigma_y = kI * up - kI * up.adjoint();
  h += 0.5 * u.omega_uw * (std::cos(u.phi_uw) * sigma_x + std::sin(u.phi_uw) * sigma_y);
  const double w = drive.omega_rf();
  if (w == 0.0) throw invalid_argument("RF frequency must be nonzero");
  for (int m = -3; m <= 2; ++m) {
    const double cg = clebsch_gordan(f3, HalfInt(m), HalfInt(1), HalfInt(1), f4, HalfInt(m + 1));
    const CVector a = basis_ket(space, f3, HalfInt(m)), b = basis_ket(space, f4, HalfInt(m + 1));
    const CMatrix sigma_z = a * a.adjoint() - b * b.adjoint();
    h += u.omega_uw * u.omega_uw / (8.0 * w) * cg * cg / (3.0 - m) * sigma_z;
  }
  return h;
}

CMatrix h_uw_rwa(const RfUwDrive& drive, const AtomConstants& atom, double t) {
  return h_uw_rwa(drive, atom, drive.at(t));
}

CMatrix light_shift_rwa(const BetaCoefficients& beta, double gamma_sc, const SpinSpace& space) {
  CMatrix h = CMatrix::Zero(space.dim(), space.dim());
  for (HalfInt F : space.manifolds()) {
    const BetaPair& b = beta.at(F);
    const double ff = F.value() * (F.value() + 1.0);
    const CMatrix fz = angular_momentum(space, F).z;
    h += gamma_sc * ((b.beta0 + b.beta2 * ff / 6.0) * projector(space, F) - 0.5 * b.beta2 * fz * fz);
  }
  return h;
}

CMatrix h_lightshift_control(double phi, double omega_lx, double omega_ly, const BetaPair& beta, double gamma_sc,
                             HalfInt F) {
  const AngularMomentum J = angular_momentum(F);
  const int n = F.twice() + 1;
  const double ff = F.value() * (F.value() + 1.0);
  return omega_lx * std::cos(phi) * J.x + omega_ly * std::sin(phi) * J.y +
         gamma_sc * (beta.beta0 * CMatrix::Identity(n, n) + beta.beta2 * (J.x * J.x - ff / 3.0 * CMatrix::Identity(n, n)));
}

AveragedDissipator rotating_frame_dissipator(const std::vector<CMatrix>& lindblad_ops, const CMatrix& frame_generator,
                                             double omega, int n_phases) {
  if (lindblad_ops.empty()) throw invalid_argument("no jump operators");
  const int d = static_cast<int>(lindblad_ops.front().rows());
  if (frame_generator.rows() != d || !frame_generator.isDiagonal(1e-12))
    throw invalid_argument("frame generator must be diagonal and match the jump operators");
  if (n_phases < 1) throw invalid_argument("need at least one phase sample");
  const RVector g = frame_generator.diagonal().real();
  const int n = omega == 0.0 ? 1 : n_phases;
  AveragedDissipator out{CMatrix::Zero(d * d, d * d), CMatrix::Zero(d, d)};
  for (int k = 0; k < n; ++k) {
    const double theta = kTwoPi * k / n;  // omega t over one period
    CVector phase(d);
    for (int i = 0; i < d; ++i) phase(i) = std::exp(kI * theta * g(i));
    for (const CMatrix& l : lindblad_ops) {
      // U^dag L U with U = exp(-i theta G): entry (i,j) picks up exp(i theta (g_i - g_j)).
      const CMatrix lr = phase.asDiagonal() * l * phase.conjugate().asDiagonal();
      out.sandwich += kron(lr, lr.conjugate());
      out.loss += lr.adjoint() * lr;
    }
  }
  out.sandwich /= static_cast<double>(n);
  out.loss /= static_cast<double>(n);
  return out;
}

CMatrix rf_frame_generator(const SpinSpace& space, const AtomConstants& atom) {
  CMatrix g = CMatrix::Zero(space.dim(), space.dim());
  if (space.contains(atom.upper_F())) g += angular_momentum(space, atom.upper_F()).z;
  if (space.contains(atom.lower_F())) g -= angular_momentum(space, atom.lower_F()).z;
  return g;
}

}  // namespace spintomo
