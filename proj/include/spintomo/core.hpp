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

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace spintomo {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2.0 * kPi;
constexpr cplx kI{0.0, 1.0};

enum class ErrorKind {
  InvalidArgument,
  Numerical,
  Convergence,
  ModelInconsistency,
  NotFound,
  Degenerate,
  Config,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

inline Error invalid_argument(const std::string& what) { return {ErrorKind::InvalidArgument, what}; }
inline Error numerical_error(const std::string& what) { return {ErrorKind::Numerical, what}; }

// Iterative solvers that give up still hand back their last iterate.
template <class T>
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, T last) : Error(ErrorKind::Convergence, what), last_(std::move(last)) {}
  const T& last_iterate() const { return last_; }

 private:
  T last_;
};

bool is_hermitian(const CMatrix& a, double rel_tol = 1e-12);
CMatrix hermitian_part(const CMatrix& a);
CMatrix antihermitian_part(const CMatrix& a);  // (A - A^dag)/2i, itself Hermitian

// Row-major vectorization, so vec(A X B) = (A kron B^T) vec(X).
CVector vec(const CMatrix& a);
CMatrix unvec(const CVector& v, int d);
CMatrix kron(const CMatrix& a, const CMatrix& b);

// Bit-reproducible random numbers. mt19937_64 output is specified by the
// standard; the distributions below are fixed here instead of relying on
// implementation-defined std:: distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  std::uint64_t next_u64();
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  double normal();
  cplx complex_normal();                 // E|z|^2 = 1
  RVector normal_vector(int n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// splitmix64 mixing, used to derive independent sub-seeds from one seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace spintomo
