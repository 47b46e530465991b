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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <numeric>
#include <optional>
#include <string>

#include <unistd.h>

namespace spintomo::testing {

inline CMatrix random_hermitian(int d, Rng& rng) {
  CMatrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.complex_normal();
  return 0.5 * (g + g.adjoint());
}

inline CMatrix random_density(int d, Rng& rng) {
  CMatrix g(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) g(i, j) = rng.complex_normal();
  CMatrix rho = g * g.adjoint();
  return rho / rho.trace().real();
}

// Kind of the spintomo::Error thrown by f, or nullopt when nothing is thrown.
template <class F>
std::optional<ErrorKind> error_kind(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return std::nullopt;
}

template <class Derived>
double max_abs(const Eigen::MatrixBase<Derived>& a) {
  return a.size() ? static_cast<double>(a.cwiseAbs().maxCoeff()) : 0.0;
}

// Exact rationals for angular-momentum oracles; magnitudes stay far below 2^63
// for the spins used here.
struct Rational {
  __int128 p = 0, q = 1;

  Rational() = default;
  Rational(__int128 p_, __int128 q_ = 1) : p(p_), q(q_) { normalize(); }
  void normalize() {
    if (q < 0) {
      p = -p;
      q = -q;
    }
    __int128 a = p < 0 ? -p : p, b = q;
    while (b) {
      const __int128 t = a % b;
      a = b;
      b = t;
    }
    if (a > 1) {
      p /= a;
      q /= a;
    }
  }
  Rational operator+(const Rational& o) const { return {p * o.q + o.p * q, q * o.q}; }
  Rational operator*(const Rational& o) const { return {p * o.p, q * o.q}; }
  Rational operator/(const Rational& o) const { return {p * o.q, q * o.p}; }
  double value() const { return static_cast<double>(static_cast<long double>(p) / static_cast<long double>(q)); }
  int sign() const { return p > 0 ? 1 : (p < 0 ? -1 : 0); }
};

inline __int128 factorial(int n) {
  __int128 f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    const auto base = std::filesystem::temp_directory_path();
    for (;;) {
      path_ = base / ("spintomo_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
      if (std::filesystem::create_directory(path_)) break;
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

}  // namespace spintomo::testing
