//
// Copyright 2026 The DPSU Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

// Independent high-precision oracles used to pin expected values. These
// deliberately avoid the library's code paths: the normal CDF is evaluated
// from a Taylor series / Lentz continued fraction in long double, quantiles
// by bisection on that CDF, and the threshold formulas by direct long-double
// scans.

#pragma once

#include <cmath>
#include <stdexcept>

namespace dpsu_test {

// erf via its Taylor series; accurate for |x| <= ~3 in long double.
inline long double erf_series(long double x) {
  const long double x2 = x * x;
  long double term = x;
  long double sum = x;
  for (int n = 1; n < 200; ++n) {
    term *= -x2 / n;
    const long double add = term / (2 * n + 1);
    sum += add;
    if (std::fabs(add) < 1e-25L * std::fabs(sum)) break;
  }
  return sum * 2.0L / std::sqrt(3.14159265358979323846264338327950288L);
}

// erfc(x) = Q(1/2, x^2), the regularized upper incomplete gamma, evaluated
// with the modified Lentz continued fraction; accurate for x >= ~2.
inline long double erfc_cf(long double x) {
  const long double a = 0.5L;
  const long double z = x * x;
  constexpr long double tiny = 1e-4000L;
  long double b = z + 1.0L - a;
  long double c = 1.0L / tiny;
  long double d = 1.0L / b;
  long double h = d;
  for (int i = 1; i < 400; ++i) {
    const long double an = -static_cast<long double>(i) * (i - a);
    b += 2.0L;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0L / d;
    const long double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0L) < 1e-25L) break;
  }
  // Q(a, z) = exp(-z + a ln z - ln Gamma(a)) * h; Gamma(1/2) = sqrt(pi).
  return std::exp(-z + a * std::log(z) -
                  0.57236494292470008707171367567652935582L) *
         h;
}

inline long double erfc_oracle(long double x) {
  if (x < 0.0L) return 2.0L - erfc_oracle(-x);
  if (x < 2.5L) return 1.0L - erf_series(x);
  return erfc_cf(x);
}

inline long double phi_oracle(long double x) {
  return 0.5L * erfc_oracle(-x / std::sqrt(2.0L));
}

inline long double phi_inverse_oracle(long double p) {
  if (!(p > 0.0L) || !(p < 1.0L)) throw std::invalid_argument("p out of range");
  long double lo = -60.0L, hi = 60.0L;
  for (int i = 0; i < 300; ++i) {
    const long double mid = 0.5L * (lo + hi);
    if (phi_oracle(mid) < p) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5L * (lo + hi);
}

// Direct long-double scan of the Laplace-family threshold.
inline long double laplace_threshold_oracle(long double epsilon, long double delta,
                                            int delta0, bool tightened) {
  long double best = -1e400L;
  for (int t = 1; t <= delta0; ++t) {
    const long double adjusted = -std::expm1(std::log1p(-delta) / t);
    const long double lead = tightened ? 1.0L / t : 1.0L;
    const long double term = lead - std::log(2.0L * adjusted) / epsilon;
    if (term > best) best = term;
  }
  return best;
}

// The exact delta spent by unit-sensitivity Gaussian noise at scale sigma.
inline long double gaussian_delta_oracle(long double epsilon, long double sigma) {
  const long double a = 0.5L / sigma;
  const long double b = epsilon * sigma;
  return phi_oracle(a - b) - std::exp(epsilon) * phi_oracle(-a - b);
}

// Direct long-double scan of the Gaussian-family threshold for a given sigma.
inline long double gaussian_threshold_oracle(long double sigma, long double delta,
                                             int delta0, bool tightened) {
  long double best = -1e400L;
  for (int t = 1; t <= delta0; ++t) {
    const long double q = std::exp(std::log1p(-delta / 2.0L) / t);
    const long double lead = tightened ? 1.0L / std::sqrt(static_cast<long double>(t)) : 1.0L;
    const long double term = lead + sigma * phi_inverse_oracle(q);
    if (term > best) best = term;
  }
  return best;
}

}  // namespace dpsu_test
