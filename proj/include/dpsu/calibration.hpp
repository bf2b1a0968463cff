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

#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dpsu/core.hpp"

namespace dpsu {

// Standard normal CDF via the complementary error function. Absolute error
// is bounded by a few ulps of erfc, well below 1e-12; the tail is computed
// with full relative accuracy (no 1 - Phi cancellation).
inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) * 0.3989422804014326779;  // 1/sqrt(2*pi)
}

namespace detail {

// Rational initial guess for the normal quantile (Acklam's approximation,
// |relative error| < 1.15e-9 over (0,1)), refined below by Newton steps.
inline double normal_quantile_initial(double p) {
  static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                  -2.759285104469687e+02, 1.383577518672690e+02,
                                  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                  -1.556989798598866e+02, 6.680131188771972e+01,
                                  -1.328068155288572e+01};
  static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                  -2.400758277161838e+00, -2.549732539343734e+00,
                                  4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                  2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Two Newton refinements of the initial guess against normal_cdf. The
// residual function uses the erfc tail directly, so the correction stays
// accurate for p near 0 or 1. Skipped where the pdf underflows (|x| > ~38),
// where the initial guess's 1.15e-9 relative error already meets contract.
inline double normal_quantile_refined(double x, double p) {
  for (int step = 0; step < 2; ++step) {
    const double pdf = normal_pdf(x);
    if (pdf <= 0.0) break;
    x -= (normal_cdf(x) - p) / pdf;
  }
  return x;
}

// Phi^{-1}(1 - tail) for small positive tails, avoiding the loss of
// precision in forming 1 - tail. Used by the Gaussian threshold scan where
// tail ~ delta / (2t).
inline double normal_quantile_upper_tail(double tail) {
  if (!(tail > 0.0) || !(tail < 1.0)) {
    throw std::invalid_argument("tail probability must lie in (0, 1)");
  }
  if (tail >= 0.5) {
    // Not actually a tail; defer to the central branch.
    double x = normal_quantile_initial(1.0 - tail);
    return normal_quantile_refined(x, 1.0 - tail);
  }
  // Phi^{-1}(1 - tail) = -Phi^{-1}(tail); work at the lower tail where the
  // quantile and the CDF both have full relative precision.
  double x = normal_quantile_initial(tail);
  for (int step = 0; step < 2; ++step) {
    const double pdf = normal_pdf(x);
    if (pdf <= 0.0) break;
    x -= (normal_cdf(x) - tail) / pdf;
  }
  return -x;
}

}  // namespace detail

// Standard normal quantile: rational initial guess plus two Newton steps.
// Relative error well below 1e-9; round-trips with normal_cdf to 1e-9.
inline double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw std::invalid_argument("quantile argument must lie in (0, 1)");
  }
  return detail::normal_quantile_refined(detail::normal_quantile_initial(p), p);
}

// Release threshold for the Laplace family:
//   rho = max_{1<=t<=delta0} lead(t) + (1/eps) * ln(1 / (2 (1-(1-delta)^{1/t})))
// with lead(t) = 1/t for the tightened (policy/weighted) bound and 1 for the
// generic sensitivity-1 bound. The inner probability is evaluated as
// -expm1(log1p(-delta)/t), which stays exact down to delta ~ 1e-300.
inline double laplace_threshold(const PrivacyParams& params, int delta0,
                                bool tightened) {
  params.validate();
  if (delta0 < 1) throw std::invalid_argument("delta0 must be >= 1");
  double best = -std::numeric_limits<double>::infinity();
  for (int t = 1; t <= delta0; ++t) {
    const double adjusted = -std::expm1(std::log1p(-params.delta) / t);
    if (!(adjusted > 0.0)) {
      throw std::domain_error(
          "delta underflows the threshold formula at t=" + std::to_string(t) +
          "; smallest supported delta is ~1e-300 * t");
    }
    const double lead = tightened ? 1.0 / t : 1.0;
    const double term = lead - std::log(2.0 * adjusted) / params.epsilon;
    if (term > best) best = term;
  }
  return best;
}

// Exact delta spent by a Gaussian perturbation of an l2-sensitivity-1 value:
//   F(sigma) = Phi(1/(2 sigma) - eps sigma) - e^eps Phi(-1/(2 sigma) - eps sigma).
// Strictly decreasing in sigma; calibration searches for F(sigma) <= delta/2.
inline double gaussian_sigma_delta(double epsilon, double sigma) {
  const double a = 0.5 / sigma;
  const double b = epsilon * sigma;
  return normal_cdf(a - b) - std::exp(epsilon) * normal_cdf(-a - b);
}

// Smallest noise scale sigma with F(sigma) <= delta/2, located by doubling
// to bracket and then bisecting. The result satisfies
//   F(sigma) <= delta/2 < F(sigma * (1 - 1e-9)).
inline double gaussian_sigma(const PrivacyParams& params) {
  params.validate();
  const double target = params.delta / 2.0;
  constexpr double kLoLimit = 0x1.0p-40;
  constexpr double kHiLimit = 0x1.0p+40;

  double lo = 1.0, hi = 1.0;
  if (gaussian_sigma_delta(params.epsilon, 1.0) > target) {
    while (gaussian_sigma_delta(params.epsilon, hi) > target) {
      hi *= 2.0;
      if (hi > kHiLimit) {
        throw std::domain_error("gaussian_sigma: no bracket below 2^40 (pathological params)");
      }
    }
    lo = hi / 2.0;
  } else {
    while (gaussian_sigma_delta(params.epsilon, lo) <= target) {
      lo /= 2.0;
      if (lo < kLoLimit) {
        throw std::domain_error("gaussian_sigma: no bracket above 2^-40 (pathological params)");
      }
    }
    hi = lo * 2.0;
  }

  // Invariant: F(lo) > target >= F(hi). Stop once hi*(1 - 1e-9) <= lo so the
  // returned upper end certifies both inequalities of the contract. The
  // final nudge keeps the result strictly on the feasible side of the
  // boundary even under last-ulp noise in F.
  while (hi - lo > 0.25e-9 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (gaussian_sigma_delta(params.epsilon, mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi * (1.0 + 2e-10);
}

// Release threshold for the Gaussian family:
//   rho = max_{1<=t<=delta0} lead(t) + sigma * Phi^{-1}((1 - delta/2)^{1/t})
// with lead(t) = 1/sqrt(t) if tightened else 1. The quantile argument is fed
// through the upper-tail form with tail = 1 - (1-delta/2)^{1/t}.
inline double gaussian_threshold(double sigma, const PrivacyParams& params,
                                 int delta0, bool tightened) {
  params.validate();
  if (!(sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
  if (delta0 < 1) throw std::invalid_argument("delta0 must be >= 1");
  double best = -std::numeric_limits<double>::infinity();
  for (int t = 1; t <= delta0; ++t) {
    const double tail = -std::expm1(std::log1p(-params.delta / 2.0) / t);
    const double lead = tightened ? 1.0 / std::sqrt(static_cast<double>(t)) : 1.0;
    const double term = lead + sigma * detail::normal_quantile_upper_tail(tail);
    if (term > best) best = term;
  }
  return best;
}

enum class NoiseKind { kLaplace, kGaussian, kNone };

inline const char* noise_kind_name(NoiseKind k) {
  switch (k) {
    case NoiseKind::kLaplace: return "laplace";
    case NoiseKind::kGaussian: return "gaussian";
    case NoiseKind::kNone: return "none";
  }
  throw std::logic_error("unknown noise kind");
}

struct CalibrationResult {
  NoiseKind noise_kind = NoiseKind::kLaplace;
  double scale = 0.0;  // lambda = 1/eps for Laplace, sigma for Gaussian
  double rho = 0.0;    // release threshold
  double gamma = 0.0;  // policy cutoff, rho + alpha * scale
  bool tightened = true;

  friend bool operator==(const CalibrationResult&, const CalibrationResult&) = default;
};

// Noise scale, threshold and cutoff for every private mechanism. All six
// mechanisms satisfy the per-new-item bound lead(|T|), so the tightened
// thresholds apply across the board; the cutoff is only consumed by the
// policy mechanisms but is reported for audit either way.
inline CalibrationResult calibrate(Mechanism mechanism, const PrivacyParams& params,
                                   int delta0, double alpha) {
  params.validate();
  if (mechanism == Mechanism::kGreedyDemo) {
    throw std::invalid_argument("greedy-demo has unbounded sensitivity and cannot be calibrated");
  }
  if (delta0 < 1) throw std::invalid_argument("delta0 must be >= 1");
  if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");

  CalibrationResult result;
  result.tightened = true;
  if (is_laplace_family(mechanism)) {
    result.noise_kind = NoiseKind::kLaplace;
    result.scale = 1.0 / params.epsilon;
    result.rho = laplace_threshold(params, delta0, /*tightened=*/true);
  } else {
    result.noise_kind = NoiseKind::kGaussian;
    result.scale = gaussian_sigma(params);
    result.rho = gaussian_threshold(result.scale, params, delta0, /*tightened=*/true);
  }
  result.gamma = result.rho + alpha * result.scale;
  return result;
}

}  // namespace dpsu
