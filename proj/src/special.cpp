#include "ncse/special.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "ncse/error.hpp"

namespace ncse {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Power series I_nu(x) = (x/2)^nu / Gamma(nu+1) * sum_k (x^2/4)^k / (k! (nu+1)_k).
// All terms are positive, so the sum carries no cancellation. The accumulator
// is rescaled if it approaches the double range.
double log_bessel_series(double nu, double x) {
  const double q = 0.25 * x * x;
  double term = 1.0;
  double sum = 1.0;
  double log_scale = 0.0;
  for (int k = 0; k < 4'000'000; ++k) {
    term *= q / ((k + 1) * (nu + k + 1));
    sum += term;
    if (term < sum * 1e-18) break;
    if (sum > 1e280) {
      sum *= 1e-280;
      term *= 1e-280;
      log_scale += 280.0 * std::log(10.0);
    }
  }
  return nu * std::log(0.5 * x) - std::lgamma(nu + 1.0) + std::log(sum) + log_scale;
}

// Hankel expansion I_nu(x) ~ e^x / sqrt(2 pi x) * sum_k (-1)^k a_k(nu) / x^k,
// truncated at the smallest term. Adequate only for nu well below sqrt(x).
double log_bessel_hankel(double nu, double x) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  double sum = 1.0;
  double prev_mag = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 40; ++k) {
    const double odd = 2.0 * k + 1.0;
    term *= -(mu - odd * odd) / (8.0 * x * (k + 1));
    const double mag = std::fabs(term);
    if (mag >= prev_mag) break;  // asymptotic series: stop at smallest term
    sum += term;
    prev_mag = mag;
    if (mag < 1e-18 * std::fabs(sum)) break;
  }
  return x - 0.5 * std::log(2.0 * kPi * x) + std::log(sum);
}

// Coefficient polynomials u_k(t) of Olver's uniform asymptotic expansion,
// built once from u_{k+1} = t^2(1-t^2)/2 * u_k' + 1/8 * int_0^t (1-5s^2) u_k ds.
std::vector<std::vector<double>> make_olver_polynomials(int count) {
  std::vector<std::vector<double>> u;
  u.push_back({1.0});
  for (int k = 0; k + 1 < count; ++k) {
    const auto& p = u.back();
    const int deg = static_cast<int>(p.size()) - 1;
    std::vector<double> next(static_cast<size_t>(deg) + 4, 0.0);
    // t^2 (1 - t^2) / 2 * p'(t)
    for (int i = 1; i <= deg; ++i) {
      const double d = i * p[static_cast<size_t>(i)];
      next[static_cast<size_t>(i) + 1] += 0.5 * d;
      next[static_cast<size_t>(i) + 3] -= 0.5 * d;
    }
    // 1/8 * int_0^t (1 - 5 s^2) p(s) ds
    for (int i = 0; i <= deg; ++i) {
      const double c = p[static_cast<size_t>(i)];
      next[static_cast<size_t>(i) + 1] += 0.125 * c / (i + 1);
      next[static_cast<size_t>(i) + 3] -= 0.625 * c / (i + 3);
    }
    u.push_back(std::move(next));
  }
  return u;
}

double eval_poly(const std::vector<double>& coeffs, double t) {
  double v = 0.0;
  for (size_t i = coeffs.size(); i-- > 0;) v = v * t + coeffs[i];
  return v;
}

// Olver uniform asymptotic expansion of I_nu(nu z), valid for large nu
// uniformly in z. Here it is only entered with z >= 1, so t <= 1/sqrt(2).
double log_bessel_olver(double nu, double x) {
  static const std::vector<std::vector<double>> u = make_olver_polynomials(11);
  const double z = x / nu;
  const double r = std::sqrt(1.0 + z * z);
  const double t = 1.0 / r;
  const double eta = r + std::log(z / (1.0 + r));
  double sum = 1.0;
  double prev_mag = std::numeric_limits<double>::infinity();
  double nu_pow = 1.0;
  for (size_t k = 1; k < u.size(); ++k) {
    nu_pow *= nu;
    const double term = eval_poly(u[k], t) / nu_pow;
    const double mag = std::fabs(term);
    if (mag >= prev_mag) break;
    sum += term;
    prev_mag = mag;
  }
  return -0.5 * std::log(2.0 * kPi * nu) + nu * eta - 0.5 * std::log(r) + std::log(sum);
}

}  // namespace

double log_bessel_i(double nu, double x) {
  if (nu < 0.0 || x < 0.0) {
    throw Error(ErrorCode::BadArgument, "log_bessel_i requires nu >= 0 and x >= 0");
  }
  if (x == 0.0) {
    return nu == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  }
  double result;
  if (x < std::max(nu, 20.0)) {
    result = log_bessel_series(nu, x);
  } else if (nu < 8.0) {
    result = log_bessel_hankel(nu, x);
  } else {
    result = log_bessel_olver(nu, x);
  }
  if (!std::isfinite(result)) {
    throw Error(ErrorCode::NumericOverflow, "log_bessel_i lost finiteness");
  }
  return result;
}

double log_unit_sphere_area(Index p) {
  if (p < 2) throw Error(ErrorCode::BadArgument, "sphere dimension p must be >= 2");
  const double half_p = 0.5 * static_cast<double>(p);
  return std::log(2.0) + half_p * std::log(kPi) - std::lgamma(half_p);
}

}  // namespace ncse
