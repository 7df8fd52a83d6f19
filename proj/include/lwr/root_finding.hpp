#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include "lwr/errors.hpp"

namespace lwr::numeric {

/// Boundary of a monotone predicate on [lo, hi].
///
/// `pred` must be false on [lo, x*) and true on [x*, hi]. Returns x* to within
/// `width`, or to the resolution of double when width is zero. If pred(lo) is
/// already true, returns lo; if pred(hi) is false, returns hi.
template <class Pred>
double bisect_boundary(Pred&& pred, double lo, double hi, double width = 0.0) {
  if (pred(lo)) {
    return lo;
  }
  if (!pred(hi)) {
    return hi;
  }
  for (int iter = 0; iter < 2000; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi || hi - lo <= width) {
      break;
    }
    if (pred(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Root of a nondecreasing function f on [lo, hi] with f(lo) <= target <= f(hi).
template <class F>
double solve_increasing(F&& f, double target, double lo, double hi, double width = 0.0) {
  return bisect_boundary([&](double x) { return f(x) >= target; }, lo, hi, width);
}

/// Root of a nonincreasing function f on [lo, hi] with f(lo) >= target >= f(hi).
template <class F>
double solve_decreasing(F&& f, double target, double lo, double hi, double width = 0.0) {
  return bisect_boundary([&](double x) { return f(x) <= target; }, lo, hi, width);
}

struct Maximum {
  double argmax;
  double value;
  double bracket_width;
};

/// Golden-section search for the maximum of a unimodal f on [lo, hi].
template <class F>
Maximum golden_section_max(F&& f, double lo, double hi, double width) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo;
  double b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > width) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
    if (!(c > a && d < b)) {
      break;
    }
  }
  const double x = 0.5 * (a + b);
  double best = x;
  double best_value = f(x);
  for (double candidate : {a, b, c, d}) {
    const double v = f(candidate);
    if (v > best_value) {
      best = candidate;
      best_value = v;
    }
  }
  return {best, best_value, b - a};
}

/// Critical point of a unimodal flux-density law on [0, rho_jam].
///
/// The law is sampled on `samples` + 1 equally spaced densities; the sampled
/// profile must rise to its maximum and then fall (ties allowed within a
/// relative slack of 1e-12). The sampled peak is then refined by golden-section
/// search to a bracket narrower than `rel_width`·rho_jam.
template <class F>
Maximum locate_critical(F&& q, double rho_jam, std::size_t samples = 1000,
                        double rel_width = 1e-10) {
  if (!(rho_jam > 0.0) || samples < 2) {
    throw DomainError("locate_critical: need rho_jam > 0 and at least two samples");
  }
  const double step = rho_jam / static_cast<double>(samples);
  std::size_t peak = 0;
  double peak_value = q(0.0);
  double scale = std::abs(peak_value);
  for (std::size_t i = 1; i <= samples; ++i) {
    const double v = q(static_cast<double>(i) * step);
    scale = std::max(scale, std::abs(v));
    if (v > peak_value) {
      peak_value = v;
      peak = i;
    }
  }
  const double slack = 1e-12 * scale;
  double prev = q(0.0);
  for (std::size_t i = 1; i <= samples; ++i) {
    const double v = q(static_cast<double>(i) * step);
    const bool rising_part = i <= peak;
    if (rising_part ? v < prev - slack : v > prev + slack) {
      throw ModelError("flux-density law is not unimodal: sampled profile " +
                       std::string(rising_part ? "falls" : "rises") + " near density " +
                       std::to_string(static_cast<double>(i) * step));
    }
    prev = v;
  }
  const double lo = peak == 0 ? 0.0 : static_cast<double>(peak - 1) * step;
  const double hi = peak == samples ? rho_jam : static_cast<double>(peak + 1) * step;
  Maximum m = golden_section_max(q, lo, hi, rel_width * rho_jam);
  if (m.value < peak_value) {
    m = {static_cast<double>(peak) * step, peak_value, 0.0};
  }
  return m;
}

/// Composite Simpson rule with an even number of panels.
template <class F>
double simpson(F&& f, double a, double b, std::size_t panels) {
  if (panels % 2 != 0) {
    ++panels;
  }
  const double h = (b - a) / static_cast<double>(panels);
  double sum = f(a) + f(b);
  for (std::size_t i = 1; i < panels; ++i) {
    sum += (i % 2 == 1 ? 4.0 : 2.0) * f(a + static_cast<double>(i) * h);
  }
  return sum * h / 3.0;
}

}  // namespace lwr::numeric
