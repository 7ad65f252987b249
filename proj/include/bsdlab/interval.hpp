#pragma once

#include <cmath>

#include "bsdlab/errors.hpp"

namespace bsdlab {

struct Interval {
  double a = 0.0;
  double b = 1.0;

  double width() const { return b - a; }
  bool contains(double x, double tol = 0.0) const { return x >= a - tol && x <= b + tol; }

  void validate() const {
    if (!(std::isfinite(a) && std::isfinite(b)))
      raise(Errc::out_of_interval, "interval endpoints must be finite");
    if (!(a < b)) raise(Errc::out_of_interval, "interval requires a < b");
  }
};

inline bool same_interval(const Interval& p, const Interval& q, double tol = 1e-12) {
  const double scale = std::fmax(1.0, std::fmax(std::fabs(p.a) + std::fabs(p.b),
                                                std::fabs(q.a) + std::fabs(q.b)));
  return std::fabs(p.a - q.a) <= tol * scale && std::fabs(p.b - q.b) <= tol * scale;
}

}  // namespace bsdlab
