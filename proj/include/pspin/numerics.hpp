// Small scalar utilities: integer powers and bracketed bisection.
#pragma once

#include "pspin/model.hpp"

#include <cmath>
#include <string>

namespace pspin {

/// x^n for integer n >= 0, sign preserving for odd n. 0^0 == 1.
template <typename Scalar>
Scalar ipow(Scalar x, int n) {
  Scalar r(1);
  for (; n > 0; n >>= 1) {
    if (n & 1) r *= x;
    x *= x;
  }
  return r;
}

/// Root of a sign-changing function on [lo, hi], refined until the
/// bracket stops shrinking or is narrower than `tol`.
template <typename Scalar, typename F>
Scalar bisect(F&& f, Scalar lo, Scalar hi, Scalar tol = Scalar(0)) {
  Scalar flo = f(lo);
  const Scalar fhi = f(hi);
  if (flo == Scalar(0)) return lo;
  if (fhi == Scalar(0)) return hi;
  if ((flo < Scalar(0)) == (fhi < Scalar(0))) {
    throw NumericalFailure("bisection bracket does not enclose a sign change");
  }
  for (int it = 0; it < 400; ++it) {
    const Scalar mid = lo + (hi - lo) / Scalar(2);
    if (mid <= lo || mid >= hi || hi - lo <= tol) break;
    const Scalar fm = f(mid);
    if (fm == Scalar(0)) return mid;
    if ((fm < Scalar(0)) == (flo < Scalar(0))) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return lo + (hi - lo) / Scalar(2);
}

}  // namespace pspin
