#pragma once

#include <cmath>

namespace fklab {

// Neumaier's compensated sum: safe for long accumulations of mixed-magnitude
// terms.
struct NeumaierSum {
  double s = 0.0;
  double c = 0.0;

  void add(double x) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

}  // namespace fklab
