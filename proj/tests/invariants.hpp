#pragma once

#include <string>

namespace fnls::invariants {

struct Check {
  bool pass = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

// max |G - I| after Loewdin of a random non-orthonormal frame, and after a
// second application.
Check loewdin_gram_identity();
// Relative change of the ring-trap energy under a random orthogonal frame rotation.
Check energy_rotation_invariance();
// Worst relative mismatch between 2 <r, D> and central differences of the
// energy along 5 random tangent directions (step 1e-5).
Check gradient_finite_differences();
// Worst relative change of lt_ratio under dilation t in {1/2, 2}
// (tolerance 1e-4) and occupation scaling c in {1/2, 2} (tolerance 1e-10).
Check lt_ratio_invariance();
// Largest increase between consecutive entries of a minimize_direct trace.
Check descent_trace_monotone();

}  // namespace fnls::invariants
