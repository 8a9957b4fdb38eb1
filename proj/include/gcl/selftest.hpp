#pragma once

namespace gcl {

// Runs the built-in invariant suite (kernel parity, gradient checks, manifold
// identities, loss calibration, hyperbolicity anchors, determinism) and
// returns the number of failed checks. Prints one line per check.
int selftest(bool verbose = true);

}  // namespace gcl
