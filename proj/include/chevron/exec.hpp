#pragma once

namespace chevron {

/// Selects the nodal-kernel implementation. `serial` is the reference path;
/// `parallel` runs the same per-node loops under OpenMP. Reductions are done
/// in fixed node order either way, so both produce bit-identical results.
enum class Exec { serial, parallel };

}  // namespace chevron
