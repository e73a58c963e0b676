#pragma once

namespace ramsey {

// CODATA 2018
inline constexpr double k_hbar = 1.054571817e-34;      // J s
inline constexpr double k_epsilon0 = 8.8541878128e-12; // F / m

} // namespace ramsey
