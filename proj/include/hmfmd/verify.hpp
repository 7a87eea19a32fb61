#pragma once

#include <string>
#include <vector>

namespace hmfmd {

inline constexpr double kGradcheckTolerance = 1e-4;
inline constexpr double kGradcheckEps = 1e-5;

enum class GradcheckScope { layers, models, all };

GradcheckScope parse_gradcheck_scope(const std::string& s);

struct GradcheckEntry {
  std::string component;
  double max_rel_error = 0.0;
  std::size_t n_params = 0;
  bool passed = false;
};

/// Finite-difference suite at desk scale. Layer components: transformer,
/// lstm, head, loss. Model components: discriminant (d=4, L=3, H=3) and
/// a four-channel fusion model (widths 2/2/2/3).
///
/// `corrupt_factor` scales every analytic gradient by (1 + corrupt_factor)
/// before comparison; it exists so tests can confirm the check detects errors.
std::vector<GradcheckEntry> run_gradcheck_suite(GradcheckScope scope,
                                                double corrupt_factor = 0.0);

}  // namespace hmfmd
