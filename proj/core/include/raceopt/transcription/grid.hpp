#pragma once

#include <vector>

namespace raceopt::transcription {

struct GridSpec {
  int intervals = 40;  // K
  int degree = 3;      // d
  double s_start = 0.0;
  double s_end = 1.0;
};

/// Throws invalid_argument unless K >= 2, d in {2, 3, 4}, s_end > s_start.
void validate(const GridSpec& g);

/// Uniform boundaries over [s_start, s_end], adjusted so every joint strictly
/// inside the range is a boundary. A joint within snap_fraction of a base
/// spacing from an interior boundary moves that boundary; otherwise the base
/// interval containing the joint is split.
std::vector<double> interval_boundaries(const GridSpec& g, const std::vector<double>& joints,
                                        double snap_fraction = 0.25);

}  // namespace raceopt::transcription
