#include "raceopt/transcription/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "raceopt/common/error.hpp"

namespace raceopt::transcription {

void validate(const GridSpec& g) {
  if (g.intervals < 2) throw Error(ErrorCode::invalid_argument, "grid needs at least 2 intervals");
  if (g.degree < 2 || g.degree > 4)
    throw Error(ErrorCode::unsupported_degree, "collocation degree must be 2, 3 or 4, got " + std::to_string(g.degree));
  if (!(g.s_end > g.s_start)) throw Error(ErrorCode::invalid_argument, "grid needs s_end > s_start");
}

std::vector<double> interval_boundaries(const GridSpec& g, const std::vector<double>& joints, double snap_fraction) {
  validate(g);
  const double h = (g.s_end - g.s_start) / g.intervals;
  std::vector<double> b(static_cast<std::size_t>(g.intervals + 1));
  for (int k = 0; k <= g.intervals; ++k) b[k] = g.s_start + k * h;
  b.back() = g.s_end;
  std::vector<char> pinned(b.size(), 0);
  pinned.front() = pinned.back() = 1;

  const double eps = 1e-9 * std::max(1.0, std::abs(g.s_end));
  for (double j : joints) {
    if (j <= g.s_start + eps || j >= g.s_end - eps) continue;
    const auto it = std::lower_bound(b.begin(), b.end(), j);
    const std::size_t hi = static_cast<std::size_t>(it - b.begin());
    const std::size_t lo = hi - 1;
    if (std::abs(b[hi] - j) <= eps || std::abs(b[lo] - j) <= eps) {
      const std::size_t k = std::abs(b[hi] - j) <= eps ? hi : lo;
      b[k] = j;
      pinned[k] = 1;
      continue;
    }
    const std::size_t nearest = (j - b[lo] < b[hi] - j) ? lo : hi;
    if (!pinned[nearest] && std::abs(b[nearest] - j) <= snap_fraction * h) {
      b[nearest] = j;
      pinned[nearest] = 1;
    } else {
      b.insert(b.begin() + static_cast<std::ptrdiff_t>(hi), j);
      pinned.insert(pinned.begin() + static_cast<std::ptrdiff_t>(hi), 1);
    }
  }
  return b;
}

}  // namespace raceopt::transcription
