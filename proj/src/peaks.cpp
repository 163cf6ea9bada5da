#include "vibrow/peaks.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vibrow {

std::vector<Peak> detect_peaks(const std::vector<double>& x, const std::vector<double>& y, double min_prominence) {
  if (x.size() != y.size()) throw std::invalid_argument("detect_peaks: x and y differ in length");
  if (y.size() < 3) throw std::invalid_argument("detect_peaks: need at least 3 samples");
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double range = *hi - *lo;
  std::vector<Peak> out;
  if (!(range > 0.0)) return out;
  const double threshold = min_prominence * range;
  const std::size_t n = y.size();

  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(y[i] > y[i - 1])) continue;
    // plateau: walk to its end, report the midpoint
    std::size_t j = i;
    while (j + 1 < n && y[j + 1] == y[i]) ++j;
    if (j + 1 >= n || !(y[j + 1] < y[i])) continue;

    double left_min = y[i];
    for (std::size_t k = i; k-- > 0;) {
      if (y[k] > y[i]) break;
      left_min = std::min(left_min, y[k]);
    }
    double right_min = y[i];
    for (std::size_t k = j + 1; k < n; ++k) {
      if (y[k] > y[i]) break;
      right_min = std::min(right_min, y[k]);
    }
    const double prominence = y[i] - std::max(left_min, right_min);
    if (prominence < threshold) continue;

    Peak p{x[i], y[i], prominence};
    if (j == i) {
      const double a = y[i - 1], b = y[i], c = y[i + 1];
      const double denom = a - 2.0 * b + c;
      if (denom < 0.0) {
        const double off = 0.5 * (a - c) / denom;
        const double dx = off >= 0.0 ? x[i + 1] - x[i] : x[i] - x[i - 1];
        p.beta = x[i] + off * dx;
        p.height = b - 0.25 * (a - c) * off;
      }
    } else {
      p.beta = 0.5 * (x[i] + x[j]);
    }
    out.push_back(p);
    i = j;
  }
  return out;
}

std::vector<Peak> detect_peaks(const MetricSeries& series, const std::string& column, double min_prominence) {
  return detect_peaks(series.beta, series.column(column), min_prominence);
}

const Peak* nearest_peak(const std::vector<Peak>& peaks, double beta, double window) {
  const Peak* best = nullptr;
  for (const auto& p : peaks) {
    const double d = std::abs(p.beta - beta);
    if (d <= window && (!best || d < std::abs(best->beta - beta))) best = &p;
  }
  return best;
}

const Peak* highest_peak(const std::vector<Peak>& peaks, double beta, double window) {
  const Peak* best = nullptr;
  for (const auto& p : peaks)
    if (std::abs(p.beta - beta) <= window && (!best || p.height > best->height)) best = &p;
  return best;
}

}  // namespace vibrow
