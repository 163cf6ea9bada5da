#pragma once

#include <string>
#include <vector>

#include "vibrow/metrics.hpp"

namespace vibrow {

struct Peak {
  double beta = 0.0;
  double height = 0.0;
  double prominence = 0.0;
};

// Interior local maxima whose topographic prominence is at least
// `min_prominence` times the series range, refined by a parabola through the
// sample and its two neighbours. Needs at least 3 samples.
std::vector<Peak> detect_peaks(const std::vector<double>& x, const std::vector<double>& y,
                               double min_prominence = 0.05);
std::vector<Peak> detect_peaks(const MetricSeries& series, const std::string& column, double min_prominence = 0.05);

// Peak closest to `beta` within `window`, if any.
const Peak* nearest_peak(const std::vector<Peak>& peaks, double beta, double window);
// Tallest peak within `window` of `beta`, if any.
const Peak* highest_peak(const std::vector<Peak>& peaks, double beta, double window);

}  // namespace vibrow
