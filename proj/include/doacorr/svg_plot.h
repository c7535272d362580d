// Mean +/- std trajectory plots rendered as standalone SVG text.

#ifndef DOACORR_SVG_PLOT_H_
#define DOACORR_SVG_PLOT_H_

#include <optional>
#include <string>
#include <vector>

namespace doacorr {

struct TrajectoryPlot {
  std::string title;
  std::vector<double> time_s;
  std::vector<double> mean_deg;
  std::vector<double> std_deg;  // empty for a single trajectory
  std::optional<double> true_doa_deg;
};

// Output depends only on the input values, so regenerating from the same
// CSV yields the same bytes.
std::string RenderTrajectorySvg(const TrajectoryPlot &plot);

}  // namespace doacorr

#endif  // DOACORR_SVG_PLOT_H_
