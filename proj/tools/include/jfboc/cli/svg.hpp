/*
 Copyright 2026 The jfboc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

#include <string>
#include <vector>

namespace jfboc::cli {

/// A mean curve with a min/max band over replicate runs.
struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> mean;
  std::vector<double> lo;
  std::vector<double> hi;
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
  /// Used only when every plotted value is positive.
  bool log_y = false;
};

/// Panels laid out on a grid, one legend per panel. Elements carry the classes
/// "band", "mean" and "legend-entry".
std::string render_panels(const std::vector<Panel>& panels, int columns = 2);

struct Polyline2D {
  std::vector<double> x;
  std::vector<double> y;
};

/// Equal-aspect plot; each path gets a "start-marker" circle and an
/// "end-marker" square.
std::string render_trajectories(const std::vector<Polyline2D>& paths, const std::string& title);

std::string escape_xml(const std::string& text);

}  // namespace jfboc::cli
