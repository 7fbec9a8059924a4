#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "memphase/flow.hpp"
#include "memphase/recovery.hpp"

namespace memphase::report {

/// Shortest round-trip decimal form ("%.17g"), so CSV files are bitwise
/// reproducible and re-read exactly.
std::string format_double(double x);

std::string sweep_csv(const SweepResult& result);
nlohmann::json sweep_json(const SweepResult& result);
std::string flow_csv(const FlowLog& log);
nlohmann::json flow_json(const FlowLog& log);

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

/// |relative error| against epsilon for every energy that has a limit.
std::vector<Series> sweep_error_series(const SweepResult& result);

/// Self-contained SVG line chart with log-log axes labelled epsilon and
/// relative error. When a value on either axis is not positive the chart
/// falls back to linear axes and carries a visible warning. Throws
/// ConfigError for an empty series list or a series with fewer than two
/// points.
std::string render_svg(const std::vector<Series>& series);
void emit_svg(const std::vector<Series>& series, const std::filesystem::path& path);

}  // namespace memphase::report
