#pragma once

#include <cstddef>
#include <vector>

#include "pulsestab/evans.hpp"

namespace pulsestab {

enum class ContourShape { Semicircle, Circle, Segment };

std::string to_string(ContourShape shape);

struct ContourDescriptor {
  double R = 0.0;
  double r_in = 0.0;
  ContourShape shape = ContourShape::Semicircle;
};

/// A smooth piece of a contour, parametrized by s in [0, 1].
struct ContourSegment {
  enum class Kind { Arc, Line, LogLine };
  Kind kind = Kind::Line;
  cplx a, b;            // Line / LogLine endpoints (LogLine: same ray, |lambda| geometric)
  cplx center;          // Arc
  double radius = 0.0;  // Arc
  double theta0 = 0.0, theta1 = 0.0;

  cplx at(double s) const;
};

struct SpectralContour {
  std::vector<cplx> points;
  std::vector<int> segment;    // owning segment of each point
  std::vector<double> param;   // parameter within the segment
  std::vector<ContourSegment> segments;
  bool closed = false;
  ContourDescriptor descriptor;

  std::size_t size() const { return points.size(); }
  /// Point halfway (in parameter) between points i and i+1.
  cplx midpoint(std::size_t i, int* seg = nullptr, double* s = nullptr) const;
  /// Same contour traversed backwards.
  SpectralContour reversed() const;
};

/// Positively oriented boundary of {Re >= 0, r_in <= |lambda| <= R}: outer arc, imaginary
/// axis down to i r_in, indentation arc, imaginary axis down to -i R. n0 points per piece.
SpectralContour build_semicircle(double R, double r_in, int n0 = 64);

/// Counter-clockwise circle.
SpectralContour build_circle(cplx center, double radius, int n = 64);

/// Open straight segment from a to b.
SpectralContour build_segment(cplx a, cplx b, int n = 64);

struct WindingOptions {
  double max_rel_change = 0.2;
  std::size_t max_points = 20000;
  EvansOptions evans;
};

struct WindingResult {
  int winding = 0;
  double max_rel_step = 0.0;
  std::size_t n_points = 0;
  double total_arg = 0.0;                  // sum of argument increments
  std::vector<EvansEvaluation> samples;    // final mesh, in contour order
};

/// Winding number of D along a closed contour with midpoint refinement until the relative
/// change of D between neighbours is at most max_rel_change.
WindingResult adaptive_winding(const EvansSystem& system, const SpectralContour& contour,
                               const WindingOptions& opts = {});

struct RealRoot {
  double lo = 0.0;
  double hi = 0.0;
  double root = 0.0;
};

struct RealAxisScan {
  std::vector<EvansEvaluation> samples;
  std::vector<RealRoot> roots;
};

enum class GridSpacing { Linear, Log };

/// Sign changes of D on [a, b] from n samples, each bracket bisected to width 1e-8.
RealAxisScan real_axis_scan(const EvansSystem& system, double a, double b, int n,
                            GridSpacing spacing = GridSpacing::Linear, const EvansOptions& opts = {});

}  // namespace pulsestab
