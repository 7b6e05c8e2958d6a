#include "pulsestab/contour.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "pulsestab/error.hpp"
#include "pulsestab/log.hpp"

namespace pulsestab {

std::string to_string(ContourShape shape) {
  switch (shape) {
    case ContourShape::Semicircle: return "semicircle";
    case ContourShape::Circle: return "circle";
    case ContourShape::Segment: return "segment";
  }
  return "?";
}

cplx ContourSegment::at(double s) const {
  switch (kind) {
    case Kind::Arc: {
      const double th = theta0 + s * (theta1 - theta0);
      return center + radius * cplx(std::cos(th), std::sin(th));
    }
    case Kind::Line:
      if (s == 1.0) return b;
      return a + s * (b - a);
    case Kind::LogLine: {
      if (s == 0.0) return a;
      if (s == 1.0) return b;
      const double ra = std::abs(a), rb = std::abs(b);
      return (a / ra) * std::exp(std::log(ra) + s * (std::log(rb) - std::log(ra)));
    }
  }
  return a;
}

cplx SpectralContour::midpoint(std::size_t i, int* seg, double* s) const {
  const int k = segment[i + 1];
  const double s0 = segment[i] == k ? param[i] : 0.0;
  const double sm = 0.5 * (s0 + param[i + 1]);
  if (seg) *seg = k;
  if (s) *s = sm;
  return segments[k].at(sm);
}

SpectralContour SpectralContour::reversed() const {
  SpectralContour out = *this;
  for (auto& sg : out.segments) {
    std::swap(sg.a, sg.b);
    std::swap(sg.theta0, sg.theta1);
  }
  const std::size_t n = points.size();
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t i = n - 1 - j;       // original index of this point
    const std::size_t nxt = j == 0 ? i : i + 1;  // original point ending the interval that now ends here
    const int k = segment[nxt];
    const double s = segment[i] == k ? param[i] : 0.0;
    out.points[j] = points[i];
    out.segment[j] = k;
    out.param[j] = 1.0 - s;
  }
  return out;
}

namespace {

void append_segment(SpectralContour& c, const ContourSegment& sg, int n, bool include_start) {
  const int id = static_cast<int>(c.segments.size());
  c.segments.push_back(sg);
  for (int k = include_start ? 0 : 1; k <= n; ++k) {
    const double s = static_cast<double>(k) / n;
    c.points.push_back(sg.at(s));
    c.segment.push_back(id);
    c.param.push_back(s);
  }
}

void close_contour(SpectralContour& c) {
  c.points.back() = c.points.front();
  c.closed = true;
}

}  // namespace

SpectralContour build_semicircle(double R, double r_in, int n0) {
  if (!(r_in > 0.0) || !(R > r_in)) throw ValidationError("semicircle needs 0 < r_in < R");
  if (n0 < 16) throw ValidationError("semicircle needs n0 >= 16");
  const double h = std::numbers::pi / 2.0;
  SpectralContour c;
  c.descriptor = {R, r_in, ContourShape::Semicircle};
  ContourSegment outer{ContourSegment::Kind::Arc, {}, {}, 0.0, R, -h, h};
  ContourSegment down_upper{ContourSegment::Kind::LogLine, cplx(0.0, R), cplx(0.0, r_in), {}};
  ContourSegment inner{ContourSegment::Kind::Arc, {}, {}, 0.0, r_in, h, -h};
  ContourSegment down_lower{ContourSegment::Kind::LogLine, cplx(0.0, -r_in), cplx(0.0, -R), {}};
  append_segment(c, outer, n0, true);
  append_segment(c, down_upper, n0, false);
  append_segment(c, inner, n0, false);
  append_segment(c, down_lower, n0, false);
  close_contour(c);
  return c;
}

SpectralContour build_circle(cplx center, double radius, int n) {
  if (!(radius > 0.0)) throw ValidationError("circle radius must be positive");
  if (n < 4) throw ValidationError("circle needs at least 4 points");
  SpectralContour c;
  c.descriptor = {radius, 0.0, ContourShape::Circle};
  append_segment(c, {ContourSegment::Kind::Arc, {}, {}, center, radius, -std::numbers::pi, std::numbers::pi}, n,
                 true);
  close_contour(c);
  return c;
}

SpectralContour build_segment(cplx a, cplx b, int n) {
  if (n < 2) throw ValidationError("segment needs at least 2 points");
  SpectralContour c;
  c.descriptor = {std::max(std::abs(a), std::abs(b)), 0.0, ContourShape::Segment};
  append_segment(c, {ContourSegment::Kind::Line, a, b, {}}, n - 1, true);
  return c;
}

namespace {

EvansEvaluation conjugate(EvansEvaluation e) {
  e.lambda = std::conj(e.lambda);
  e.D = std::conj(e.D);
  e.log_D = std::conj(e.log_D);
  e.mantissa = std::conj(e.mantissa);
  return e;
}

// Evaluations keyed by (Re, |Im|); the lower half-plane reuses the conjugate.
class EvalCache {
 public:
  EvalCache(const EvansSystem& sys, const EvansOptions& opts, double scale)
      : sys_(sys), opts_(opts), q_(1e-13 * std::max(1.0, scale)) {}

  EvansEvaluation operator()(cplx lambda) {
    const cplx upper(lambda.real(), std::abs(lambda.imag()));
    const std::pair<long long, long long> key{std::llround(upper.real() / q_), std::llround(upper.imag() / q_)};
    auto it = cache_.find(key);
    if (it == cache_.end()) it = cache_.emplace(key, evans_eval(sys_, upper, opts_)).first;
    EvansEvaluation e = lambda.imag() < 0.0 ? conjugate(it->second) : it->second;
    e.lambda = lambda;
    return e;
  }

 private:
  const EvansSystem& sys_;
  EvansOptions opts_;
  double q_;
  std::map<std::pair<long long, long long>, EvansEvaluation> cache_;
};

struct Node {
  cplx lambda;
  int seg;
  double s;
  EvansEvaluation ev;
};

double rel_change(const EvansEvaluation& a, const EvansEvaluation& b) {
  return std::abs(std::exp(b.log_D - a.log_D) - 1.0);
}

}  // namespace

WindingResult adaptive_winding(const EvansSystem& system, const SpectralContour& contour,
                               const WindingOptions& opts) {
  if (!contour.closed) throw ValidationError("winding needs a closed contour");
  if (contour.size() < 3) throw ValidationError("contour has too few points");
  if (!(opts.max_rel_change > 0.0 && opts.max_rel_change < 1.0))
    throw ValidationError("max_rel_change must lie in (0, 1)");
  double scale = 0.0;
  for (const cplx& p : contour.points) scale = std::max(scale, std::abs(p));
  EvalCache eval(system, opts.evans, scale);

  std::vector<Node> nodes;
  nodes.reserve(contour.size());
  for (std::size_t i = 0; i < contour.size(); ++i)
    nodes.push_back({contour.points[i], contour.segment[i], contour.param[i], {}});
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) nodes[i].ev = eval(nodes[i].lambda);
  nodes.back().ev = nodes.front().ev;

  double worst = 0.0;
  for (;;) {
    std::vector<char> bad(nodes.size() - 1, 0);
    std::size_t n_bad = 0;
    worst = 0.0;
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      const double r = rel_change(nodes[i].ev, nodes[i + 1].ev);
      worst = std::max(worst, r);
      if (!(r <= opts.max_rel_change)) {
        bad[i] = 1;
        ++n_bad;
      }
    }
    if (n_bad == 0) break;
    if (nodes.size() + n_bad > opts.max_points) {
      std::ostringstream os;
      os << "winding mesh cap " << opts.max_points << " reached with max relative step " << worst;
      throw UnreliableResult(os.str());
    }
    std::vector<Node> refined;
    refined.reserve(nodes.size() + n_bad);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
      refined.push_back(nodes[i]);
      if (!bad[i]) continue;
      const Node& a = nodes[i];
      const Node& b = nodes[i + 1];
      Node m;
      m.seg = b.seg;
      const double s0 = a.seg == b.seg ? a.s : 0.0;
      m.s = 0.5 * (s0 + b.s);
      m.lambda = contour.segments[m.seg].at(m.s);
      if (std::abs(m.lambda - a.lambda) <= 1e-14 * std::max(1.0, std::abs(a.lambda))) {
        std::ostringstream os;
        os << "winding mesh cannot be refined further near lambda=" << a.lambda;
        throw UnreliableResult(os.str());
      }
      m.ev = eval(m.lambda);
      refined.push_back(m);
    }
    refined.push_back(nodes.back());
    nodes.swap(refined);
  }

  WindingResult out;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i)
    total += std::remainder((nodes[i + 1].ev.log_D - nodes[i].ev.log_D).imag(), 2.0 * std::numbers::pi);
  const double turns = total / (2.0 * std::numbers::pi);
  out.winding = static_cast<int>(std::lround(turns));
  if (std::abs(turns - out.winding) > 1e-6) {
    std::ostringstream os;
    os << "argument sum " << turns << " turns is not an integer";
    throw UnreliableResult(os.str());
  }
  out.total_arg = total;
  out.max_rel_step = worst;
  out.n_points = nodes.size();
  out.samples.reserve(nodes.size());
  for (auto& n : nodes) out.samples.push_back(std::move(n.ev));
  return out;
}

RealAxisScan real_axis_scan(const EvansSystem& system, double a, double b, int n, GridSpacing spacing,
                            const EvansOptions& opts) {
  if (!(b > a)) throw ValidationError("real axis scan needs a < b");
  if (n < 2) throw ValidationError("real axis scan needs n >= 2");
  if (spacing == GridSpacing::Log && !(a > 0.0)) throw ValidationError("log spacing needs a > 0");
  RealAxisScan out;
  auto sign_of = [](const EvansEvaluation& e) { return e.mantissa.real() > 0.0 ? 1 : (e.mantissa.real() < 0.0 ? -1 : 0); };
  bool warned = false;
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    double x = spacing == GridSpacing::Linear ? a + t * (b - a) : a * std::pow(b / a, t);
    if (i == n - 1) x = b;
    EvansEvaluation e = evans_eval(system, x, opts);
    if (!warned && std::abs(e.mantissa.imag()) > 1e-6 * std::abs(e.mantissa)) {
      std::ostringstream os;
      os << "D has an imaginary part on the real axis at lambda=" << x << "; using the real part";
      warn(os.str());
      warned = true;
    }
    out.samples.push_back(std::move(e));
  }
  for (int i = 0; i + 1 < n; ++i) {
    const int s0 = sign_of(out.samples[i]);
    const int s1 = sign_of(out.samples[i + 1]);
    double lo = out.samples[i].lambda.real();
    double hi = out.samples[i + 1].lambda.real();
    if (s0 == 0) {
      out.roots.push_back({lo, lo, lo});
      continue;
    }
    if (s1 == 0 || s0 == s1) continue;
    while (hi - lo > 1e-8) {
      const double mid = 0.5 * (lo + hi);
      const int sm = sign_of(evans_eval(system, mid, opts));
      if (sm == 0) {
        lo = hi = mid;
        break;
      }
      (sm == s0 ? lo : hi) = mid;
    }
    out.roots.push_back({lo, hi, 0.5 * (lo + hi)});
  }
  if (sign_of(out.samples.back()) == 0) {
    const double x = out.samples.back().lambda.real();
    out.roots.push_back({x, x, x});
  }
  return out;
}

}  // namespace pulsestab
