#include "cdc/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <fmt/format.h>

namespace cdc {
namespace {

struct SimpsonPanel {
  double a, b, fa, fm, fb, whole;
};

double simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

// Panels are always split this many times before the error estimate is
// trusted; a single coarse panel can agree with its halves by accident.
constexpr int kMinLevels = 4;

double refine(const std::function<double(double)>& f, const SimpsonPanel& p, double tol,
              int depth, int level, bool& converged) {
  double m = 0.5 * (p.a + p.b);
  double lm = 0.5 * (p.a + m);
  double rm = 0.5 * (m + p.b);
  double flm = f(lm);
  double frm = f(rm);
  double left = simpson(p.a, m, p.fa, flm, p.fm);
  double right = simpson(m, p.b, p.fm, frm, p.fb);
  double delta = left + right - p.whole;
  if (level >= kMinLevels && std::fabs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  if (depth <= 0) {
    converged = false;
    return left + right + delta / 15.0;
  }
  return refine(f, {p.a, m, p.fa, flm, p.fm, left}, 0.5 * tol, depth - 1, level + 1, converged) +
         refine(f, {m, p.b, p.fm, frm, p.fb, right}, 0.5 * tol, depth - 1, level + 1, converged);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int max_depth) {
  if (a == b) return 0.0;
  double fa = f(a);
  double fb = f(b);
  double fm = f(0.5 * (a + b));
  bool converged = true;
  double value = refine(f, {a, b, fa, fm, fb, simpson(a, b, fa, fm, fb)}, abs_tol, max_depth, 0,
                        converged);
  if (!converged) {
    throw QuadratureError(fmt::format(
        "adaptive_simpson: no convergence on [{:.9g}, {:.9g}] to tolerance {:.3g} within depth {}",
        a, b, abs_tol, max_depth));
  }
  return value;
}

double integrate_piecewise(const std::function<double(double)>& f, double a, double b,
                           std::span<const double> breakpoints, double abs_tol, int max_depth) {
  if (a == b) return 0.0;
  double sign = 1.0;
  if (a > b) {
    std::swap(a, b);
    sign = -1.0;
  }
  std::vector<double> cuts{a};
  for (double x : breakpoints) {
    if (x > a && x < b) cuts.push_back(x);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  double share = abs_tol / static_cast<double>(cuts.size() - 1);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double lo = cuts[i], hi = cuts[i + 1];
    // One-sided limits at the cuts: a jump evaluated on the wrong side leaves
    // an endpoint error that shrinks only as fast as the halved tolerance.
    auto inside = [&](double x) {
      if (x <= lo) return f(std::nextafter(lo, hi));
      if (x >= hi) return f(std::nextafter(hi, lo));
      return f(x);
    };
    total += adaptive_simpson(inside, lo, hi, share, max_depth);
  }
  return sign * total;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = (seed ^ index) + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::below: empty range");
  // Rejection sampling on the top of the range keeps the draw unbiased.
  std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                        std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

}  // namespace cdc
