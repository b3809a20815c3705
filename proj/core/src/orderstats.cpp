#include "cdc/orderstats.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <fmt/format.h>

namespace cdc::orderstats {
namespace {

constexpr int kExactLimit = 20;

using BinomialTable = std::array<std::array<std::uint64_t, kExactLimit + 1>, kExactLimit + 1>;

constexpr BinomialTable make_table() {
  BinomialTable t{};
  for (int n = 0; n <= kExactLimit; ++n) {
    t[n][0] = 1;
    for (int r = 1; r <= n; ++r) t[n][r] = t[n - 1][r - 1] + (r <= n - 1 ? t[n - 1][r] : 0);
  }
  return t;
}

constexpr BinomialTable kBinomial = make_table();

#ifdef CDC_FAULT_INJECTION
bool g_corrupt = false;
#endif

void check_query(const char* op, OrderStatQuery q) {
  if (q.n < 0 || q.k < 0 || q.k > q.n + 1) {
    throw std::out_of_range(fmt::format("{}: rank k = {} out of range for sample size n = {}", op,
                                        q.k, q.n));
  }
}

void check_support(const char* op, const ValuationDistribution& dist, double v) {
  double slack = 1e-12 * std::max(1.0, std::fabs(dist.hi() - dist.lo()));
  if (v < dist.lo() - slack || v > dist.hi() + slack) {
    throw std::domain_error(fmt::format("{}: v = {:.9g} outside support [{:.9g}, {:.9g}]", op, v,
                                        dist.lo(), dist.hi()));
  }
}

}  // namespace

#ifdef CDC_FAULT_INJECTION
namespace testing {
void corrupt_binomial_table(bool enabled) { g_corrupt = enabled; }
}  // namespace testing
#endif

double binomial(int n, int r) {
  if (n < 0 || r < 0 || r > n) return 0.0;
  if (n <= kExactLimit) {
    double value = static_cast<double>(kBinomial[n][r]);
#ifdef CDC_FAULT_INJECTION
    if (g_corrupt && n == 5 && r == 2) value += 1.0;
#endif
    return value;
  }
  return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0)));
}

double pdf_kth_highest(OrderStatQuery q, const ValuationDistribution& dist, double v) {
  check_query("pdf_kth_highest", q);
  check_support("pdf_kth_highest", dist, v);
  if (q.k == 0 || q.k == q.n + 1) return 0.0;
  double F = dist.cdf(v);
  double coeff = q.n * binomial(q.n - 1, q.k - 1);
  return coeff * std::pow(F, q.n - q.k) * std::pow(1.0 - F, q.k - 1) * dist.pdf(v);
}

double cdf_kth_highest(OrderStatQuery q, const ValuationDistribution& dist, double v) {
  check_query("cdf_kth_highest", q);
  check_support("cdf_kth_highest", dist, v);
  if (q.k == 0) return 0.0;
  if (q.k == q.n + 1) return 1.0;
  double F = dist.cdf(v);
  double G = 1.0 - F;
  double sum = 0.0;
  for (int r = 0; r < q.k; ++r) {
    sum += binomial(q.n, r) * std::pow(G, r) * std::pow(F, q.n - r);
  }
  return sum;
}

}  // namespace cdc::orderstats
