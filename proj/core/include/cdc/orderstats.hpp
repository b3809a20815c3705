#pragma once

// Distribution of the k-th highest of n i.i.d. valuations (k = 1 is the
// maximum). The ranks k = 0 and k = n + 1 follow the boundary conventions
// F_{0:n} = 0 and F_{n+1:n} = 1 used when summing over all prize ranks.

#include "cdc/model.hpp"

namespace cdc::orderstats {

struct OrderStatQuery {
  int k = 1;  // rank, 1 = highest
  int n = 1;  // sample size
};

/// C(n, r). Exact table for n <= 20, log-gamma beyond.
double binomial(int n, int r);

/// n! / ((k-1)! (n-k)!) F^{n-k} (1-F)^{k-1} f. Zero for k = 0 and k = n + 1.
double pdf_kth_highest(OrderStatQuery q, const ValuationDistribution& dist, double v);

/// sum_{r=0}^{k-1} C(n, r) (1-F)^r F^{n-r}, the integral of pdf_kth_highest.
double cdf_kth_highest(OrderStatQuery q, const ValuationDistribution& dist, double v);

#ifdef CDC_FAULT_INJECTION
namespace testing {
/// Perturbs C(5, 2) in the exact binomial table while enabled.
void corrupt_binomial_table(bool enabled);
}  // namespace testing
#endif

}  // namespace cdc::orderstats
