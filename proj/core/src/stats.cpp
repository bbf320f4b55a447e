#include "citegap/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <vector>

#include "citegap/error.hpp"

namespace citegap::stats {

ChiSquared yates_chi2(const ContingencyTable2x2& table, double alpha) {
  for (const auto& row : table.o)
    for (auto v : row)
      if (v < 0) throw InputError("contingency table entries must be non-negative");
  const double n = static_cast<double>(table.total());
  std::array<double, 2> row_sum{}, col_sum{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      row_sum[i] += static_cast<double>(table.o[i][j]);
      col_sum[j] += static_cast<double>(table.o[i][j]);
    }
  for (int k = 0; k < 2; ++k)
    if (row_sum[k] <= 0 || col_sum[k] <= 0)
      throw InputError("contingency table has a zero marginal sum");

  double chi2 = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double expected = row_sum[i] * col_sum[j] / n;
      const double dev = std::abs(static_cast<double>(table.o[i][j]) - expected) - 0.5;
      chi2 += dev * dev / expected;
    }
  const double p = chi2_sf(chi2, 1.0);
  return {chi2, p, p < alpha};
}

double chi2_sf(double x, double dof) {
  if (!(x > 0)) return 1.0;
  if (std::isinf(x)) return 0.0;
  return boost::math::gamma_q(dof / 2.0, x / 2.0);
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double student_t_two_sided_p(double t, double dof) {
  if (std::isnan(t)) return 1.0;
  if (std::isinf(t)) return 0.0;
  const double x = dof / (dof + t * t);
  return boost::math::ibeta(dof / 2.0, 0.5, x);
}

MeanStd mean_std(std::span<const double> xs) {
  if (xs.empty()) throw InputError("mean_std of an empty sample");
  const double n = static_cast<double>(xs.size());
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  MeanStd out;
  // A constant sample gets its value back exactly, without summation noise.
  if (std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); })) {
    mean = xs.front();
    ss = 0.0;
  }
  out.mean = mean;
  out.population_std = std::sqrt(ss / n);
  if (xs.size() >= 2) out.sample_std = std::sqrt(ss / (n - 1));
  return out;
}

double ks_distance(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  if (a.empty() || b.empty()) return 0.0;
  std::vector<std::uint32_t> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const double nx = static_cast<double>(x.size()), ny = static_cast<double>(y.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < x.size() || j < y.size()) {
    std::uint32_t v;
    if (j == y.size() || (i < x.size() && x[i] <= y[j]))
      v = x[i];
    else
      v = y[j];
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / nx - static_cast<double>(j) / ny));
  }
  return d;
}

}  // namespace citegap::stats
