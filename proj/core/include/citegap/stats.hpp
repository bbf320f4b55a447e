#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>

namespace citegap::stats {

/// Significance level used throughout (p < 0.001).
inline constexpr double kAlpha = 0.001;

/// Observed counts O[i][j] for two binary characteristics X (rows) and Y (columns).
struct ContingencyTable2x2 {
  std::array<std::array<std::int64_t, 2>, 2> o{};

  std::int64_t total() const { return o[0][0] + o[0][1] + o[1][0] + o[1][1]; }
};

struct ChiSquared {
  double chi2 = 0.0;
  double p = 1.0;
  bool reject = false;  // p < alpha
};

/// Yates-corrected chi-squared test of independence, 1 degree of freedom:
///   chi2 = sum_ij (|O_ij - E_ij| - 0.5)^2 / E_ij,  E_ij = N p_i q_j
/// with p_i, q_j the row and column marginal fractions. No clamping is applied
/// when |O - E| < 0.5. Throws InputError when a marginal sum is zero or an
/// entry is negative.
ChiSquared yates_chi2(const ContingencyTable2x2& table, double alpha = kAlpha);

/// Upper tail of the chi-squared distribution (regularized upper incomplete gamma).
double chi2_sf(double x, double dof);

/// Upper tail of the standard normal distribution.
double normal_sf(double z);

/// Two-sided p-value of Student's t with `dof` degrees of freedom.
/// Infinite |t| yields 0.
double student_t_two_sided_p(double t, double dof);

struct MeanStd {
  double mean = 0.0;
  double population_std = 0.0;        // divide by n
  std::optional<double> sample_std;  // divide by n - 1, needs n >= 2
};

/// Throws InputError on empty input.
MeanStd mean_std(std::span<const double> xs);

/// Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)| for
/// integer-valued samples. Either sample empty yields 0.
double ks_distance(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

}  // namespace citegap::stats
