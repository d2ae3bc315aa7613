#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "wordmask/common.hpp"

namespace wordmask {

struct TranscriptPair {
  std::string utterance_id;
  std::vector<std::string> reference;
  std::vector<std::string> hypothesis;
  std::size_t raw_reference_chars = 0;
  std::size_t raw_hypothesis_chars = 0;
};

struct WerResult {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t n_ref = 0;
  double wer = 0.0;
  bool filtered = false;
};

struct PairedTestResult {
  double t_statistic = 0.0;
  std::size_t dof = 0;
  double p_value = 1.0;
  bool significant = false;
};

struct KdeCurve {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
};

// Lowercase, strip punctuation, split on whitespace.
inline std::vector<std::string> normalize_tokens(const std::string& text,
                                                 bool strip_punct = true) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!cur.empty()) { out.push_back(cur); cur.clear(); }
      continue;
    }
    if (strip_punct && std::ispunct(c) && c != '\'') continue;
    cur += static_cast<char>(std::tolower(c));
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

// Levenshtein word alignment with unit costs. Backtrace prefers
// substitution over insertion over deletion on cost ties.
inline WerResult wer(const std::vector<std::string>& reference,
                     const std::vector<std::string>& hypothesis) {
  if (reference.empty()) throw ContractError("empty reference");
  const std::size_t n = reference.size(), m = hypothesis.size();

  std::vector<std::vector<std::size_t>> d(n + 1,
                                          std::vector<std::size_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t sub = d[i - 1][j - 1] + (reference[i - 1] != hypothesis[j - 1]);
      std::size_t ins = d[i][j - 1] + 1;
      std::size_t del = d[i - 1][j] + 1;
      d[i][j] = std::min({sub, ins, del});
    }
  }

  WerResult r;
  r.n_ref = n;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        d[i][j] == d[i - 1][j - 1] + (reference[i - 1] != hypothesis[j - 1])) {
      if (reference[i - 1] != hypothesis[j - 1]) ++r.substitutions;
      --i; --j;
    } else if (j > 0 && d[i][j] == d[i][j - 1] + 1) {
      ++r.insertions;
      --j;
    } else {
      ++r.deletions;
      --i;
    }
  }
  r.wer = static_cast<double>(r.substitutions + r.deletions + r.insertions) / n;
  return r;
}

inline WerResult wer(const TranscriptPair& pair) {
  return wer(pair.reference, pair.hypothesis);
}

// Catastrophic-failure exclusion: hypothesis more than 30 raw characters
// longer than the reference (whitespace counted, pre-normalization).
inline bool failure_filter(const TranscriptPair& pair,
                           std::size_t max_excess_chars = 30) {
  return pair.raw_hypothesis_chars >
         pair.raw_reference_chars + max_excess_chars;
}

namespace detail {

// Regularized incomplete beta I_x(a, b), Lentz continued fraction.
inline double betacf(double a, double b, double x) {
  const double eps = 3e-16, fpmin = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::fabs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < eps) break;
  }
  return h;
}

inline double betai(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double bt = std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0))
    return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

// Two-sided p-value of a Student-t statistic.
inline double t_two_sided_p(double t, std::size_t dof) {
  double v = static_cast<double>(dof);
  return betai(v / 2.0, 0.5, v / (v + t * t));
}

// Interpolated (type-7) quantile of a sorted vector, q in [0, 1].
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  double pos = q * (sorted.size() - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= sorted.size()) return sorted.back();
  double frac = pos - lo;
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

}  // namespace detail

// Two-sided paired t-test on per-utterance metric lists matched by index.
inline PairedTestResult paired_t_test(const std::vector<double>& a,
                                      const std::vector<double>& b,
                                      double alpha = 0.05) {
  if (a.size() != b.size()) throw ContractError("paired lists differ in length");
  if (a.size() < 2) throw ContractError("need at least 2 pairs");

  const std::size_t n = a.size();
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= n;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double d = a[i] - b[i] - mean;
    ss += d * d;
  }
  double sd = std::sqrt(ss / (n - 1));

  PairedTestResult r;
  r.dof = n - 1;
  if (sd == 0.0) {
    if (mean == 0.0) {
      r.t_statistic = 0.0;
      r.p_value = 1.0;
      r.significant = false;
    } else {
      r.t_statistic = mean > 0.0 ? std::numeric_limits<double>::infinity()
                                 : -std::numeric_limits<double>::infinity();
      r.p_value = 0.0;
      r.significant = true;
    }
    return r;
  }
  r.t_statistic = mean / (sd / std::sqrt(static_cast<double>(n)));
  r.p_value = detail::t_two_sided_p(r.t_statistic, r.dof);
  r.significant = r.p_value < alpha;
  return r;
}

// Splits off non-positive values and returns their fraction; the KDE runs
// on the remaining positive values only.
inline double zero_mass_fraction(const std::vector<double>& values,
                                 std::vector<double>* positives) {
  std::size_t zeros = 0;
  for (double v : values) {
    if (v > 0.0) {
      if (positives) positives->push_back(v);
    } else {
      ++zeros;
    }
  }
  return values.empty() ? 0.0 : static_cast<double>(zeros) / values.size();
}

// Gaussian KDE of ln(value) with Silverman bandwidth, mapped back to the
// value domain via f_W(w) = f_Y(ln w) / w on a log-spaced grid and
// renormalized so the trapezoidal integral is 1.
inline KdeCurve kde_log_wer(const std::vector<double>& values,
                            std::size_t grid_size = 512) {
  if (values.size() < 2)
    throw ContractError("need at least 2 positive values for KDE");
  for (double v : values)
    if (!(v > 0.0)) throw ContractError("KDE input must be positive");

  const std::size_t n = values.size();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = std::log(values[i]);

  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  double sd = std::sqrt(ss / (n - 1));

  std::vector<double> sorted = y;
  std::sort(sorted.begin(), sorted.end());
  double iqr = detail::quantile_sorted(sorted, 0.75) -
               detail::quantile_sorted(sorted, 0.25);

  double spread = std::min(sd, iqr / 1.34);
  if (spread <= 0.0) spread = std::max(sd, iqr / 1.34);
  double h = 0.9 * spread * std::pow(static_cast<double>(n), -0.2);
  if (!(h > 0.0)) h = 0.01;  // all values identical

  double lo = *std::min_element(values.begin(), values.end()) / 2.0;
  double hi = *std::max_element(values.begin(), values.end()) * 2.0;

  KdeCurve curve;
  curve.bandwidth = h;
  curve.grid.resize(grid_size);
  curve.density.resize(grid_size);
  double llo = std::log(lo), lhi = std::log(hi);
  for (std::size_t g = 0; g < grid_size; ++g) {
    double lw = grid_size == 1 ? llo
                               : llo + (lhi - llo) * g / (grid_size - 1);
    double w = std::exp(lw);
    curve.grid[g] = w;
    double f = 0.0;
    for (double yi : y) {
      double z = (lw - yi) / h;
      f += std::exp(-0.5 * z * z);
    }
    f /= n * h * std::sqrt(2.0 * M_PI);
    curve.density[g] = f / w;  // change of variable
  }

  // Trapezoidal renormalization over the grid.
  double integral = 0.0;
  for (std::size_t g = 1; g < grid_size; ++g)
    integral += 0.5 * (curve.density[g] + curve.density[g - 1]) *
                (curve.grid[g] - curve.grid[g - 1]);
  if (integral > 0.0)
    for (auto& d : curve.density) d /= integral;
  return curve;
}

}  // namespace wordmask
