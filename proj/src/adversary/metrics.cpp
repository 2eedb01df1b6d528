#include "fedleak/adversary/metrics.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace fedleak::adversary {

double reconstruction_error(std::span<const Vec> xhat, std::span<const Vec> x) {
  require(xhat.size() == x.size(), "reconstruction_error: sample counts differ");
  require(!x.empty(), "reconstruction_error: no samples");
  double total = 0.0;
  for (size_t k = 0; k < x.size(); ++k) {
    require(xhat[k].size() == x[k].size(), "reconstruction_error: dimension mismatch");
    total += (xhat[k] - x[k]).norm();
  }
  return total / static_cast<double>(x.size());
}

std::vector<int> greedy_matching(const Mat& cost) {
  require(cost.rows() == cost.cols(), "greedy_matching: cost matrix must be square");
  const int n = static_cast<int>(cost.rows());
  std::vector<int> match(n, -1);
  std::vector<bool> row_used(n, false), col_used(n, false);
  for (int round = 0; round < n; ++round) {
    double best = std::numeric_limits<double>::infinity();
    int br = -1, bc = -1;
    for (int r = 0; r < n; ++r) {
      if (row_used[r]) continue;
      for (int c = 0; c < n; ++c)
        if (!col_used[c] && cost(r, c) < best) {
          best = cost(r, c);
          br = r;
          bc = c;
        }
    }
    require(br >= 0, "greedy_matching: cost matrix contains NaN");
    match[br] = bc;
    row_used[br] = true;
    col_used[bc] = true;
  }
  return match;
}

double matched_reconstruction_error(std::span<const Vec> xhat, std::span<const Vec> x) {
  require(xhat.size() == x.size(), "matched_reconstruction_error: sample counts differ");
  const int n = static_cast<int>(x.size());
  Mat cost(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) cost(r, c) = (xhat[r] - x[c]).norm();
  const auto match = greedy_matching(cost);
  double total = 0.0;
  for (int r = 0; r < n; ++r) total += cost(r, match[r]);
  return total / n;
}

double ssim(const Vec& a, const Vec& b, int rows, int cols, const SsimOptions& opts) {
  require(rows > 0 && cols > 0, "ssim: empty image");
  require(a.size() == static_cast<Eigen::Index>(rows) * cols && b.size() == a.size(),
          "ssim: dimension mismatch");
  require(opts.data_range > 0.0 && opts.window > 0, "ssim: bad options");
  const double c1 = (0.01 * opts.data_range) * (0.01 * opts.data_range);
  const double c2 = (0.03 * opts.data_range) * (0.03 * opts.data_range);
  const int wr = std::min(opts.window, rows);
  const int wc = std::min(opts.window, cols);
  const double count = static_cast<double>(wr) * wc;

  double total = 0.0;
  int windows = 0;
  for (int r0 = 0; r0 + wr <= rows; ++r0) {
    for (int c0 = 0; c0 + wc <= cols; ++c0) {
      double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
      for (int r = r0; r < r0 + wr; ++r)
        for (int c = c0; c < c0 + wc; ++c) {
          const double va = a[r * cols + c];
          const double vb = b[r * cols + c];
          sa += va;
          sb += vb;
          saa += va * va;
          sbb += vb * vb;
          sab += va * vb;
        }
      const double ma = sa / count, mb = sb / count;
      const double va = saa / count - ma * ma;
      const double vb = sbb / count - mb * mb;
      const double cov = sab / count - ma * mb;
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
      ++windows;
    }
  }
  return total / windows;
}

MembershipScore membership_score(const Vec& observed, const Vec& candidate,
                                 MembershipVariant variant) {
  require(observed.size() == candidate.size(), "membership_score: gradient layouts differ");
  const double no = observed.norm();
  const double nc = candidate.norm();
  if (no == 0.0 || nc == 0.0) return {0.0, true};
  switch (variant) {
    case MembershipVariant::Cosine:
      return {observed.dot(candidate) / (no * nc), false};
    case MembershipVariant::NormGap:
      return {observed.squaredNorm() - (observed - candidate).squaredNorm(), false};
  }
  return {0.0, true};
}

double roc_auc(std::span<const double> scores, const std::vector<bool>& members) {
  require(scores.size() == members.size(), "roc_auc: scores and labels differ in length");
  const size_t n = scores.size();
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t x, size_t y) { return scores[x] < scores[y]; });

  double pos_rank_sum = 0.0;
  size_t positives = 0;
  for (size_t k = 0; k < n;) {
    size_t end = k;
    while (end < n && scores[order[end]] == scores[order[k]]) ++end;
    const double rank = 0.5 * static_cast<double>(k + 1 + end);  // mean of ranks k+1..end
    for (size_t q = k; q < end; ++q)
      if (members[order[q]]) {
        pos_rank_sum += rank;
        ++positives;
      }
    k = end;
  }
  const size_t negatives = n - positives;
  require(positives > 0 && negatives > 0, "roc_auc: both classes must be present");
  const double p = static_cast<double>(positives);
  return (pos_rank_sum - p * (p + 1) / 2) / (p * static_cast<double>(negatives));
}

}  // namespace fedleak::adversary
