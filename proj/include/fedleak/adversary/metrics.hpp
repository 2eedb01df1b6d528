#pragma once

#include <span>
#include <vector>

#include "fedleak/common.hpp"

namespace fedleak::adversary {

// Mean Euclidean distance between paired samples.
double reconstruction_error(std::span<const Vec> xhat, std::span<const Vec> x);

// Greedy minimum-cost matching on a square cost matrix: repeatedly pairs the
// cheapest remaining (row, col). Returns col assigned to each row.
std::vector<int> greedy_matching(const Mat& cost);

// Reconstruction error after greedily matching reconstructions to truths.
double matched_reconstruction_error(std::span<const Vec> xhat, std::span<const Vec> x);

struct SsimOptions {
  double data_range = 1.0;
  int window = 8;  // clipped to the image size
};

// Mean SSIM over all stride-1 square windows of two row-major images.
double ssim(const Vec& a, const Vec& b, int rows, int cols, const SsimOptions& opts = {});

enum class MembershipVariant { Cosine, NormGap };

struct MembershipScore {
  double score = 0.0;
  // Set when a zero-norm gradient made the score meaningless.
  bool flagged = false;
};

MembershipScore membership_score(const Vec& observed, const Vec& candidate,
                                 MembershipVariant variant);

// Rank-based area under the ROC curve; tied scores share their mean rank.
double roc_auc(std::span<const double> scores, const std::vector<bool>& members);

}  // namespace fedleak::adversary
