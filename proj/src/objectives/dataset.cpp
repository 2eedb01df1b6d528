#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "fedleak/objectives.hpp"

namespace fedleak::objectives {

Dataset::Dataset(std::vector<Sample> samples, int num_classes)
    : samples_(std::move(samples)), classes_(num_classes) {
  require(num_classes >= 1, "Dataset: need at least one class");
  dim_ = samples_.empty() ? 0 : static_cast<int>(samples_.front().x.size());
  for (const auto& s : samples_) {
    require(s.x.size() == dim_, "Dataset: samples disagree on input dimension");
    require(s.label >= 0 && s.label < classes_,
            "Dataset: label " + std::to_string(s.label) + " outside [0," +
                std::to_string(classes_) + ")");
  }
}

std::string Dataset::to_csv() const {
  std::string out;
  char buf[64];
  for (const auto& s : samples_) {
    for (Eigen::Index k = 0; k < s.x.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g,", s.x[k]);
      out += buf;
    }
    out += std::to_string(s.label);
    out += '\n';
  }
  return out;
}

Dataset Dataset::from_csv(std::string_view text, int num_classes) {
  std::vector<Sample> samples;
  std::istringstream is{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> fields;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        fields.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw Error("dataset csv line " + std::to_string(lineno) + ": bad number '" +
                    cell + "'");
      }
    }
    require(fields.size() >= 2,
            "dataset csv line " + std::to_string(lineno) + ": need features and label");
    Sample s;
    s.x = Eigen::Map<const Vec>(fields.data(), static_cast<Eigen::Index>(fields.size() - 1));
    const double label = fields.back();
    require(label == std::floor(label),
            "dataset csv line " + std::to_string(lineno) + ": non-integer label");
    s.label = static_cast<int>(label);
    samples.push_back(std::move(s));
  }
  return Dataset(std::move(samples), num_classes);
}

std::vector<Dataset> synthetic_gaussian_dataset(int nodes, int per_node,
                                                std::mt19937_64& rng) {
  require(nodes >= 1, "synthetic_gaussian_dataset: need at least one node");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Dataset> out;
  out.reserve(nodes);
  long draw = 0;
  for (int i = 0; i < nodes; ++i) {
    std::vector<Sample> samples;
    for (int k = 0; k < per_node; ++k, ++draw) {
      Sample s;
      s.label = static_cast<int>(draw % 2);
      const double mean = s.label == 1 ? 1.0 : -1.0;
      s.x = Vec(2);
      s.x[0] = mean + gauss(rng);
      s.x[1] = mean + gauss(rng);
      samples.push_back(std::move(s));
    }
    out.emplace_back(std::move(samples), 2);
  }
  return out;
}

namespace {

// Binary 2x2-block pattern for class c from a fixed LCG stream.
Vec block_pattern(int side, std::uint64_t state) {
  Vec t(side * side);
  const int cells = (side + 1) / 2;
  std::vector<double> bits(cells * cells);
  for (auto& b : bits) {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    b = (state >> 63) ? 1.0 : 0.0;
  }
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) t[r * side + c] = bits[(r / 2) * cells + (c / 2)];
  return t;
}

}  // namespace

ImageTemplates make_image_templates(int side, int num_classes) {
  require(side >= 4, "image side must be >= 4");
  require(num_classes >= 1, "need at least one class");
  ImageTemplates out;
  out.side = side;
  std::uint64_t seed = 0x9E3779B97F4A7C15ULL;
  while (static_cast<int>(out.templates.size()) < num_classes) {
    seed += 0x632BE59BD9B4E019ULL;
    Vec t = block_pattern(side, seed);
    const double mean = t.mean();
    if (mean < 0.25 || mean > 0.75) continue;
    const bool dup = std::any_of(out.templates.begin(), out.templates.end(),
                                 [&](const Vec& o) { return (o - t).cwiseAbs().sum() < 4.0; });
    if (!dup) out.templates.push_back(std::move(t));
  }
  return out;
}

std::vector<Dataset> synthetic_image_dataset(int nodes, int per_node, int side,
                                             int num_classes, std::mt19937_64& rng,
                                             double noise) {
  require(nodes >= 1, "synthetic_image_dataset: need at least one node");
  const auto templates = make_image_templates(side, num_classes);
  std::uniform_int_distribution<int> pick(0, num_classes - 1);
  std::uniform_real_distribution<double> jitter(-noise, noise);
  std::vector<Dataset> out;
  out.reserve(nodes);
  for (int i = 0; i < nodes; ++i) {
    std::vector<Sample> samples;
    for (int k = 0; k < per_node; ++k) {
      Sample s;
      s.label = pick(rng);
      s.x = templates.templates[s.label];
      if (noise > 0.0)
        for (Eigen::Index p = 0; p < s.x.size(); ++p) s.x[p] += jitter(rng);
      s.x = s.x.cwiseMax(0.0).cwiseMin(1.0);
      samples.push_back(std::move(s));
    }
    out.emplace_back(std::move(samples), num_classes);
  }
  return out;
}

}  // namespace fedleak::objectives
