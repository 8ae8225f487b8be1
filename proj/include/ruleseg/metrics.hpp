// Copyright 2026 The ruleseg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RULESEG_METRICS_HPP_
#define RULESEG_METRICS_HPP_

#include <cstddef>
#include <vector>

#include "ruleseg/model.hpp"

namespace ruleseg {

/// Area-weighted fraction of correctly labeled regions.
inline double per_pixel_accuracy(const std::vector<LabelId>& pred, const std::vector<LabelId>& truth,
                                 const std::vector<Region>& regions) {
  if (pred.size() != truth.size() || pred.size() != regions.size())
    throw InputError("per_pixel_accuracy: length mismatch");
  double correct = 0.0, total = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto area = static_cast<double>(regions[i].area);
    total += area;
    if (pred[i] == truth[i]) correct += area;
  }
  return total > 0.0 ? correct / total : 0.0;
}

/// Accumulates per-class correct and total ground-truth area; usable for a
/// single instance or pooled over a corpus.
class ClassAreaTally {
 public:
  explicit ClassAreaTally(std::size_t num_labels) : correct_(num_labels, 0.0), total_(num_labels, 0.0) {}

  void add(const std::vector<LabelId>& pred, const std::vector<LabelId>& truth, const std::vector<Region>& regions) {
    if (pred.size() != truth.size() || pred.size() != regions.size())
      throw InputError("ClassAreaTally: length mismatch");
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const auto c = static_cast<std::size_t>(truth[i]);
      const auto area = static_cast<double>(regions[i].area);
      total_.at(c) += area;
      if (pred[i] == truth[i]) correct_[c] += area;
      pixels_ += area;
      if (pred[i] == truth[i]) correct_pixels_ += area;
    }
  }

  /// Recall of class `c`, or a negative value when the class never occurs.
  double recall(std::size_t c) const { return total_[c] > 0.0 ? correct_[c] / total_[c] : -1.0; }

  double per_pixel() const { return pixels_ > 0.0 ? correct_pixels_ / pixels_ : 0.0; }

  /// Mean recall over classes present in the ground truth.
  double per_class() const {
    double sum = 0.0;
    std::size_t present = 0;
    for (std::size_t c = 0; c < total_.size(); ++c) {
      if (total_[c] <= 0.0) continue;
      sum += correct_[c] / total_[c];
      ++present;
    }
    return present ? sum / static_cast<double>(present) : 0.0;
  }

  std::size_t num_labels() const { return total_.size(); }
  double class_area(std::size_t c) const { return total_[c]; }

 private:
  std::vector<double> correct_;
  std::vector<double> total_;
  double pixels_ = 0.0;
  double correct_pixels_ = 0.0;
};

/// Mean over classes present in `truth` of the correctly labeled fraction of
/// that class's area. Classes absent from the ground truth are excluded.
inline double per_class_accuracy(const std::vector<LabelId>& pred, const std::vector<LabelId>& truth,
                                 const std::vector<Region>& regions, std::size_t num_labels) {
  ClassAreaTally tally(num_labels);
  tally.add(pred, truth, regions);
  return tally.per_class();
}

}  // namespace ruleseg

#endif  // RULESEG_METRICS_HPP_
