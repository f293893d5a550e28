#pragma once

#include <vector>

namespace summaug {

// Coarsening of C fine-grained labels into N <= C groups. assignments[y] is
// the coarse label of original label y; the mapping is surjective onto
// 0..N-1 and monotone non-decreasing (ordinal labels keep their order).
struct LabelMap {
  std::vector<int> assignments;
  int num_coarse = 0;

  int num_fine() const { return static_cast<int>(assignments.size()); }
};

LabelMap make_label_map(const std::vector<int>& assignments);

int apply_label_map(const LabelMap& map, int label);

LabelMap identity_map(int num_classes);

bool is_identity(const LabelMap& map);

}  // namespace summaug
