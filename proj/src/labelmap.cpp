#include "summaug/labelmap.hpp"

#include <stdexcept>
#include <string>

namespace summaug {

LabelMap make_label_map(const std::vector<int>& assignments) {
  if (assignments.empty()) {
    throw std::invalid_argument("label map must be non-empty");
  }
  int max_value = -1;
  int prev = 0;
  for (size_t i = 0; i < assignments.size(); ++i) {
    const int v = assignments[i];
    if (v < 0) {
      throw std::runtime_error("label map: negative value at index " +
                               std::to_string(i));
    }
    if (i > 0 && v < prev) {
      throw std::runtime_error(
          "label map: not monotone non-decreasing at index " +
          std::to_string(i));
    }
    prev = v;
    if (v > max_value) max_value = v;
  }
  // Monotone + starting point means surjectivity reduces to: starts at 0 and
  // never jumps by more than 1.
  if (assignments.front() != 0) {
    throw std::runtime_error("label map: coarse label 0 unused");
  }
  for (size_t i = 1; i < assignments.size(); ++i) {
    if (assignments[i] > assignments[i - 1] + 1) {
      throw std::runtime_error("label map: coarse label " +
                               std::to_string(assignments[i - 1] + 1) +
                               " unused");
    }
  }
  LabelMap map;
  map.assignments = assignments;
  map.num_coarse = max_value + 1;
  return map;
}

int apply_label_map(const LabelMap& map, int label) {
  if (label < 0 || label >= map.num_fine()) {
    throw std::runtime_error("label " + std::to_string(label) +
                             " out of range for label map of size " +
                             std::to_string(map.num_fine()));
  }
  return map.assignments[static_cast<size_t>(label)];
}

LabelMap identity_map(int num_classes) {
  if (num_classes < 1) {
    throw std::invalid_argument("identity map needs at least one class");
  }
  std::vector<int> assignments(static_cast<size_t>(num_classes));
  for (int i = 0; i < num_classes; ++i) assignments[static_cast<size_t>(i)] = i;
  return make_label_map(assignments);
}

bool is_identity(const LabelMap& map) {
  return map.num_coarse == map.num_fine();
}

}  // namespace summaug
