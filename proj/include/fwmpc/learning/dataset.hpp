#pragma once

#include <cstdint>
#include <vector>

#include "fwmpc/core/types.hpp"

namespace fwmpc {

enum class PairTag : uint8_t { kDemo = 0, kAugmented = 1, kAggregated = 2 };

// Column-major store of (input, target) pairs with a provenance tag per pair.
// Matrices grow geometrically; size() is the number of pairs actually stored.
class Dataset {
 public:
  Dataset() : inputs_(kPolicyInDim, 0), targets_(3, 0) {}

  int size() const { return used_; }
  void reserve(int n);
  void push_back(const PolicyInVec& in, const Vec3& out, PairTag tag);
  void append(const Dataset& other);
  int count(PairTag tag) const;
  void validate() const;
  uint64_t content_hash() const;

  // views over the stored pairs
  auto inputs() const { return inputs_.leftCols(used_); }
  auto targets() const { return targets_.leftCols(used_); }
  PairTag tag(int i) const { return tags_[i]; }
  const std::vector<PairTag>& tags() const { return tags_; }

 private:
  void grow(int extra);
  MatX inputs_;
  MatX targets_;
  std::vector<PairTag> tags_;
  int used_ = 0;
};

}  // namespace fwmpc
