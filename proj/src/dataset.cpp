#include "fwmpc/learning/dataset.hpp"

#include <algorithm>
#include <stdexcept>

#include "fwmpc/util/hash.hpp"

namespace fwmpc {

void Dataset::grow(int extra) {
  const int need = used_ + extra;
  if (need <= inputs_.cols()) return;
  int cap = std::max<int>(64, static_cast<int>(inputs_.cols()));
  while (cap < need) cap *= 2;
  inputs_.conservativeResize(Eigen::NoChange, cap);
  targets_.conservativeResize(Eigen::NoChange, cap);
}

void Dataset::reserve(int n) { grow(n - used_); }

void Dataset::push_back(const PolicyInVec& in, const Vec3& out, PairTag tag) {
  if (!in.allFinite() || !out.allFinite()) {
    throw std::invalid_argument("Dataset: non-finite pair");
  }
  grow(1);
  inputs_.col(used_) = in;
  targets_.col(used_) = out;
  tags_.push_back(tag);
  ++used_;
}

void Dataset::append(const Dataset& other) {
  grow(other.used_);
  inputs_.middleCols(used_, other.used_) = other.inputs();
  targets_.middleCols(used_, other.used_) = other.targets();
  tags_.insert(tags_.end(), other.tags_.begin(), other.tags_.begin() + other.used_);
  used_ += other.used_;
}

int Dataset::count(PairTag tag) const {
  return static_cast<int>(std::count(tags_.begin(), tags_.begin() + used_, tag));
}

void Dataset::validate() const {
  if (static_cast<int>(tags_.size()) != used_) {
    throw std::invalid_argument("Dataset: tag count mismatch");
  }
  if (!inputs().allFinite() || !targets().allFinite()) {
    throw std::invalid_argument("Dataset: non-finite content");
  }
}

uint64_t Dataset::content_hash() const {
  HashAccumulator h;
  h.add(static_cast<uint64_t>(used_));
  h.add_matrix(inputs());
  h.add_matrix(targets());
  for (int i = 0; i < used_; ++i) h.add(static_cast<uint64_t>(tags_[i]));
  return h.value();
}

}  // namespace fwmpc
