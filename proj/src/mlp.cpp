#include "fwmpc/learning/mlp.hpp"

#include <cmath>
#include <stdexcept>

#include "fwmpc/util/hash.hpp"
#include "fwmpc/util/rng.hpp"

namespace fwmpc {

PolicyNet PolicyNet::create(int hidden, uint64_t seed) {
  if (hidden < 1) throw std::invalid_argument("PolicyNet: hidden width must be >= 1");
  PolicyNet net;
  net.hidden = hidden;
  net.seed = seed;
  Rng rng(seed);
  auto xavier = [&](MatX& m, int rows, int cols) {
    const double a = std::sqrt(6.0 / (rows + cols));
    m.resize(rows, cols);
    for (int c = 0; c < cols; ++c)
      for (int r = 0; r < rows; ++r) m(r, c) = rng.uniform(-a, a);
  };
  xavier(net.w1, hidden, kPolicyInDim);
  xavier(net.w2, hidden, hidden);
  xavier(net.w3, 3, hidden);
  net.b1 = VecX::Zero(hidden);
  net.b2 = VecX::Zero(hidden);
  net.b3.setZero();
  return net;
}

void PolicyNet::validate() const {
  if (w1.rows() != hidden || w1.cols() != kPolicyInDim || w2.rows() != hidden ||
      w2.cols() != hidden || w3.rows() != 3 || w3.cols() != hidden || b1.size() != hidden ||
      b2.size() != hidden) {
    throw std::invalid_argument("PolicyNet: inconsistent layer shapes");
  }
  if (!w1.allFinite() || !w2.allFinite() || !w3.allFinite() || !b1.allFinite() ||
      !b2.allFinite() || !b3.allFinite() || !in_std.allFinite() || !out_std.allFinite()) {
    throw std::invalid_argument("PolicyNet: non-finite parameters");
  }
  if (!(in_std.array() > 0).all() || !(out_std.array() > 0).all()) {
    throw std::invalid_argument("PolicyNet: normalization scales must be positive");
  }
}

Vec3 PolicyNet::forward(const PolicyInVec& x) const {
  const PolicyInVec xn = (x - in_mean).cwiseQuotient(in_std);
  const VecX a1 = (w1 * xn + b1).array().tanh();
  const VecX a2 = (w2 * a1 + b2).array().tanh();
  const Vec3 yn = w3 * a2 + b3;
  return yn.cwiseProduct(out_std) + out_mean;
}

MatX PolicyNet::forward_batch(const MatX& x) const {
  if (x.rows() != kPolicyInDim) throw std::invalid_argument("PolicyNet: input must be 14 x n");
  const MatX xn = (x.colwise() - in_mean).array().colwise() / in_std.array();
  const MatX a1 = ((w1 * xn).colwise() + b1).array().tanh();
  const MatX a2 = ((w2 * a1).colwise() + b2).array().tanh();
  MatX y = ((w3 * a2).colwise() + b3);
  y = (y.array().colwise() * out_std.array()).colwise() + out_mean.array();
  return y;
}

Vec3 PolicyNet::forward_counted(const PolicyInVec& x, long* macs) const {
  long n = 0;
  PolicyInVec xn;
  for (int i = 0; i < kPolicyInDim; ++i) xn(i) = (x(i) - in_mean(i)) / in_std(i);
  VecX a1 = VecX::Zero(hidden);
  for (int r = 0; r < hidden; ++r) {
    double acc = b1(r);
    for (int c = 0; c < kPolicyInDim; ++c) {
      acc += w1(r, c) * xn(c);
      ++n;
    }
    a1(r) = std::tanh(acc);
  }
  VecX a2 = VecX::Zero(hidden);
  for (int r = 0; r < hidden; ++r) {
    double acc = b2(r);
    for (int c = 0; c < hidden; ++c) {
      acc += w2(r, c) * a1(c);
      ++n;
    }
    a2(r) = std::tanh(acc);
  }
  Vec3 y;
  for (int r = 0; r < 3; ++r) {
    double acc = b3(r);
    for (int c = 0; c < hidden; ++c) {
      acc += w3(r, c) * a2(c);
      ++n;
    }
    y(r) = acc;
  }
  if (macs) *macs = n;
  return y.cwiseProduct(out_std) + out_mean;
}

uint64_t PolicyNet::weight_hash() const {
  HashAccumulator h;
  h.add(static_cast<uint64_t>(hidden));
  h.add_matrix(w1);
  h.add_matrix(b1);
  h.add_matrix(w2);
  h.add_matrix(b2);
  h.add_matrix(w3);
  h.add_matrix(b3);
  h.add_matrix(in_mean);
  h.add_matrix(in_std);
  h.add_matrix(out_mean);
  h.add_matrix(out_std);
  return h.value();
}

}  // namespace fwmpc
