#include "fwmpc/learning/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "fwmpc/util/rng.hpp"

namespace fwmpc {

void TrainConfig::validate() const {
  if (max_epochs < 1 || patience < 1 || batch_size < 1) {
    throw std::invalid_argument("TrainConfig: epochs, patience and batch size must be positive");
  }
  if (!(learning_rate > 0) || !(val_fraction > 0) || val_fraction >= 1.0) {
    throw std::invalid_argument("TrainConfig: bad learning rate or validation fraction");
  }
}

namespace {

struct AdamState {
  MatX m, v;
  explicit AdamState(const MatX& like) : m(MatX::Zero(like.rows(), like.cols())),
                                         v(MatX::Zero(like.rows(), like.cols())) {}
};

void adam_update(MatX& w, AdamState& st, const MatX& g, const TrainConfig& cfg, long t) {
  st.m = cfg.adam_beta1 * st.m + (1.0 - cfg.adam_beta1) * g;
  st.v = cfg.adam_beta2 * st.v + (1.0 - cfg.adam_beta2) * g.cwiseAbs2();
  const double bc1 = 1.0 - std::pow(cfg.adam_beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.adam_beta2, static_cast<double>(t));
  w.array() -= cfg.learning_rate * (st.m.array() / bc1) /
               ((st.v.array() / bc2).sqrt() + cfg.adam_eps);
}

struct Snapshot {
  MatX w1, w2, w3;
  VecX b1, b2;
  Vec3 b3;
};

Snapshot take(const PolicyNet& n) { return {n.w1, n.w2, n.w3, n.b1, n.b2, n.b3}; }

void restore(PolicyNet& n, const Snapshot& s) {
  n.w1 = s.w1;
  n.w2 = s.w2;
  n.w3 = s.w3;
  n.b1 = s.b1;
  n.b2 = s.b2;
  n.b3 = s.b3;
}

}  // namespace

TrainReport train_policy(const Dataset& data, const TrainConfig& cfg, PolicyNet* net) {
  cfg.validate();
  data.validate();
  if (!net) throw std::invalid_argument("train_policy: null network");
  net->validate();
  const int n = data.size();
  if (n < 4) throw std::invalid_argument("train_policy: dataset too small");

  Rng rng(cfg.seed);

  // split: validation indices drawn from a seeded shuffle
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng.raw());
  const int n_val = std::max(1, static_cast<int>(std::lround(cfg.val_fraction * n)));
  const int n_train = n - n_val;
  if (n_train < 1) throw std::invalid_argument("train_policy: no training samples left");

  MatX x_train(kPolicyInDim, n_train), y_train(3, n_train);
  MatX x_val(kPolicyInDim, n_val), y_val(3, n_val);
  for (int i = 0; i < n_train; ++i) {
    x_train.col(i) = data.inputs().col(order[i]);
    y_train.col(i) = data.targets().col(order[i]);
  }
  for (int i = 0; i < n_val; ++i) {
    x_val.col(i) = data.inputs().col(order[n_train + i]);
    y_val.col(i) = data.targets().col(order[n_train + i]);
  }

  if (!cfg.warm_start) {
    // normalization statistics from the training split only
    net->in_mean = x_train.rowwise().mean();
    net->out_mean = y_train.rowwise().mean();
    for (int r = 0; r < kPolicyInDim; ++r) {
      const double var = (x_train.row(r).array() - net->in_mean(r)).square().mean();
      net->in_std(r) = std::max(std::sqrt(var), 1e-8);
    }
    for (int r = 0; r < 3; ++r) {
      const double var = (y_train.row(r).array() - net->out_mean(r)).square().mean();
      net->out_std(r) = std::max(std::sqrt(var), 1e-8);
    }
  }

  const MatX xn_train = (x_train.colwise() - net->in_mean).array().colwise() / net->in_std.array();
  const MatX yn_train = (y_train.colwise() - net->out_mean).array().colwise() / net->out_std.array();
  const MatX xn_val = (x_val.colwise() - net->in_mean).array().colwise() / net->in_std.array();
  const MatX yn_val = (y_val.colwise() - net->out_mean).array().colwise() / net->out_std.array();

  AdamState s_w1(net->w1), s_w2(net->w2), s_w3(net->w3);
  AdamState s_b1(net->b1), s_b2(net->b2), s_b3(net->b3);
  long adam_t = 0;

  auto val_mse_normalized = [&]() {
    const MatX a1 = ((net->w1 * xn_val).colwise() + net->b1).array().tanh();
    const MatX a2 = ((net->w2 * a1).colwise() + net->b2).array().tanh();
    const MatX y = ((net->w3 * a2).colwise() + net->b3);
    return (y - yn_val).squaredNorm() / (3.0 * n_val);
  };

  TrainReport rep;
  double best = std::numeric_limits<double>::infinity();
  Snapshot best_weights = take(*net);
  std::vector<int> idx(n_train);
  std::iota(idx.begin(), idx.end(), 0);

  double train_mse = 0.0;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    std::shuffle(idx.begin(), idx.end(), rng.raw());
    train_mse = 0.0;
    int batches = 0;
    for (int start = 0; start < n_train; start += cfg.batch_size) {
      const int bs = std::min(cfg.batch_size, n_train - start);
      MatX xb(kPolicyInDim, bs), yb(3, bs);
      for (int i = 0; i < bs; ++i) {
        xb.col(i) = xn_train.col(idx[start + i]);
        yb.col(i) = yn_train.col(idx[start + i]);
      }

      const MatX z1 = (net->w1 * xb).colwise() + net->b1;
      const MatX a1 = z1.array().tanh();
      const MatX z2 = (net->w2 * a1).colwise() + net->b2;
      const MatX a2 = z2.array().tanh();
      const MatX y = (net->w3 * a2).colwise() + net->b3;

      const MatX err = y - yb;
      const double loss = err.squaredNorm() / (3.0 * bs);
      if (!std::isfinite(loss)) {
        throw std::runtime_error("train_policy: non-finite loss at epoch " + std::to_string(epoch));
      }
      train_mse += loss;
      ++batches;

      const MatX dy = (2.0 / (3.0 * bs)) * err;
      const MatX dw3 = dy * a2.transpose();
      const Vec3 db3 = dy.rowwise().sum();
      const MatX dz2 = (net->w3.transpose() * dy).array() * (1.0 - a2.array().square());
      const MatX dw2 = dz2 * a1.transpose();
      const VecX db2 = dz2.rowwise().sum();
      const MatX dz1 = (net->w2.transpose() * dz2).array() * (1.0 - a1.array().square());
      const MatX dw1 = dz1 * xb.transpose();
      const VecX db1 = dz1.rowwise().sum();

      ++adam_t;
      adam_update(net->w1, s_w1, dw1, cfg, adam_t);
      adam_update(net->w2, s_w2, dw2, cfg, adam_t);
      adam_update(net->w3, s_w3, dw3, cfg, adam_t);
      MatX b1m = net->b1, b2m = net->b2, b3m = net->b3;
      adam_update(b1m, s_b1, db1, cfg, adam_t);
      adam_update(b2m, s_b2, db2, cfg, adam_t);
      adam_update(b3m, s_b3, db3, cfg, adam_t);
      net->b1 = b1m;
      net->b2 = b2m;
      net->b3 = b3m;
    }
    train_mse /= std::max(1, batches);

    const double vm = val_mse_normalized();
    rep.val_history.push_back(vm);
    rep.epochs_run = epoch;
    if (vm < best) {
      best = vm;
      rep.best_epoch = epoch;
      best_weights = take(*net);
    } else if (epoch - rep.best_epoch >= cfg.patience) {
      rep.stopped_early = true;
      break;
    }
  }

  restore(*net, best_weights);
  rep.final_train_mse = train_mse;

  // denormalized per-component validation MSE of the restored network
  {
    const MatX yv = net->forward_batch(x_val);
    rep.best_val_mse = (yv - y_val).squaredNorm() / (3.0 * n_val);
    net->val_mse = rep.best_val_mse;
  }
  return rep;
}

}  // namespace fwmpc
