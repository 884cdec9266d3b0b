#include "fwmpc/trajgen/min_snap.hpp"

#include <cmath>
#include <stdexcept>

namespace fwmpc {

namespace {

constexpr int kC = PiecewisePolynomial::kCoeffs;

// value of d^deriv/dtau^deriv tau^k at tau, times the falling-factorial weight
double basis(int k, int deriv, double tau) {
  if (k < deriv) return 0.0;
  double w = 1.0;
  for (int d = 0; d < deriv; ++d) w *= (k - d);
  return w * std::pow(tau, k - deriv);
}

}  // namespace

PiecewisePolynomial::PiecewisePolynomial(std::vector<Eigen::Matrix<double, 3, kCoeffs>> coeffs,
                                         std::vector<double> durations)
    : coeffs_(std::move(coeffs)), durations_(std::move(durations)) {
  if (coeffs_.size() != durations_.size() || coeffs_.empty()) {
    throw std::invalid_argument("PiecewisePolynomial: size mismatch");
  }
  knots_.resize(durations_.size() + 1);
  knots_[0] = 0.0;
  for (size_t i = 0; i < durations_.size(); ++i) {
    if (!(durations_[i] > 0.0)) throw std::invalid_argument("PiecewisePolynomial: non-positive duration");
    knots_[i + 1] = knots_[i] + durations_[i];
  }
}

double PiecewisePolynomial::total_duration() const { return knots_.back(); }

Vec3 PiecewisePolynomial::eval(double t, int deriv) const {
  if (deriv < 0 || deriv > 6) throw std::invalid_argument("PiecewisePolynomial: bad derivative order");
  t = std::min(std::max(t, 0.0), total_duration());
  size_t seg = 0;
  while (seg + 1 < durations_.size() && t >= knots_[seg + 1]) ++seg;
  const double T = durations_[seg];
  const double tau = (t - knots_[seg]) / T;
  Vec3 out = Vec3::Zero();
  for (int k = deriv; k < kC; ++k) {
    out += coeffs_[seg].col(k) * basis(k, deriv, tau);
  }
  return out / std::pow(T, deriv);
}

PiecewisePolynomial min_snap(const std::vector<Vec3>& waypoints,
                             const std::vector<double>& durations) {
  const int M = static_cast<int>(durations.size());
  if (waypoints.size() != durations.size() + 1 || M < 1) {
    throw std::invalid_argument("min_snap: need n waypoints and n-1 durations, n >= 2");
  }
  for (double T : durations) {
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("min_snap: durations must be positive");
  }
  for (const Vec3& w : waypoints) {
    if (!w.allFinite()) throw std::invalid_argument("min_snap: non-finite waypoint");
  }

  const int nvar = kC * M;
  // integrated squared snap, block diagonal over segments
  MatX H = MatX::Zero(nvar, nvar);
  for (int s = 0; s < M; ++s) {
    const double T7 = std::pow(durations[s], 7);
    for (int i = 4; i < kC; ++i) {
      double ci = 1.0;
      for (int d = 0; d < 4; ++d) ci *= (i - d);
      for (int j = 4; j < kC; ++j) {
        double cj = 1.0;
        for (int d = 0; d < 4; ++d) cj *= (j - d);
        H(kC * s + i, kC * s + j) = ci * cj / ((i + j - 7) * T7);
      }
    }
  }

  const int ncon = 6 * M + 2;
  MatX A = MatX::Zero(ncon, nvar);
  MatX b = MatX::Zero(ncon, 3);
  int row = 0;

  auto deriv_row = [&](int seg, int deriv, double tau, double scale) {
    for (int k = 0; k < kC; ++k) A(row, kC * seg + k) = scale * basis(k, deriv, tau);
  };

  // boundary: position + zero velocity/acceleration/jerk at both ends
  deriv_row(0, 0, 0.0, 1.0);
  b.row(row++) = waypoints.front().transpose();
  for (int d = 1; d <= 3; ++d) {
    deriv_row(0, d, 0.0, 1.0 / std::pow(durations.front(), d));
    ++row;
  }
  deriv_row(M - 1, 0, 1.0, 1.0);
  b.row(row++) = waypoints.back().transpose();
  for (int d = 1; d <= 3; ++d) {
    deriv_row(M - 1, d, 1.0, 1.0 / std::pow(durations.back(), d));
    ++row;
  }

  // interior knots: waypoint hit from both sides, derivative continuity 1..4
  for (int s = 0; s + 1 < M; ++s) {
    deriv_row(s, 0, 1.0, 1.0);
    b.row(row++) = waypoints[s + 1].transpose();
    deriv_row(s + 1, 0, 0.0, 1.0);
    b.row(row++) = waypoints[s + 1].transpose();
    for (int d = 1; d <= 4; ++d) {
      deriv_row(s, d, 1.0, 1.0 / std::pow(durations[s], d));
      deriv_row(s + 1, d, 0.0, -1.0 / std::pow(durations[s + 1], d));
      ++row;
    }
  }
  if (row != ncon) throw std::logic_error("min_snap: constraint row miscount");

  // equilibrate before factorizing: the snap Hessian carries 1/T^7 factors that
  // dwarf the constraint rows and wreck the KKT pivots. Scaling H by a positive
  // scalar leaves the constrained minimizer unchanged, and row-scaling A just
  // rescales the multipliers.
  H /= std::max(1.0, H.cwiseAbs().maxCoeff());
  for (int r = 0; r < ncon; ++r) {
    const double rn = A.row(r).norm();
    if (rn > 0.0) {
      A.row(r) /= rn;
      b.row(r) /= rn;
    }
  }

  // KKT system, solved per axis with a shared factorization
  MatX KKT = MatX::Zero(nvar + ncon, nvar + ncon);
  KKT.topLeftCorner(nvar, nvar) = 2.0 * H;
  KKT.topRightCorner(nvar, ncon) = A.transpose();
  KKT.bottomLeftCorner(ncon, nvar) = A;
  Eigen::FullPivLU<MatX> lu(KKT);
  if (!lu.isInvertible()) throw std::runtime_error("min_snap: singular interpolation system");

  MatX rhs = MatX::Zero(nvar + ncon, 3);
  rhs.bottomRows(ncon) = b;
  const MatX sol = lu.solve(rhs);

  std::vector<Eigen::Matrix<double, 3, kC>> coeffs(M);
  for (int s = 0; s < M; ++s) {
    coeffs[s] = sol.block(kC * s, 0, kC, 3).transpose();
  }
  return PiecewisePolynomial(std::move(coeffs), durations);
}

}  // namespace fwmpc
