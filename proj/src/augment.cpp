#include "fwmpc/learning/augment.hpp"

#include <cmath>
#include <stdexcept>

#include "fwmpc/core/quat.hpp"
#include "fwmpc/learning/policy_frame.hpp"
#include "fwmpc/tube/frame.hpp"
#include "fwmpc/util/rng.hpp"

namespace fwmpc {

namespace {

// Full state matching the sampled alternative coordinates, at the reference
// heading (so its own aligned frame is the identity and the sampled body rate
// is the body rate).
RobotState state_from_alternative(const AltStateVec& xs, const Vec3& r1) {
  const Vec3 n_raw(std::cos(xs(6)), std::cos(xs(7)), std::cos(xs(8)));
  const double nn = n_raw.norm();
  if (nn < 0.2) throw std::runtime_error("augment: degenerate sampled body-z direction");
  const Vec3 z = n_raw / nn;
  Vec3 y = z.cross(r1);
  const double yn = y.norm();
  if (yn < 1e-8) throw std::runtime_error("augment: sampled body-z parallel to the heading");
  y /= yn;
  Mat3 R;
  R.col(0) = y.cross(z);
  R.col(1) = y;
  R.col(2) = z;
  return RobotState(xs.segment<3>(0), xs.segment<3>(3), rotmat_to_quat(R), xs.segment<3>(9));
}

}  // namespace

Dataset augment_demo(const ExpertDemo& demo, const Tube& tube, const CmdBounds& input_bounds,
                     const AugmentOptions& opt) {
  demo.validate();
  tube.validate();
  if (demo.gains.size() != demo.inputs.size()) {
    throw std::invalid_argument("augment_demo: demo has no sensitivity gains");
  }
  if (opt.n_per_step < 0) throw std::invalid_argument("augment_demo: n_per_step must be >= 0");

  const double t_total = demo.ref.duration();
  const int K = demo.steps();
  Dataset data;
  data.reserve(K * (opt.n_per_step + 1));

  for (int k = 0; k < K; ++k) {
    const double t = k * demo.ref.dt;
    const Vec3& r1 = demo.ref.body_x_at(k);
    const RobotState& x_demo = demo.states[k];
    const CmdVec& u_demo = demo.inputs[k];
    const GainMat& K_gain = demo.gains[k];

    if (opt.include_demo_pairs) {
      const PolicyFrame f = make_policy_frame(x_demo, r1);
      data.push_back(encode_policy_input(x_demo, f, t, t_total),
                     aligned_target_from_command(u_demo, f), PairTag::kDemo);
    }

    if (opt.n_per_step == 0) continue;
    const AltStateVec center = to_alternative_state(x_demo, frame_align(quat_to_rotmat(x_demo.q), r1));
    const StateVec x_demo_vec = x_demo.to_vector();
    Rng rng = Rng::derive(opt.seed, 0x61756764ull, k);

    for (int s = 0; s < opt.n_per_step; ++s) {
      // rejection-sample a valid state inside the cross-section
      RobotState x_aug;
      bool ok = false;
      double shrink = 1.0;
      for (int tries = 0; tries < 32 && !ok; ++tries) {
        AltStateVec xs = center;
        for (int j = 0; j < kAltStateDim; ++j) {
          xs(j) += shrink * rng.uniform(-tube.dx(j), tube.dx(j));
        }
        try {
          x_aug = state_from_alternative(xs, r1);
          ok = true;
        } catch (const std::runtime_error&) {
          shrink *= 0.8;
        }
      }
      if (!ok) throw std::runtime_error("augment_demo: could not sample a valid state at step " +
                                        std::to_string(k));

      const CmdVec u_aug =
          input_bounds.clip(u_demo + K_gain * (x_aug.to_vector() - x_demo_vec));
      const PolicyFrame f = make_policy_frame(x_aug, r1);
      data.push_back(encode_policy_input(x_aug, f, t, t_total),
                     aligned_target_from_command(u_aug, f), PairTag::kAugmented);
    }
  }

  data.validate();
  return data;
}

}  // namespace fwmpc
