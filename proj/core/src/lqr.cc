// Copyright 2026 The gpslab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "gpslab/lqr.h"

#include <cmath>
#include <string>

#include "gpslab/error.h"

namespace gpslab {

double QuadraticCostExpansion::Expected(int t, const Gaussian& z) const {
  return 0.5 * (hessian[t].cwiseProduct(z.covariance)).sum() + Evaluate(t, z.mean);
}

QuadraticCostExpansion QuadraticCostExpansion::Zeros(int horizon, int dx, int du) {
  QuadraticCostExpansion e;
  e.dx = dx;
  e.du = du;
  e.hessian.assign(horizon, Mat::Zero(dx + du, dx + du));
  e.gradient.assign(horizon, Vec::Zero(dx + du));
  e.constant.assign(horizon, 0.0);
  return e;
}

QuadraticCostExpansion& QuadraticCostExpansion::operator+=(const QuadraticCostExpansion& o) {
  if (o.horizon() != horizon() || o.dx != dx || o.du != du) {
    throw DimensionError("adding cost expansions of different shape");
  }
  for (int t = 0; t < horizon(); ++t) {
    hessian[t] += o.hessian[t];
    gradient[t] += o.gradient[t];
    constant[t] += o.constant[t];
  }
  return *this;
}

QuadraticCostExpansion& QuadraticCostExpansion::operator*=(double scale) {
  for (int t = 0; t < horizon(); ++t) {
    hessian[t] *= scale;
    gradient[t] *= scale;
    constant[t] *= scale;
  }
  return *this;
}

QuadraticCostExpansion Quadratize(const StageCostFn& cost, const Mat& states,
                                  const Mat& actions) {
  const int horizon = static_cast<int>(states.rows());
  const int dx = static_cast<int>(states.cols());
  const int du = static_cast<int>(actions.cols());
  if (actions.rows() != horizon) throw DimensionError("states and actions differ in length");
  QuadraticCostExpansion e = QuadraticCostExpansion::Zeros(horizon, dx, du);
  for (int t = 0; t < horizon; ++t) {
    const Vec x = states.row(t).transpose();
    const Vec u = actions.row(t).transpose();
    const CostDerivatives d = cost(t, x, u);
    if (!std::isfinite(d.value) || !d.gradient.allFinite() || !d.hessian.allFinite()) {
      throw ExpansionError(t);
    }
    Vec z0(dx + du);
    z0 << x, u;
    const Mat h = Symmetrize(d.hessian);
    e.hessian[t] = h;
    e.gradient[t] = d.gradient - h * z0;
    e.constant[t] = d.value - d.gradient.dot(z0) + 0.5 * z0.dot(h * z0);
  }
  return e;
}

QuadraticCostExpansion QuadratizeAverage(const StageCostFn& cost,
                                         const std::vector<const Mat*>& states,
                                         const std::vector<const Mat*>& actions) {
  if (states.empty() || states.size() != actions.size()) {
    throw DimensionError("averaged expansion needs matching, non-empty trajectory lists");
  }
  QuadraticCostExpansion sum = Quadratize(cost, *states[0], *actions[0]);
  for (std::size_t j = 1; j < states.size(); ++j) sum += Quadratize(cost, *states[j], *actions[j]);
  sum *= 1.0 / static_cast<double>(states.size());
  return sum;
}

BackwardPassResult BackwardPass(const QuadraticCostExpansion& cost,
                                const LinearGaussianDynamics& dynamics) {
  const int horizon = cost.horizon();
  const int dx = cost.dx;
  const int du = cost.du;
  if (dynamics.horizon() != horizon - 1) {
    throw DimensionError("dynamics must cover T-1 steps of a T-step cost");
  }
  BackwardPassResult out;
  LinearGaussianController& ctl = out.controller;
  ValueRecursion& rec = out.recursion;
  ctl.K.resize(horizon);
  ctl.k.resize(horizon);
  ctl.C.resize(horizon);
  rec.vxx.resize(horizon);
  rec.vx.resize(horizon);
  rec.qzz.resize(horizon);
  rec.qz.resize(horizon);
  rec.shift.assign(horizon, 0.0);

  Mat vxx_next = Mat::Zero(dx, dx);
  Vec vx_next = Vec::Zero(dx);
  for (int t = horizon - 1; t >= 0; --t) {
    Mat qzz = cost.hessian[t];
    Vec qz = cost.gradient[t];
    if (t + 1 < horizon) {
      const DynamicsStep& f = dynamics.steps[t];
      Mat fz(dx, dx + du);
      fz << f.fx, f.fu;
      qzz += fz.transpose() * vxx_next * fz;
      qz += fz.transpose() * vx_next + fz.transpose() * (vxx_next * f.fc);
    }
    qzz = Symmetrize(qzz);

    const Mat qxx = qzz.topLeftCorner(dx, dx);
    const Mat qux = qzz.bottomLeftCorner(du, dx);
    const Vec qx = qz.head(dx);
    const Vec qu = qz.tail(du);
    Mat quu = qzz.bottomRightCorner(du, du);

    Eigen::LLT<Mat> llt(quu);
    double mu = 0.0;
    if (llt.info() != Eigen::Success) {
      mu = 1e-6;
      for (;;) {
        llt.compute(quu + mu * Mat::Identity(du, du));
        if (llt.info() == Eigen::Success) break;
        mu *= 2.0;
        if (mu > 1e16 || !std::isfinite(mu)) {
          throw BackwardPassError("Q_uu indefinite beyond the maximum shift at t=" +
                                  std::to_string(t));
        }
      }
      quu += mu * Mat::Identity(du, du);
    }
    rec.shift[t] = mu;

    const Mat K = -llt.solve(qux);
    const Vec k = -llt.solve(qu);
    ctl.K[t] = K;
    ctl.k[t] = k;
    ctl.C[t] = Symmetrize(llt.solve(Mat::Identity(du, du)));

    // Forms that stay consistent when a shift was applied.
    Mat vxx = qxx + K.transpose() * quu * K + K.transpose() * qux + qux.transpose() * K;
    Vec vx = qx + K.transpose() * quu * k + K.transpose() * qu + qux.transpose() * k;
    vxx = Symmetrize(vxx);
    rec.vxx[t] = vxx;
    rec.vx[t] = vx;
    rec.qzz[t] = qzz;
    rec.qz[t] = qz;
    vxx_next = vxx;
    vx_next = vx;
  }
  return out;
}

std::vector<Gaussian> ForwardPass(const LinearGaussianController& controller,
                                  const LinearGaussianDynamics& dynamics,
                                  const Gaussian& initial_state) {
  const int horizon = controller.horizon();
  if (dynamics.horizon() != horizon - 1) {
    throw DimensionError("controller and dynamics horizons do not match");
  }
  const int dx = controller.dx();
  const int du = controller.du();
  std::vector<Gaussian> marginals(horizon);
  Vec mx = initial_state.mean;
  Mat sx = initial_state.covariance;
  for (int t = 0; t < horizon; ++t) {
    const Mat& K = controller.K[t];
    Gaussian& z = marginals[t];
    z.mean.resize(dx + du);
    z.mean << mx, K * mx + controller.k[t];
    z.covariance.resize(dx + du, dx + du);
    z.covariance.topLeftCorner(dx, dx) = sx;
    z.covariance.topRightCorner(dx, du) = sx * K.transpose();
    z.covariance.bottomLeftCorner(du, dx) = K * sx;
    z.covariance.bottomRightCorner(du, du) = K * sx * K.transpose() + controller.C[t];
    z.covariance = Symmetrize(z.covariance);
    if (t + 1 < horizon) {
      const DynamicsStep& f = dynamics.steps[t];
      Mat fz(dx, dx + du);
      fz << f.fx, f.fu;
      mx = fz * z.mean + f.fc;
      sx = Symmetrize(fz * z.covariance * fz.transpose() + f.F);
    }
  }
  return marginals;
}

double ExpectedCost(const QuadraticCostExpansion& cost, const std::vector<Gaussian>& marginals) {
  double total = 0.0;
  for (int t = 0; t < cost.horizon(); ++t) total += cost.Expected(t, marginals[t]);
  return total;
}

}  // namespace gpslab
