#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "camsel/errors.hpp"
#include "camsel/geometry.hpp"

namespace camsel {

struct Correspondence {
  Eigen::Vector2d pixel;
  Eigen::Vector3d world_point;
  std::int64_t landmark_id = 0;
};

struct RansacConfig {
  double inlier_threshold_px = 2.0;
  int max_iterations = 1000;
  double confidence = 0.99;
  int min_inliers = 4;
  std::uint64_t rng_seed = 0;

  void validate() const {
    if (!(inlier_threshold_px > 0.0)) throw ConfigError("ransac.inlier_threshold_px", "must be > 0");
    if (max_iterations <= 0) throw ConfigError("ransac.max_iterations", "must be > 0");
    if (!(confidence > 0.0 && confidence < 1.0)) throw ConfigError("ransac.confidence", "must be in (0, 1)");
    if (min_inliers < 4) throw ConfigError("ransac.min_inliers", "must be >= 4");
  }
};

enum class LocalizationStatus { Success, Failed };

struct LocalizationResult {
  LocalizationStatus status = LocalizationStatus::Failed;
  std::optional<Pose> pose;  // world-from-body, present on Success
  int inlier_count = 0;
  double inlier_ratio = 0.0;
  int num_matched_points = 0;
  // Indices of inliers into the (camera-major) concatenation of the input lists.
  std::vector<int> inliers;

  bool ok() const noexcept { return status == LocalizationStatus::Success; }
};

// Correspondences observed by one rig camera.
struct CameraView {
  CameraModel camera;
  std::span<const Correspondence> correspondences;
};

namespace detail {

inline double polish_root(const std::array<double, 5>& coeffs, int degree, double x) {
  for (int it = 0; it < 8; ++it) {
    double v = 0.0;
    double deriv = 0.0;
    for (int i = degree; i >= 0; --i) {
      deriv = deriv * x + v;
      v = v * x + coeffs[static_cast<std::size_t>(i)];
    }
    if (deriv == 0.0) break;
    const double step = v / deriv;
    x -= step;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(x))) break;
  }
  return x;
}

// Roots of y^2 + b y + c, keeping nearly-real pairs as their real part.
inline void real_quadratic_roots(double b, double c, std::vector<double>& out) {
  const double disc = b * b - 4.0 * c;
  const double re = -b / 2.0;
  if (disc >= 0.0) {
    const double root = std::sqrt(disc);
    const double q = -0.5 * (b + std::copysign(root, b));
    if (q != 0.0) {
      out.push_back(q);
      out.push_back(c / q);
    } else {
      out.push_back(re);
      out.push_back(re);
    }
  } else if (std::sqrt(-disc) / 2.0 <= 1e-4 * (1.0 + std::abs(re))) {
    out.push_back(re);
  }
}

// Largest real root of m^3 + a m^2 + b m + c.
inline double largest_cubic_root(double a, double b, double c) {
  const double q = (a * a - 3.0 * b) / 9.0;
  const double r = (2.0 * a * a * a - 9.0 * a * b + 27.0 * c) / 54.0;
  double m;
  if (r * r < q * q * q) {
    const double theta = std::acos(std::clamp(r / std::sqrt(q * q * q), -1.0, 1.0));
    m = -2.0 * std::sqrt(q) * std::cos((theta - 2.0 * M_PI) / 3.0) - a / 3.0;
  } else {
    const double big = -std::copysign(std::cbrt(std::abs(r) + std::sqrt(r * r - q * q * q)), r);
    m = big + (big != 0.0 ? q / big : 0.0) - a / 3.0;
  }
  const std::array<double, 5> cubic{c, b, a, 1.0, 0.0};
  return polish_root(cubic, 3, m);
}

// Real roots of sum_i coeffs[i] * x^i (degree <= 4), polished with Newton steps.
inline std::vector<double> real_polynomial_roots(std::array<double, 5> coeffs) {
  const double scale = Eigen::Map<const Eigen::Matrix<double, 5, 1>>(coeffs.data()).cwiseAbs().maxCoeff();
  int degree = 4;
  while (degree > 0 && std::abs(coeffs[static_cast<std::size_t>(degree)]) <= 1e-14 * scale) --degree;
  if (degree < 1) return {};

  std::vector<double> roots;
  if (degree == 4 && std::abs(coeffs[4]) >= 1e-2 * scale) {
    // Ferrari: depress, split through a positive root of the resolvent cubic.
    const double lead = coeffs[4];
    const double a = coeffs[3] / lead;
    const double b = coeffs[2] / lead;
    const double c = coeffs[1] / lead;
    const double d = coeffs[0] / lead;
    const double shift = a / 4.0;
    const double p = b - 6.0 * shift * shift;
    const double q = c - 2.0 * b * shift + 8.0 * shift * shift * shift;
    const double r = d - c * shift + b * shift * shift - 3.0 * shift * shift * shift * shift;
    std::vector<double> ys;
    const double m = largest_cubic_root(p, p * p / 4.0 - r, -q * q / 8.0);
    if (m > 1e-12 * (1.0 + std::abs(p) + std::sqrt(std::abs(r)))) {
      const double s = std::sqrt(2.0 * m);
      const double k = q / (2.0 * s);
      real_quadratic_roots(-s, p / 2.0 + m + k, ys);
      real_quadratic_roots(s, p / 2.0 + m - k, ys);
    } else {
      // q ~ 0: biquadratic in y^2.
      std::vector<double> zs;
      real_quadratic_roots(p, r, zs);
      for (const double z : zs) {
        if (z > 0.0) {
          ys.push_back(std::sqrt(z));
          ys.push_back(-std::sqrt(z));
        } else if (z > -1e-8 * (1.0 + std::abs(p))) {
          ys.push_back(0.0);
        }
      }
    }
    for (const double y : ys) roots.push_back(polish_root(coeffs, 4, y - shift));
    return roots;
  }

  // Badly scaled or lower-degree input: companion matrix eigenvalues.
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(degree, degree);
  for (int i = 0; i < degree; ++i)
    companion(0, i) = -coeffs[static_cast<std::size_t>(degree - 1 - i)] / coeffs[static_cast<std::size_t>(degree)];
  for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  const Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  if (solver.info() != Eigen::Success) return {};
  for (int i = 0; i < degree; ++i) {
    const std::complex<double> z = solver.eigenvalues()[i];
    if (std::abs(z.imag()) > 1e-4 * (1.0 + std::abs(z.real()))) continue;
    roots.push_back(polish_root(coeffs, degree, z.real()));
  }
  return roots;
}

// Camera-from-world transform aligning world points onto camera-frame points.
inline std::optional<Pose> align_triangles(const std::array<Eigen::Vector3d, 3>& world,
                                           const std::array<Eigen::Vector3d, 3>& camera) {
  const Eigen::Vector3d wc = (world[0] + world[1] + world[2]) / 3.0;
  const Eigen::Vector3d cc = (camera[0] + camera[1] + camera[2]) / 3.0;
  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i) h += (world[i] - wc) * (camera[i] - cc).transpose();
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  d(2, 2) = (svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0 ? -1.0 : 1.0;
  const Eigen::Matrix3d r = svd.matrixV() * d * svd.matrixU().transpose();
  if (!is_rotation(r)) return std::nullopt;
  return Pose(r, cc - r * wc);
}

inline double squared_reprojection_error(const Intrinsics& k, const Eigen::Matrix3d& r, const Eigen::Vector3d& t,
                                         const Correspondence& c) {
  const Eigen::Vector3d pc = r * c.world_point + t;
  if (!(pc.z() > 0.0)) return std::numeric_limits<double>::infinity();
  const double u = k.fx * pc.x() / pc.z() + k.cx;
  const double v = k.fy * pc.y() / pc.z() + k.cy;
  return (u - c.pixel.x()) * (u - c.pixel.x()) + (v - c.pixel.y()) * (v - c.pixel.y());
}

}  // namespace detail

// Minimal absolute pose from three correspondences (Grunert's distance
// formulation reduced to a quartic in the depth ratio). Returns body poses
// (world-from-body) for a camera mounted at cam.extrinsic().
inline std::vector<Pose> solve_p3p(std::span<const Correspondence> corrs, const CameraModel& cam) {
  if (corrs.size() != 3) throw DegenerateInput("P3P needs exactly 3 correspondences");
  const Eigen::Vector3d& p1 = corrs[0].world_point;
  const Eigen::Vector3d& p2 = corrs[1].world_point;
  const Eigen::Vector3d& p3 = corrs[2].world_point;
  if (!p1.allFinite() || !p2.allFinite() || !p3.allFinite() || !corrs[0].pixel.allFinite() ||
      !corrs[1].pixel.allFinite() || !corrs[2].pixel.allFinite())
    throw DegenerateInput("non-finite correspondence");
  const double scale = std::max({(p2 - p1).norm(), (p3 - p1).norm(), (p3 - p2).norm()});
  if (!(scale > 0.0) || (p2 - p1).cross(p3 - p1).norm() <= 1e-10 * scale * scale)
    throw DegenerateInput("P3P world points are collinear or coincident");

  const Eigen::Vector3d f1 = cam.ray(corrs[0].pixel).normalized();
  const Eigen::Vector3d f2 = cam.ray(corrs[1].pixel).normalized();
  const Eigen::Vector3d f3 = cam.ray(corrs[2].pixel).normalized();
  if (f1.cross(f2).norm() < 1e-12 || f1.cross(f3).norm() < 1e-12 || f2.cross(f3).norm() < 1e-12)
    throw DegenerateInput("P3P bearings coincide");

  const double a2 = (p2 - p3).squaredNorm();
  const double b2 = (p1 - p3).squaredNorm();
  const double c2 = (p1 - p2).squaredNorm();
  const double cos_a = f2.dot(f3);
  const double cos_b = f1.dot(f3);
  const double cos_g = f1.dot(f2);

  // With s2 = u*s1 and s3 = v*s1: u = N(v) / D(v), and substituting into the
  // (1,2) distance constraint gives N^2 - 2 cos_g N D + Q D^2 = 0.
  const double k = (a2 - c2) / b2;
  const double r = c2 / b2;
  const std::array<double, 3> n{1.0 + k, -2.0 * k * cos_b, k - 1.0};
  const std::array<double, 2> d{2.0 * cos_g, -2.0 * cos_a};
  const std::array<double, 3> q{1.0 - r, 2.0 * r * cos_b, -r};

  std::array<double, 5> quartic{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) quartic[i + j] += n[i] * n[j];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j) quartic[i + j] -= 2.0 * cos_g * n[i] * d[j];
  std::array<double, 3> dd{d[0] * d[0], 2.0 * d[0] * d[1], d[1] * d[1]};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) quartic[i + j] += q[i] * dd[j];

  const std::array<Eigen::Vector3d, 3> bearings{f1, f2, f3};
  const std::array<Eigen::Vector3d, 3> world{p1, p2, p3};
  const std::array<double, 3> dist2{c2, b2, a2};  // pairs (0,1), (0,2), (1,2)
  constexpr std::array<std::array<int, 2>, 3> kPairs{{{0, 1}, {0, 2}, {1, 2}}};

  const Pose camera_from_body = inverse(cam.extrinsic());
  std::vector<Pose> out;
  for (const double v : detail::real_polynomial_roots(quartic)) {
    if (!(v > 0.0)) continue;
    const double den = d[0] + d[1] * v;
    if (std::abs(den) < 1e-12) continue;
    const double u = (n[0] + n[1] * v + n[2] * v * v) / den;
    if (!(u > 0.0)) continue;
    const double s1sq = b2 / (1.0 + v * v - 2.0 * v * cos_b);
    if (!(s1sq > 0.0)) continue;
    Eigen::Vector3d depth;
    depth << std::sqrt(s1sq), u * std::sqrt(s1sq), v * std::sqrt(s1sq);

    // Newton polish of the three pairwise distance constraints.
    for (int it = 0; it < 5; ++it) {
      Eigen::Vector3d res;
      Eigen::Matrix3d jac = Eigen::Matrix3d::Zero();
      for (int e = 0; e < 3; ++e) {
        const auto [i, j] = kPairs[e];
        const Eigen::Vector3d diff = depth[i] * bearings[i] - depth[j] * bearings[j];
        res[e] = diff.squaredNorm() - dist2[e];
        jac(e, i) = 2.0 * diff.dot(bearings[i]);
        jac(e, j) = -2.0 * diff.dot(bearings[j]);
      }
      const Eigen::PartialPivLU<Eigen::Matrix3d> lu(jac);
      if (!(std::abs(lu.determinant()) > 1e-300)) break;
      const Eigen::Vector3d step = lu.solve(res);
      depth -= step;
      if (step.norm() <= 1e-15 * depth.norm()) break;
    }
    if (!(depth.minCoeff() > 0.0)) continue;

    const std::array<Eigen::Vector3d, 3> in_camera{depth[0] * f1, depth[1] * f2, depth[2] * f3};
    const auto camera_from_world = detail::align_triangles(world, in_camera);
    if (!camera_from_world) continue;
    const Pose body = compose(inverse(*camera_from_world), camera_from_body);

    const Pose cfw = inverse(compose(body, cam.extrinsic()));
    bool consistent = true;
    for (const auto& c : corrs)
      if (detail::squared_reprojection_error(cam.intrinsics(), cfw.rotation(), cfw.translation(), c) > 1e-12)
        consistent = false;
    if (!consistent) continue;

    const bool duplicate = std::any_of(out.begin(), out.end(), [&](const Pose& p) {
      return (p.translation() - body.translation()).norm() < 1e-9 &&
             (p.rotation() - body.rotation()).cwiseAbs().maxCoeff() < 1e-9;
    });
    if (!duplicate) out.push_back(body);
  }
  return out;
}

namespace detail {

inline Pose perturb_body(const Pose& body, const Eigen::Matrix<double, 6, 1>& delta) {
  // Right perturbation in the body frame: rotation part first, then translation.
  const Pose step = Pose::from_axis_angle(delta.head<3>(), delta.tail<3>());
  return compose(body, step);
}

inline double joint_cost(const Pose& body, std::span<const CameraView> views) {
  double cost = 0.0;
  for (const auto& view : views) {
    const Pose cfw = inverse(compose(body, view.camera.extrinsic()));
    for (const auto& c : view.correspondences)
      cost += squared_reprojection_error(view.camera.intrinsics(), cfw.rotation(), cfw.translation(), c);
  }
  return cost;
}

}  // namespace detail

// Levenberg-Marquardt on the 6-DoF body pose minimizing joint reprojection
// error over every view. Only cost-decreasing steps are accepted.
inline Pose refine_rig_pose(const Pose& initial, std::span<const CameraView> views) {
  using Vec6 = Eigen::Matrix<double, 6, 1>;
  using Mat6 = Eigen::Matrix<double, 6, 6>;

  Pose current = initial;
  double cost = detail::joint_cost(current, views);
  if (!std::isfinite(cost)) return initial;
  double lambda = 1e-4;

  for (int iter = 0; iter < 50; ++iter) {
    Mat6 jtj = Mat6::Zero();
    Vec6 jtr = Vec6::Zero();
    const Eigen::Matrix3d body_rt = current.rotation().transpose();
    for (const auto& view : views) {
      const auto& k = view.camera.intrinsics();
      const Eigen::Matrix3d camera_from_body_r = view.camera.extrinsic().rotation().transpose();
      const Eigen::Vector3d& body_t_cam = view.camera.extrinsic().translation();
      for (const auto& c : view.correspondences) {
        const Eigen::Vector3d xb = body_rt * (c.world_point - current.translation());
        const Eigen::Vector3d xc = camera_from_body_r * (xb - body_t_cam);
        const double iz = 1.0 / xc.z();
        Eigen::Matrix<double, 2, 3> dproj;
        dproj << k.fx * iz, 0.0, -k.fx * xc.x() * iz * iz, 0.0, k.fy * iz, -k.fy * xc.y() * iz * iz;
        Eigen::Matrix<double, 3, 6> dxb;
        Eigen::Matrix3d skew;
        skew << 0.0, -xb.z(), xb.y(), xb.z(), 0.0, -xb.x(), -xb.y(), xb.x(), 0.0;
        dxb.leftCols<3>() = skew;
        dxb.rightCols<3>() = -Eigen::Matrix3d::Identity();
        const Eigen::Matrix<double, 2, 6> jac = dproj * camera_from_body_r * dxb;
        const Eigen::Vector2d res(k.fx * xc.x() * iz + k.cx - c.pixel.x(), k.fy * xc.y() * iz + k.cy - c.pixel.y());
        jtj.noalias() += jac.transpose() * jac;
        jtr.noalias() += jac.transpose() * res;
      }
    }

    const Eigen::SelfAdjointEigenSolver<Mat6> eig(jtj, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success || !(eig.eigenvalues()(0) > 1e-12 * std::max(eig.eigenvalues()(5), 1e-300)))
      return current;

    bool accepted = false;
    Vec6 step = Vec6::Zero();
    for (int attempt = 0; attempt < 10 && !accepted; ++attempt) {
      Mat6 damped = jtj;
      damped.diagonal() += lambda * jtj.diagonal();
      step = -damped.ldlt().solve(jtr);
      if (!step.allFinite()) return current;
      const Pose candidate = detail::perturb_body(current, step);
      const double candidate_cost = detail::joint_cost(candidate, views);
      if (candidate_cost <= cost) {
        current = candidate;
        cost = candidate_cost;
        lambda = std::max(lambda * 0.1, 1e-12);
        accepted = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted || step.norm() < 1e-10) break;
  }
  return current;
}

inline Pose refine_pose(const Pose& initial, std::span<const Correspondence> inliers, const CameraModel& cam) {
  const std::array<CameraView, 1> views{CameraView{cam, inliers}};
  return refine_rig_pose(initial, views);
}

namespace detail {

struct HypothesisScore {
  int count = 0;
  std::vector<int> inliers;
};

inline HypothesisScore score_pose(const Pose& body, std::span<const CameraView> views, double threshold_px,
                                  bool collect) {
  HypothesisScore s;
  const double thr2 = threshold_px * threshold_px;
  int offset = 0;
  for (const auto& view : views) {
    const Pose cfw = inverse(compose(body, view.camera.extrinsic()));
    const Eigen::Matrix3d& r = cfw.rotation();
    const Eigen::Vector3d& t = cfw.translation();
    const auto& k = view.camera.intrinsics();
    for (std::size_t i = 0; i < view.correspondences.size(); ++i) {
      if (squared_reprojection_error(k, r, t, view.correspondences[i]) <= thr2) {
        ++s.count;
        if (collect) s.inliers.push_back(offset + static_cast<int>(i));
      }
    }
    offset += static_cast<int>(view.correspondences.size());
  }
  return s;
}

inline double adaptive_iterations(double inlier_ratio, double confidence) {
  const double w3 = inlier_ratio * inlier_ratio * inlier_ratio;
  if (w3 >= 1.0) return 0.0;
  if (w3 <= 0.0) return std::numeric_limits<double>::infinity();
  return std::log(1.0 - confidence) / std::log(1.0 - w3);
}

inline LocalizationResult ransac_engine(std::span<const CameraView> views, const RansacConfig& cfg) {
  cfg.validate();
  LocalizationResult result;
  int total = 0;
  std::vector<int> offsets;
  std::vector<int> eligible;
  std::vector<double> weights;
  for (std::size_t v = 0; v < views.size(); ++v) {
    offsets.push_back(total);
    const int n = static_cast<int>(views[v].correspondences.size());
    total += n;
    if (n >= 3) {
      eligible.push_back(static_cast<int>(v));
      weights.push_back(static_cast<double>(n));
    }
  }
  result.num_matched_points = total;
  if (eligible.empty() || total < cfg.min_inliers) return result;

  std::mt19937_64 rng(cfg.rng_seed);
  std::discrete_distribution<int> pick_view(weights.begin(), weights.end());

  std::optional<Pose> best;
  int best_count = 0;
  double needed = static_cast<double>(cfg.max_iterations);
  for (int iter = 0; iter < cfg.max_iterations && iter < needed; ++iter) {
    const int v = eligible.size() > 1 ? eligible[static_cast<std::size_t>(pick_view(rng))] : eligible.front();
    const auto& view = views[static_cast<std::size_t>(v)];
    const int n = static_cast<int>(view.correspondences.size());
    std::uniform_int_distribution<int> pick(0, n - 1);
    std::array<int, 3> idx{};
    idx[0] = pick(rng);
    do idx[1] = pick(rng); while (idx[1] == idx[0]);
    do idx[2] = pick(rng); while (idx[2] == idx[0] || idx[2] == idx[1]);
    const std::array<Correspondence, 3> sample{view.correspondences[idx[0]], view.correspondences[idx[1]],
                                              view.correspondences[idx[2]]};
    std::vector<Pose> candidates;
    try {
      candidates = solve_p3p(sample, view.camera);
    } catch (const DegenerateInput&) {
      continue;
    }
    for (const auto& cand : candidates) {
      const int count = score_pose(cand, views, cfg.inlier_threshold_px, false).count;
      if (count > best_count) {
        best_count = count;
        best = cand;
        needed = std::min(needed, adaptive_iterations(static_cast<double>(count) / total, cfg.confidence));
      }
    }
  }

  result.inlier_count = best_count;
  result.inlier_ratio = static_cast<double>(best_count) / std::max(total, 1);
  if (!best || best_count < cfg.min_inliers) return result;

  // Refine on the consensus set; re-derive inliers under the refined pose
  // and repeat while the set keeps growing.
  Pose pose = *best;
  HypothesisScore score = score_pose(pose, views, cfg.inlier_threshold_px, true);
  for (int round = 0; round < 3; ++round) {
    std::vector<std::vector<Correspondence>> inlier_lists(views.size());
    for (const int gi : score.inliers) {
      const auto v = static_cast<std::size_t>(std::upper_bound(offsets.begin(), offsets.end(), gi) - offsets.begin() - 1);
      inlier_lists[v].push_back(views[v].correspondences[static_cast<std::size_t>(gi - offsets[v])]);
    }
    std::vector<CameraView> inlier_views;
    for (std::size_t v = 0; v < views.size(); ++v)
      if (!inlier_lists[v].empty()) inlier_views.push_back({views[v].camera, inlier_lists[v]});
    const Pose refined = refine_rig_pose(pose, inlier_views);
    HypothesisScore refined_score = score_pose(refined, views, cfg.inlier_threshold_px, true);
    if (refined_score.count < score.count) break;
    const bool same_set = refined_score.inliers == score.inliers;
    pose = refined;
    score = std::move(refined_score);
    if (same_set) break;
  }

  result.inlier_count = score.count;
  result.inlier_ratio = static_cast<double>(score.count) / std::max(total, 1);
  result.inliers = std::move(score.inliers);
  if (result.inlier_count < cfg.min_inliers) return result;
  result.status = LocalizationStatus::Success;
  result.pose = pose;
  return result;
}

}  // namespace detail

// Single-camera PnP inside a hypothesize-and-verify loop with adaptive
// termination, followed by least-squares refinement on the consensus set.
inline LocalizationResult localize_pnp_ransac(std::span<const Correspondence> corrs, const CameraModel& cam,
                                              const RansacConfig& cfg) {
  const std::array<CameraView, 1> views{CameraView{cam, corrs}};
  return detail::ransac_engine(views, cfg);
}

// Rig-space substitute for generalized PnP: hypotheses come from P3P on one
// camera (drawn per iteration with probability proportional to its number of
// correspondences), support is counted over every camera, and refinement is
// joint.
inline LocalizationResult localize_rig_pnp(std::span<const CameraView> per_camera, const Rig& rig,
                                           const RansacConfig& cfg) {
  for (const auto& view : per_camera) {
    if (view.camera.id() < 0 || view.camera.id() >= static_cast<int>(rig.size()) ||
        !(rig.camera(view.camera.id()) == view.camera))
      throw DomainError("camera view does not belong to the rig");
  }
  return detail::ransac_engine(per_camera, cfg);
}

}  // namespace camsel
