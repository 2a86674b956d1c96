#include "barylab/space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "barylab/error.hpp"
#include "barylab/hash.hpp"

namespace barylab {

const char* to_string(SpaceKind kind) {
  switch (kind) {
    case SpaceKind::interval: return "interval";
    case SpaceKind::circle: return "circle";
    case SpaceKind::sphere: return "sphere";
    case SpaceKind::cone: return "cone";
    case SpaceKind::mesh: return "mesh_file";
    case SpaceKind::custom: return "custom";
  }
  return "custom";
}

SpaceKind space_kind_from_string(const std::string& name) {
  if (name == "interval") return SpaceKind::interval;
  if (name == "circle") return SpaceKind::circle;
  if (name == "sphere") return SpaceKind::sphere;
  if (name == "cone") return SpaceKind::cone;
  if (name == "mesh_file" || name == "mesh") return SpaceKind::mesh;
  if (name == "custom") return SpaceKind::custom;
  throw InvalidArgument("unknown space kind '" + name + "'");
}

DiscreteSpace::DiscreteSpace(SpaceData data) {
  const auto n = data.dist.rows();
  if (n < 1 || data.dist.cols() != n)
    throw InvalidArgument("distance matrix must be square and nonempty");
  if (data.ref_measure.size() != n)
    throw InvalidArgument("reference measure length does not match point count");
  if (data.coords.size() > 0 && data.coords.rows() != n)
    throw InvalidArgument("coordinate rows do not match point count");
  if (data.dim_n < 1) throw InvalidArgument("dim_n must be positive");
  auto impl = std::make_shared<Impl>();
  impl->cost = 0.5 * data.dist.array().square().matrix();
  impl->diameter = data.dist.maxCoeff();
  impl->total_volume = data.ref_measure.sum();
  Fnv1a h;
  h.value(static_cast<std::uint64_t>(n));
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) h.value(data.dist(i, j));
  for (Eigen::Index i = 0; i < n; ++i) h.value(data.ref_measure[i]);
  impl->fingerprint = h.digest();
  impl->data = std::move(data);
  impl_ = std::move(impl);
}

double DiscreteSpace::wasserstein_diameter() const { return diameter() / std::numbers::sqrt2; }

bool DiscreteSpace::same_as(const DiscreteSpace& other) const {
  if (impl_ == other.impl_) return true;
  if (!impl_ || !other.impl_) return false;
  return impl_->fingerprint == other.impl_->fingerprint && size() == other.size() &&
         dist() == other.dist();
}

MetricReport validate_metric(const DiscreteSpace& space, double tol) {
  MetricReport r;
  const auto& d = space.dist();
  const auto n = d.rows();
  const double scale = std::max(1.0, d.cwiseAbs().maxCoeff());
  const double atol = tol * scale;
  auto note = [&](double violation, const char* kind, std::vector<std::size_t> pts) {
    if (violation > r.worst_violation) {
      r.worst_violation = violation;
      r.worst_kind = kind;
      r.worst_points = std::move(pts);
    }
  };
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(d(i, i)) > atol) {
      r.zero_diagonal = false;
      note(std::abs(d(i, i)), "diagonal", {static_cast<std::size_t>(i)});
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (d(i, j) < -atol || !std::isfinite(d(i, j))) {
        r.nonnegative = false;
        note(std::isfinite(d(i, j)) ? -d(i, j) : INFINITY, "negative",
             {static_cast<std::size_t>(i), static_cast<std::size_t>(j)});
      }
      double asym = std::abs(d(i, j) - d(j, i));
      if (j > i && asym > atol) {
        r.symmetric = false;
        note(asym, "asymmetry", {static_cast<std::size_t>(i), static_cast<std::size_t>(j)});
      }
    }
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double dik = d(i, k);
      for (Eigen::Index j = 0; j < n; ++j) {
        double excess = d(i, j) - dik - d(k, j);
        if (excess > atol) {
          r.triangle = false;
          note(excess, "triangle",
               {static_cast<std::size_t>(i), static_cast<std::size_t>(k), static_cast<std::size_t>(j)});
        }
      }
    }
  }
  const auto& m = space.ref_measure();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(m[i] > 0.0)) {
      r.positive_ref_measure = false;
      note(m[i] <= 0.0 ? -m[i] : 0.0, "ref_measure", {static_cast<std::size_t>(i)});
    }
  }
  if (std::abs(space.diameter() - d.maxCoeff()) > atol) r.diameter_consistent = false;
  return r;
}

void require_valid(const DiscreteSpace& space) {
  auto r = validate_metric(space);
  if (r.ok()) return;
  std::ostringstream os;
  os << "space '" << space.label() << "' failed validation: " << r.worst_kind
     << " violation " << r.worst_violation << " at points";
  for (auto p : r.worst_points) os << ' ' << p;
  throw ValidationError(os.str());
}

namespace {

void require_resolution(std::size_t n) {
  if (n < 2) throw InvalidArgument("resolution must be at least 2");
}

std::string default_label(const char* kind, std::size_t n) {
  return std::string(kind) + "-" + std::to_string(n);
}

}  // namespace

DiscreteSpace build_interval(std::size_t n, double length) {
  require_resolution(n);
  if (!(length > 0.0)) throw InvalidArgument("interval length must be positive");
  SpaceData s;
  s.label = default_label("interval", n);
  s.kind = SpaceKind::interval;
  s.dim_n = 1;
  s.curv_k = 0.0;
  s.period = length;
  const auto N = static_cast<Eigen::Index>(n);
  const double h = length / static_cast<double>(n - 1);
  s.coords.resize(N, 1);
  for (Eigen::Index i = 0; i < N; ++i) s.coords(i, 0) = h * static_cast<double>(i);
  s.coords(N - 1, 0) = length;
  s.dist.resize(N, N);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < N; ++j) s.dist(i, j) = std::abs(s.coords(i, 0) - s.coords(j, 0));
  s.ref_measure = Eigen::VectorXd::Constant(N, h);
  s.ref_measure[0] = h / 2;
  s.ref_measure[N - 1] = h / 2;
  DiscreteSpace space(std::move(s));
  require_valid(space);
  return space;
}

DiscreteSpace build_circle(std::size_t n, double circumference) {
  require_resolution(n);
  if (!(circumference > 0.0)) throw InvalidArgument("circumference must be positive");
  SpaceData s;
  s.label = default_label("circle", n);
  s.kind = SpaceKind::circle;
  s.dim_n = 1;
  s.curv_k = 0.0;
  s.period = circumference;
  const auto N = static_cast<Eigen::Index>(n);
  const double h = circumference / static_cast<double>(n);
  s.coords.resize(N, 1);
  for (Eigen::Index i = 0; i < N; ++i) s.coords(i, 0) = h * static_cast<double>(i);
  s.dist.resize(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) {
      auto k = std::abs(i - j);
      k = std::min(k, N - k);
      s.dist(i, j) = h * static_cast<double>(k);
    }
  }
  s.ref_measure = Eigen::VectorXd::Constant(N, h);
  DiscreteSpace space(std::move(s));
  require_valid(space);
  return space;
}

DiscreteSpace build_sphere(std::size_t n, double radius) {
  require_resolution(n);
  if (!(radius > 0.0)) throw InvalidArgument("sphere radius must be positive");
  SpaceData s;
  s.label = default_label("sphere", n);
  s.kind = SpaceKind::sphere;
  s.dim_n = 2;
  s.curv_k = 1.0 / (radius * radius);
  const auto N = static_cast<Eigen::Index>(n);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  Eigen::MatrixXd unit(N, 3);
  for (Eigen::Index i = 0; i < N; ++i) {
    double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(N);
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    double th = golden * static_cast<double>(i);
    unit.row(i) << r * std::cos(th), r * std::sin(th), z;
  }
  s.coords = radius * unit;
  s.dist.resize(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    s.dist(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < N; ++j) {
      Eigen::Vector3d a = unit.row(i), b = unit.row(j);
      double ang = std::atan2(a.cross(b).norm(), a.dot(b));
      s.dist(i, j) = s.dist(j, i) = radius * ang;
    }
  }
  s.ref_measure = Eigen::VectorXd::Constant(N, 4.0 * std::numbers::pi * radius * radius / static_cast<double>(N));
  DiscreteSpace space(std::move(s));
  require_valid(space);
  return space;
}

double cone_distance(double r1, double th1, double r2, double th2, double angle) {
  double dth = std::fmod(std::abs(th1 - th2), angle);
  dth = std::min(dth, angle - dth);
  if (dth >= std::numbers::pi) return r1 + r2;
  double sq = r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * std::cos(dth);
  return std::sqrt(std::max(0.0, sq));
}

DiscreteSpace build_cone(std::size_t n, double angle, double radius) {
  require_resolution(n);
  if (!(angle > 0.0 && angle < 2.0 * std::numbers::pi))
    throw InvalidArgument("cone angle must lie in (0, 2*pi)");
  if (!(radius > 0.0)) throw InvalidArgument("cone radius must be positive");
  const double area = 0.5 * angle * radius * radius;
  const double spacing = std::sqrt(area / static_cast<double>(n));
  std::size_t rings = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(radius / spacing)), 1, n);
  // Points per ring proportional to ring length, at least one each, summing to n.
  const double dr = radius / static_cast<double>(rings);
  std::vector<double> mid(rings);
  double total_len = 0.0;
  for (std::size_t j = 0; j < rings; ++j) {
    mid[j] = (static_cast<double>(j) + 0.5) * dr;
    total_len += mid[j];
  }
  std::vector<std::size_t> count(rings, 1);
  std::size_t left = n - rings;
  std::vector<double> exact(rings);
  std::size_t assigned = 0;
  for (std::size_t j = 0; j < rings; ++j) {
    exact[j] = static_cast<double>(left) * mid[j] / total_len;
    auto f = static_cast<std::size_t>(std::floor(exact[j]));
    count[j] += f;
    assigned += f;
  }
  std::vector<std::size_t> order(rings);
  for (std::size_t j = 0; j < rings; ++j) order[j] = j;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return exact[a] - std::floor(exact[a]) > exact[b] - std::floor(exact[b]);
  });
  for (std::size_t k = 0; assigned < left; ++k, ++assigned) ++count[order[k % rings]];

  SpaceData s;
  s.label = default_label("cone", n);
  s.kind = SpaceKind::cone;
  s.dim_n = 2;
  s.curv_k = 0.0;
  const auto N = static_cast<Eigen::Index>(n);
  s.coords.resize(N, 2);
  s.ref_measure.resize(N);
  Eigen::Index p = 0;
  for (std::size_t j = 0; j < rings; ++j) {
    double r_in = static_cast<double>(j) * dr, r_out = r_in + dr;
    double cell = 0.5 * angle * (r_out * r_out - r_in * r_in) / static_cast<double>(count[j]);
    for (std::size_t q = 0; q < count[j]; ++q, ++p) {
      double th = angle * (static_cast<double>(q) + 0.5 * static_cast<double>(j % 2)) /
                  static_cast<double>(count[j]);
      s.coords(p, 0) = mid[j];
      s.coords(p, 1) = std::fmod(th, angle);
      s.ref_measure[p] = cell;
    }
  }
  s.dist.resize(N, N);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index k = 0; k < N; ++k)
      s.dist(i, k) = i == k ? 0.0
                            : cone_distance(s.coords(i, 0), s.coords(i, 1), s.coords(k, 0),
                                            s.coords(k, 1), angle);
  s.period = angle;
  DiscreteSpace space(std::move(s));
  require_valid(space);
  return space;
}

DiscreteSpace build_model_space(SpaceKind kind, std::size_t resolution,
                                const ModelSpaceParams& params) {
  DiscreteSpace space;
  switch (kind) {
    case SpaceKind::interval: space = build_interval(resolution, params.length); break;
    case SpaceKind::circle: space = build_circle(resolution, params.circumference); break;
    case SpaceKind::sphere: space = build_sphere(resolution, params.radius); break;
    case SpaceKind::cone: space = build_cone(resolution, params.angle, params.radius); break;
    case SpaceKind::mesh: space = build_mesh_file(params.mesh_path); break;
    case SpaceKind::custom: throw InvalidArgument("custom spaces are loaded from space files");
  }
  if (!params.label.empty()) {
    SpaceData d = space.data();
    d.label = params.label;
    space = DiscreteSpace(std::move(d));
  }
  return space;
}

}  // namespace barylab
