#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace barylab {

enum class SpaceKind { interval, circle, sphere, cone, mesh, custom };

const char* to_string(SpaceKind kind);
SpaceKind space_kind_from_string(const std::string& name);

// Raw description of a finite metric-measure space.
struct SpaceData {
  std::string label;
  SpaceKind kind = SpaceKind::custom;
  int dim_n = 1;
  double curv_k = 0.0;
  Eigen::MatrixXd dist;
  Eigen::VectorXd ref_measure;
  // Embedding coordinates, one row per point; may be empty.
  Eigen::MatrixXd coords;
  // Length of the interval or circumference of the circle; 0 otherwise.
  double period = 0.0;
};

// Immutable, cheaply copyable handle to a finite metric-measure space.
// The cost matrix c = d^2 / 2 is computed once at construction.
class DiscreteSpace {
 public:
  DiscreteSpace() = default;
  explicit DiscreteSpace(SpaceData data);

  bool valid() const { return impl_ != nullptr; }
  std::size_t size() const { return static_cast<std::size_t>(impl_->data.dist.rows()); }
  const std::string& label() const { return impl_->data.label; }
  SpaceKind kind() const { return impl_->data.kind; }
  int dim_n() const { return impl_->data.dim_n; }
  double curv_k() const { return impl_->data.curv_k; }
  double period() const { return impl_->data.period; }
  double diameter() const { return impl_->diameter; }
  double total_volume() const { return impl_->total_volume; }
  const Eigen::MatrixXd& dist() const { return impl_->data.dist; }
  const Eigen::MatrixXd& cost() const { return impl_->cost; }
  const Eigen::VectorXd& ref_measure() const { return impl_->data.ref_measure; }
  const Eigen::MatrixXd& coords() const { return impl_->data.coords; }
  const SpaceData& data() const { return impl_->data; }
  std::uint64_t fingerprint() const { return impl_->fingerprint; }

  // Diameter of (P(space), W2) under the half-squared cost: diam / sqrt(2).
  double wasserstein_diameter() const;

  bool same_as(const DiscreteSpace& other) const;

 private:
  struct Impl {
    SpaceData data;
    Eigen::MatrixXd cost;
    double diameter = 0.0;
    double total_volume = 0.0;
    std::uint64_t fingerprint = 0;
  };
  std::shared_ptr<const Impl> impl_;
};

struct MetricReport {
  bool zero_diagonal = true;
  bool symmetric = true;
  bool nonnegative = true;
  bool triangle = true;
  bool positive_ref_measure = true;
  bool diameter_consistent = true;
  double worst_violation = 0.0;
  std::string worst_kind;
  std::vector<std::size_t> worst_points;

  bool ok() const {
    return zero_diagonal && symmetric && nonnegative && triangle && positive_ref_measure &&
           diameter_consistent;
  }
};

MetricReport validate_metric(const DiscreteSpace& space, double tol = 1e-12);

// Throws ValidationError carrying the report summary when validation fails.
void require_valid(const DiscreteSpace& space);

struct ModelSpaceParams {
  double length = 1.0;         // interval
  double circumference = 1.0;  // circle
  double radius = 1.0;         // sphere, cone (slant radius)
  double angle = 3.141592653589793;  // cone total angle, in (0, 2 pi)
  std::string mesh_path;       // mesh_file
  std::string label;           // optional override
};

DiscreteSpace build_interval(std::size_t n, double length = 1.0);
DiscreteSpace build_circle(std::size_t n, double circumference = 1.0);
DiscreteSpace build_sphere(std::size_t n, double radius = 1.0);
DiscreteSpace build_cone(std::size_t n, double angle, double radius = 1.0);
DiscreteSpace build_mesh_file(const std::string& path);
DiscreteSpace build_model_space(SpaceKind kind, std::size_t resolution,
                                const ModelSpaceParams& params = {});

// Geodesic distance on a flat cone of total angle `angle`, between points given
// in unrolled polar coordinates (r, theta) with theta in [0, angle).
double cone_distance(double r1, double th1, double r2, double th2, double angle);

// All-pairs shortest paths over a weighted undirected graph. Throws
// InvalidArgument naming the component count when the graph is disconnected.
struct WeightedEdge {
  std::size_t a;
  std::size_t b;
  double length;
};
Eigen::MatrixXd shortest_path_distances(std::size_t n, const std::vector<WeightedEdge>& edges);
std::vector<double> dijkstra(std::size_t n, const std::vector<std::vector<std::pair<std::size_t, double>>>& adj,
                             std::size_t source);

}  // namespace barylab
