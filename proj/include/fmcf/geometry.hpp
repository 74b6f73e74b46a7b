#ifndef FMCF_GEOMETRY_HPP
#define FMCF_GEOMETRY_HPP

#include <Eigen/Dense>

#include <array>
#include <memory>
#include <vector>

namespace fmcf {

using Index = Eigen::Index;
using Vec3 = Eigen::Vector3d;

/// Which part of the unit sphere a grid covers.
enum class Topology { hemisphere, full_sphere };

/// Quadrature discretization of the upper hemisphere or the whole unit sphere.
///
/// Ambient points are stored as 3-vectors; for n = 1 the third coordinate is
/// identically zero and the "vertical" axis x_{n+1} is the second coordinate.
///
/// n = 1: nodes are equally spaced in the polar angle phi. The hemisphere grid
///        includes both endpoints phi = 0 and phi = pi (trapezoidal weights);
///        the full circle is uniform on [0, 2 pi).
/// n = 2: latitude-longitude product grid. `resolution` is the number of
///        longitudes per ring (a multiple of 4); rings are spaced by the same
///        angle and include the equator and the pole(s), each pole being a
///        single node weighted by its polar cap area.
class SphereGrid {
 public:
  static SphereGrid build(int n, int resolution, Topology topology);

  int dimension() const { return n_; }
  int resolution() const { return resolution_; }
  Topology topology() const { return topology_; }
  bool is_hemisphere() const { return topology_ == Topology::hemisphere; }
  Index size() const { return nodes_.cols(); }

  /// Angular step between neighbouring nodes (both directions for n = 2).
  double spacing() const { return spacing_; }

  const Eigen::Matrix3Xd& nodes() const { return nodes_; }
  Vec3 node(Index i) const { return nodes_.col(i); }
  const Eigen::VectorXd& weights() const { return weights_; }

  bool is_boundary(Index i) const { return boundary_mask_[static_cast<std::size_t>(i)]; }
  const std::vector<bool>& boundary_mask() const { return boundary_mask_; }
  const std::vector<Index>& boundary_nodes() const { return boundary_nodes_; }

  /// Outward unit conormal of the hemisphere at a boundary node, zero elsewhere.
  Vec3 conormal(Index i) const { return conormals_.col(i); }

  /// Pairwise Euclidean distances |y - x|, computed once at construction.
  const Eigen::MatrixXd& chord() const { return chord_; }
  double chord(Index y, Index x) const { return chord_(y, x); }

  /// Index of the coordinate x_{n+1} (the axis normal to the supporting plane).
  int vertical_axis() const { return n_; }

  // n = 1 structure.
  double angle(Index i) const { return angles_[static_cast<std::size_t>(i)]; }
  /// Unit tangent in the direction of increasing phi (n = 1).
  Vec3 tangent(Index i) const;
  /// Neighbours along the parameter line, -1 where absent (n = 1 only).
  std::array<Index, 2> parameter_neighbors(Index i) const;

  // n = 2 structure.
  int ring_count() const { return static_cast<int>(ring_start_.size()); }
  int pole_ring() const { return pole_ring_; }
  int ring_of(Index i) const { return ring_of_[static_cast<std::size_t>(i)]; }
  int longitude_of(Index i) const { return lon_of_[static_cast<std::size_t>(i)]; }
  double elevation(int ring) const { return ring_elevation_[static_cast<std::size_t>(ring)]; }
  /// Node on `ring` with the given longitude index (the pole node for pole rings).
  Index ring_node(int ring, int lon) const;
  /// Ring index for the signed latitude step k (k = 0 is the equator).
  int ring_for_step(int k) const;
  int step_for_ring(int ring) const { return ring_step_[static_cast<std::size_t>(ring)]; }

  /// The full-sphere grid whose upper half coincides with this hemisphere grid.
  SphereGrid doubled() const;
  /// For each node of doubled(), the hemisphere node holding its reflected value.
  std::vector<Index> reflection_map() const;

 private:
  SphereGrid() = default;
  void finalize();

  int n_ = 1;
  int resolution_ = 0;
  Topology topology_ = Topology::hemisphere;
  double spacing_ = 0.0;
  Eigen::Matrix3Xd nodes_;
  Eigen::VectorXd weights_;
  std::vector<bool> boundary_mask_;
  std::vector<Index> boundary_nodes_;
  Eigen::Matrix3Xd conormals_;
  Eigen::MatrixXd chord_;

  std::vector<double> angles_;

  std::vector<Index> ring_start_;
  std::vector<int> ring_size_;
  std::vector<int> ring_step_;
  std::vector<double> ring_elevation_;
  std::vector<int> ring_of_;
  std::vector<int> lon_of_;
  int pole_ring_ = -1;
  int max_step_ = 0;
};

using GridPtr = std::shared_ptr<const SphereGrid>;

inline GridPtr build_grid(int n, int resolution, Topology topology) {
  return std::make_shared<const SphereGrid>(SphereGrid::build(n, resolution, topology));
}

/// Radial function rho > 0 sampled on a grid, with its tangential gradient.
class RadialField {
 public:
  RadialField(GridPtr grid, Eigen::VectorXd values);

  static RadialField constant(GridPtr grid, double value);

  const SphereGrid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }
  double operator()(Index i) const { return values_[i]; }
  Index size() const { return values_.size(); }

  /// Tangential gradient, one ambient vector per node.
  const Eigen::Matrix3Xd& gradient() const { return gradient_; }
  Vec3 gradient(Index i) const { return gradient_.col(i); }

 private:
  GridPtr grid_;
  Eigen::VectorXd values_;
  Eigen::Matrix3Xd gradient_;
};

/// Even extension across the equator onto the doubled full-sphere grid.
RadialField reflect_field(const RadialField& rho);

/// Tangential gradient of arbitrary samples (centred differences, second-order
/// one-sided stencils at the hemisphere boundary).
Eigen::Matrix3Xd tangential_gradient(const SphereGrid& grid, const Eigen::VectorXd& u);

/// First and second derivatives along the polar angle (n = 1 only).
struct AngularDerivatives {
  Eigen::VectorXd first;
  Eigen::VectorXd second;
};
AngularDerivatives angular_derivatives(const SphereGrid& grid, const Eigen::VectorXd& u);

/// Outward conormal derivative at a hemisphere boundary node.
double conormal_derivative(const SphereGrid& grid, const Eigen::VectorXd& u, Index b);

double quad_integrate(const SphereGrid& grid, const Eigen::VectorXd& samples);

}  // namespace fmcf

#endif  // FMCF_GEOMETRY_HPP
