#include "fmcf/geometry.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fmcf {

namespace {

constexpr double kPi = std::numbers::pi;

Vec3 lat_lon_point(double elevation, double longitude) {
  return {std::cos(elevation) * std::cos(longitude), std::cos(elevation) * std::sin(longitude),
          std::sin(elevation)};
}

}  // namespace

SphereGrid SphereGrid::build(int n, int resolution, Topology topology) {
  if (n != 1 && n != 2) {
    throw std::invalid_argument("surface dimension n must be 1 or 2, got " + std::to_string(n));
  }
  if (resolution < 8) {
    throw std::invalid_argument("grid resolution must be at least 8, got " +
                                std::to_string(resolution));
  }
  SphereGrid g;
  g.n_ = n;
  g.resolution_ = resolution;
  g.topology_ = topology;
  const bool hemi = topology == Topology::hemisphere;

  if (n == 1) {
    const int count = resolution;
    g.spacing_ = hemi ? kPi / (count - 1) : 2.0 * kPi / count;
    g.nodes_.setZero(3, count);
    g.weights_.setConstant(count, g.spacing_);
    g.angles_.resize(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      const double phi = i * g.spacing_;
      g.angles_[static_cast<std::size_t>(i)] = phi;
      g.nodes_.col(i) << std::cos(phi), std::sin(phi), 0.0;
    }
    if (hemi) {
      // endpoints lie exactly on the supporting line
      g.nodes_(1, 0) = 0.0;
      g.nodes_(1, count - 1) = 0.0;
      g.nodes_(0, count - 1) = -1.0;
      g.weights_[0] *= 0.5;
      g.weights_[count - 1] *= 0.5;
    }
  } else {
    if (resolution % 4 != 0) {
      throw std::invalid_argument("n = 2 grids need a longitude count divisible by 4, got " +
                                  std::to_string(resolution));
    }
    const int lon = resolution;
    const int steps = resolution / 4;
    const double h = 2.0 * kPi / lon;
    g.spacing_ = h;
    g.max_step_ = steps;
    const int k_min = hemi ? 0 : -steps;
    std::vector<Vec3> pts;
    std::vector<double> wts;
    for (int k = k_min; k <= steps; ++k) {
      const double elev = k * h;
      const int ring = static_cast<int>(g.ring_start_.size());
      g.ring_start_.push_back(static_cast<Index>(pts.size()));
      g.ring_step_.push_back(k);
      g.ring_elevation_.push_back(elev);
      if (std::abs(k) == steps) {
        g.ring_size_.push_back(1);
        pts.emplace_back(0.0, 0.0, k > 0 ? 1.0 : -1.0);
        wts.push_back(2.0 * kPi * (1.0 - std::cos(0.5 * h)));
        g.ring_of_.push_back(ring);
        g.lon_of_.push_back(0);
        if (k > 0) g.pole_ring_ = ring;
        continue;
      }
      g.ring_size_.push_back(lon);
      const double w = std::cos(elev) * h * h * ((hemi && k == 0) ? 0.5 : 1.0);
      for (int j = 0; j < lon; ++j) {
        Vec3 p = lat_lon_point(elev, j * h);
        if (k == 0) p.z() = 0.0;
        pts.push_back(p);
        wts.push_back(w);
        g.ring_of_.push_back(ring);
        g.lon_of_.push_back(j);
      }
    }
    g.nodes_.resize(3, static_cast<Index>(pts.size()));
    g.weights_.resize(static_cast<Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
      g.nodes_.col(static_cast<Index>(i)) = pts[i];
      g.weights_[static_cast<Index>(i)] = wts[i];
    }
  }
  g.finalize();
  return g;
}

void SphereGrid::finalize() {
  const Index count = nodes_.cols();
  boundary_mask_.assign(static_cast<std::size_t>(count), false);
  conormals_.setZero(3, count);
  if (topology_ == Topology::hemisphere) {
    for (Index i = 0; i < count; ++i) {
      if (nodes_(n_, i) == 0.0) {
        boundary_mask_[static_cast<std::size_t>(i)] = true;
        boundary_nodes_.push_back(i);
        conormals_(n_, i) = -1.0;
      }
    }
  }
  chord_.resize(count, count);
  for (Index x = 0; x < count; ++x) {
    chord_(x, x) = 0.0;
    for (Index y = x + 1; y < count; ++y) {
      const double d = (nodes_.col(y) - nodes_.col(x)).norm();
      chord_(y, x) = d;
      chord_(x, y) = d;
    }
  }
}

Vec3 SphereGrid::tangent(Index i) const {
  const double phi = angle(i);
  return {-std::sin(phi), std::cos(phi), 0.0};
}

std::array<Index, 2> SphereGrid::parameter_neighbors(Index i) const {
  const Index count = size();
  if (topology_ == Topology::full_sphere) {
    return {(i + count - 1) % count, (i + 1) % count};
  }
  return {i > 0 ? i - 1 : Index{-1}, i + 1 < count ? i + 1 : Index{-1}};
}

int SphereGrid::ring_for_step(int k) const {
  const int offset = topology_ == Topology::hemisphere ? 0 : max_step_;
  const int ring = k + offset;
  if (ring < 0 || ring >= ring_count()) {
    throw std::out_of_range("latitude step outside the grid");
  }
  return ring;
}

Index SphereGrid::ring_node(int ring, int lon) const {
  const int size = ring_size_[static_cast<std::size_t>(ring)];
  const int j = size == 1 ? 0 : ((lon % size) + size) % size;
  return ring_start_[static_cast<std::size_t>(ring)] + j;
}

SphereGrid SphereGrid::doubled() const {
  if (topology_ != Topology::hemisphere) {
    throw std::invalid_argument("doubled() requires a hemisphere grid");
  }
  return build(n_, n_ == 1 ? 2 * (resolution_ - 1) : resolution_, Topology::full_sphere);
}

std::vector<Index> SphereGrid::reflection_map() const {
  if (topology_ != Topology::hemisphere) {
    throw std::invalid_argument("reflection_map() requires a hemisphere grid");
  }
  const SphereGrid full = doubled();
  std::vector<Index> map(static_cast<std::size_t>(full.size()));
  for (Index i = 0; i < full.size(); ++i) {
    if (n_ == 1) {
      const Index last = size() - 1;
      map[static_cast<std::size_t>(i)] = i <= last ? i : 2 * last - i;
    } else {
      const int k = full.step_for_ring(full.ring_of(i));
      map[static_cast<std::size_t>(i)] = ring_node(ring_for_step(std::abs(k)), full.longitude_of(i));
    }
  }
  return map;
}

RadialField::RadialField(GridPtr grid, Eigen::VectorXd values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw std::invalid_argument("radial field needs a grid");
  if (values_.size() != grid_->size()) {
    throw std::invalid_argument("radial field has " + std::to_string(values_.size()) +
                                " samples for a grid of " + std::to_string(grid_->size()));
  }
  if (!values_.allFinite() || values_.minCoeff() <= 0.0) {
    throw std::domain_error("radial function must be finite and strictly positive");
  }
  gradient_ = tangential_gradient(*grid_, values_);
}

RadialField RadialField::constant(GridPtr grid, double value) {
  const Index count = grid->size();
  return RadialField(std::move(grid), Eigen::VectorXd::Constant(count, value));
}

RadialField reflect_field(const RadialField& rho) {
  const SphereGrid& grid = rho.grid();
  if (!grid.is_hemisphere()) {
    throw std::invalid_argument("reflect_field expects a field on the hemisphere");
  }
  auto full = std::make_shared<const SphereGrid>(grid.doubled());
  const std::vector<Index> map = grid.reflection_map();
  Eigen::VectorXd values(full->size());
  for (Index i = 0; i < full->size(); ++i) values[i] = rho(map[static_cast<std::size_t>(i)]);
  return RadialField(std::move(full), std::move(values));
}

AngularDerivatives angular_derivatives(const SphereGrid& grid, const Eigen::VectorXd& u) {
  if (grid.dimension() != 1) {
    throw std::invalid_argument("angular derivatives are defined for n = 1 grids");
  }
  const Index count = grid.size();
  const double h = grid.spacing();
  AngularDerivatives d{Eigen::VectorXd(count), Eigen::VectorXd(count)};
  for (Index i = 0; i < count; ++i) {
    if (grid.topology() == Topology::full_sphere) {
      const double um = u[(i + count - 1) % count];
      const double up = u[(i + 1) % count];
      d.first[i] = (up - um) / (2.0 * h);
      d.second[i] = (up - 2.0 * u[i] + um) / (h * h);
    } else if (i == 0) {
      d.first[i] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
      d.second[i] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / (h * h);
    } else if (i == count - 1) {
      d.first[i] = (3.0 * u[i] - 4.0 * u[i - 1] + u[i - 2]) / (2.0 * h);
      d.second[i] = (2.0 * u[i] - 5.0 * u[i - 1] + 4.0 * u[i - 2] - u[i - 3]) / (h * h);
    } else {
      d.first[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
      d.second[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
    }
  }
  return d;
}

Eigen::Matrix3Xd tangential_gradient(const SphereGrid& grid, const Eigen::VectorXd& u) {
  if (u.size() != grid.size()) {
    throw std::invalid_argument("sample count does not match the grid");
  }
  const Index count = grid.size();
  Eigen::Matrix3Xd grad(3, count);
  if (grid.dimension() == 1) {
    const AngularDerivatives d = angular_derivatives(grid, u);
    for (Index i = 0; i < count; ++i) grad.col(i) = d.first[i] * grid.tangent(i);
    return grad;
  }

  const double h = grid.spacing();
  for (Index i = 0; i < count; ++i) {
    const int ring = grid.ring_of(i);
    const int k = grid.step_for_ring(ring);
    const int lon = grid.longitude_of(i);
    const Vec3 x = grid.node(i);
    if (std::abs(grid.elevation(ring)) > 0.5 * std::numbers::pi - 1e-12) {
      // pole: least-squares slope from the adjacent ring
      const int next = grid.ring_for_step(k > 0 ? k - 1 : k + 1);
      Vec3 g = Vec3::Zero();
      for (int j = 0; j < grid.resolution(); ++j) {
        const Index y = grid.ring_node(next, j);
        Vec3 dir = grid.node(y) - x.dot(grid.node(y)) * x;
        dir.normalize();
        g += (u[y] - u[i]) / h * dir;
      }
      grad.col(i) = (2.0 / grid.resolution()) * g;
      continue;
    }
    const double elev = grid.elevation(ring);
    const double lam = lon * h;
    const Vec3 e_elev(-std::sin(elev) * std::cos(lam), -std::sin(elev) * std::sin(lam),
                      std::cos(elev));
    const Vec3 e_lon(-std::sin(lam), std::cos(lam), 0.0);
    double d_elev = 0.0;
    if (grid.is_hemisphere() && k == 0) {
      const Index u1 = grid.ring_node(grid.ring_for_step(1), lon);
      const Index u2 = grid.ring_node(grid.ring_for_step(2), lon);
      d_elev = (-3.0 * u[i] + 4.0 * u[u1] - u[u2]) / (2.0 * h);
    } else {
      const Index up = grid.ring_node(grid.ring_for_step(k + 1), lon);
      const Index dn = grid.ring_node(grid.ring_for_step(k - 1), lon);
      d_elev = (u[up] - u[dn]) / (2.0 * h);
    }
    const double d_lon = (u[grid.ring_node(ring, lon + 1)] - u[grid.ring_node(ring, lon - 1)]) /
                         (2.0 * h * std::cos(elev));
    grad.col(i) = d_elev * e_elev + d_lon * e_lon;
  }
  return grad;
}

double conormal_derivative(const SphereGrid& grid, const Eigen::VectorXd& u, Index b) {
  if (!grid.is_hemisphere()) {
    throw std::invalid_argument("conormal derivative needs a hemisphere grid");
  }
  if (b < 0 || b >= grid.size() || !grid.is_boundary(b)) {
    throw std::invalid_argument("node " + std::to_string(b) + " is not on the boundary");
  }
  if (grid.dimension() == 1) {
    const AngularDerivatives d = angular_derivatives(grid, u);
    return d.first[b] * grid.tangent(b).dot(grid.conormal(b));
  }
  return tangential_gradient(grid, u).col(b).dot(grid.conormal(b));
}

double quad_integrate(const SphereGrid& grid, const Eigen::VectorXd& samples) {
  if (samples.size() != grid.size()) {
    throw std::invalid_argument("sample count " + std::to_string(samples.size()) +
                                " does not match grid size " + std::to_string(grid.size()));
  }
  return grid.weights().dot(samples);
}

}  // namespace fmcf
