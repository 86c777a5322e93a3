#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "anisolab/exponents.hpp"

namespace anisolab {

/// Uniform tensor grid on the unit box (0,1)^N with n interior nodes per axis.
///
/// Nodes carry indices 0..n-1 per axis and sit at x = (i+1) h, h = 1/(n+1).
/// The boundary layer (i = -1 and i = n) is not stored; fields vanish there.
/// Faces along axis j are indexed by a = 0..n on that axis, face a joining
/// node a-1 and node a.
class Grid {
 public:
  Grid() = default;
  Grid(int dim, int n);

  int dim() const { return dim_; }
  int n() const { return n_; }
  double h() const { return h_; }
  double h(int /*axis*/) const { return h_; }

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_faces(int axis) const;
  double cell_volume() const { return volume_; }

  std::size_t stride(int axis) const { return strides_[static_cast<std::size_t>(axis)]; }
  std::array<int, 3> node_index(std::size_t linear) const;
  std::size_t node_linear(const std::array<int, 3>& idx) const;
  std::array<double, 3> node_coord(std::size_t linear) const;

  /// Faces on either side of a node along `axis` (face indices into a FaceField).
  std::size_t face_left(std::size_t node, int axis) const;
  std::size_t face_right(std::size_t node, int axis) const;

  /// Nodes adjacent to a face; -1 marks the boundary (zero ghost value).
  std::array<long, 2> face_nodes(std::size_t face, int axis) const;

  bool operator==(const Grid& other) const { return dim_ == other.dim_ && n_ == other.n_; }

 private:
  int dim_ = 0;
  int n_ = 0;
  double h_ = 0.0;
  double volume_ = 0.0;
  std::size_t num_nodes_ = 0;
  std::array<std::size_t, 3> strides_{};
};

/// Nodal grid function with homogeneous Dirichlet trace.
class Field {
 public:
  Field() = default;
  explicit Field(const Grid& grid, double value = 0.0);
  Field(const Grid& grid, std::vector<double> values);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double s);
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double s, Field a) { return a *= s; }

  double max_abs() const;

 private:
  Grid grid_;
  std::vector<double> values_;
};

/// Face-centred values along one axis (difference quotients, fluxes).
class FaceField {
 public:
  FaceField() = default;
  FaceField(const Grid& grid, int axis, double value = 0.0);

  const Grid& grid() const { return grid_; }
  int axis() const { return axis_; }
  std::size_t size() const { return values_.size(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

 private:
  Grid grid_;
  int axis_ = 0;
  std::vector<double> values_;
};

using FaceFields = std::vector<FaceField>;

/// (u(a) - u(a-1)) / h along `axis`, ghost values zero.
FaceField forward_diff(const Field& u, int axis);
FaceFields gradient(const Field& u);

/// Negative transpose of forward_diff: <D, v>_h = sum_j <psi_j, d_j v>_h exactly.
Field divergence_adjoint(std::span<const FaceField> psi);

/// Arithmetic mean of the two faces adjacent to each node.
Field node_average(const FaceField& face);

double integrate(const Field& w);
double inner(const Field& a, const Field& b);
double inner(const FaceField& a, const FaceField& b);
double lq_norm(const Field& w, double q);
double lq_norm(const FaceField& w, double q);
/// sum_j || d_j u ||_{L^{p_j}}
double anisotropic_norm(const Field& u, const ExponentVector& p);

/// Samples f at every node.
template <class F>
Field sample(const Grid& grid, F&& f) {
  Field out(grid);
  for (std::size_t i = 0; i < grid.num_nodes(); ++i) {
    const auto x = grid.node_coord(i);
    out[i] = f(std::span<const double>(x.data(), static_cast<std::size_t>(grid.dim())));
  }
  return out;
}

/// Value at the node nearest to x (zero outside the interior node hull).
double nearest_value(const Field& u, std::span<const double> x);

void write_field_csv(std::ostream& os, const Field& u);
void write_field_csv(const std::string& path, const Field& u);
Field read_field_csv(std::istream& is);
Field read_field_csv(const std::string& path);

}  // namespace anisolab
