#include "anisolab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace anisolab {

Grid::Grid(int dim, int n) : dim_(dim), n_(n) {
  if (dim < 2 || dim > 3) throw std::invalid_argument("grid dimension must be 2 or 3");
  if (n < 3) throw std::invalid_argument("grid needs at least 3 interior nodes per axis");
  h_ = 1.0 / (n + 1);
  volume_ = std::pow(h_, dim);
  num_nodes_ = 1;
  for (int a = 0; a < 3; ++a) {
    strides_[static_cast<std::size_t>(a)] = a < dim ? num_nodes_ : 0;
    if (a < dim) num_nodes_ *= static_cast<std::size_t>(n);
  }
}

std::size_t Grid::num_faces(int axis) const {
  (void)axis;
  return num_nodes_ / static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_ + 1);
}

std::array<int, 3> Grid::node_index(std::size_t linear) const {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = 0; a < dim_; ++a) {
    idx[static_cast<std::size_t>(a)] = static_cast<int>(linear % static_cast<std::size_t>(n_));
    linear /= static_cast<std::size_t>(n_);
  }
  return idx;
}

std::size_t Grid::node_linear(const std::array<int, 3>& idx) const {
  std::size_t out = 0;
  for (int a = 0; a < dim_; ++a) out += static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]) * stride(a);
  return out;
}

std::array<double, 3> Grid::node_coord(std::size_t linear) const {
  const auto idx = node_index(linear);
  std::array<double, 3> x{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) x[static_cast<std::size_t>(a)] = (idx[static_cast<std::size_t>(a)] + 1) * h_;
  return x;
}

// Face layout for axis j: the multi-index of the node with coordinate j
// replaced by the face position a in 0..n, linearised with axis 0 fastest and
// extent n+1 along j.
namespace {

std::size_t face_linear(const Grid& g, const std::array<int, 3>& idx, int axis) {
  std::size_t out = 0;
  std::size_t stride = 1;
  for (int a = 0; a < g.dim(); ++a) {
    const auto ext = static_cast<std::size_t>(a == axis ? g.n() + 1 : g.n());
    out += static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]) * stride;
    stride *= ext;
  }
  return out;
}

std::array<int, 3> face_index(const Grid& g, std::size_t linear, int axis) {
  std::array<int, 3> idx{0, 0, 0};
  for (int a = 0; a < g.dim(); ++a) {
    const auto ext = static_cast<std::size_t>(a == axis ? g.n() + 1 : g.n());
    idx[static_cast<std::size_t>(a)] = static_cast<int>(linear % ext);
    linear /= ext;
  }
  return idx;
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string("grid mismatch in ") + what);
}

}  // namespace

std::size_t Grid::face_left(std::size_t node, int axis) const {
  return face_linear(*this, node_index(node), axis);
}

std::size_t Grid::face_right(std::size_t node, int axis) const {
  auto idx = node_index(node);
  idx[static_cast<std::size_t>(axis)] += 1;
  return face_linear(*this, idx, axis);
}

std::array<long, 2> Grid::face_nodes(std::size_t face, int axis) const {
  auto idx = face_index(*this, face, axis);
  const int a = idx[static_cast<std::size_t>(axis)];
  std::array<long, 2> out{-1, -1};
  if (a >= 1) {
    auto l = idx;
    l[static_cast<std::size_t>(axis)] = a - 1;
    out[0] = static_cast<long>(node_linear(l));
  }
  if (a <= n_ - 1) out[1] = static_cast<long>(node_linear(idx));
  return out;
}

Field::Field(const Grid& grid, double value) : grid_(grid), values_(grid.num_nodes(), value) {}

Field::Field(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid.num_nodes()) throw std::invalid_argument("field size does not match grid");
}

Field& Field::operator+=(const Field& other) {
  require_same_grid(grid_, other.grid_, "Field::operator+=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  require_same_grid(grid_, other.grid_, "Field::operator-=");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

FaceField::FaceField(const Grid& grid, int axis, double value)
    : grid_(grid), axis_(axis), values_(grid.num_faces(axis), value) {
  if (axis < 0 || axis >= grid.dim()) throw std::invalid_argument("face axis out of range");
}

FaceField forward_diff(const Field& u, int axis) {
  const Grid& g = u.grid();
  if (axis < 0 || axis >= g.dim()) throw std::invalid_argument("forward_diff: axis out of range");
  FaceField out(g, axis);
  const double inv_h = 1.0 / g.h(axis);
  for (std::size_t f = 0; f < out.size(); ++f) {
    const auto nodes = g.face_nodes(f, axis);
    const double left = nodes[0] >= 0 ? u[static_cast<std::size_t>(nodes[0])] : 0.0;
    const double right = nodes[1] >= 0 ? u[static_cast<std::size_t>(nodes[1])] : 0.0;
    out[f] = (right - left) * inv_h;
  }
  return out;
}

FaceFields gradient(const Field& u) {
  FaceFields out;
  out.reserve(static_cast<std::size_t>(u.grid().dim()));
  for (int j = 0; j < u.grid().dim(); ++j) out.push_back(forward_diff(u, j));
  return out;
}

Field divergence_adjoint(std::span<const FaceField> psi) {
  if (psi.empty()) throw std::invalid_argument("divergence_adjoint: no face fields");
  const Grid& g = psi.front().grid();
  if (static_cast<int>(psi.size()) != g.dim())
    throw std::invalid_argument("divergence_adjoint: need one face field per axis");
  Field out(g);
  for (int j = 0; j < g.dim(); ++j) {
    const FaceField& pj = psi[static_cast<std::size_t>(j)];
    require_same_grid(g, pj.grid(), "divergence_adjoint");
    if (pj.axis() != j || pj.size() != g.num_faces(j))
      throw std::invalid_argument("divergence_adjoint: face field shape mismatch on axis " + std::to_string(j));
    const double inv_h = 1.0 / g.h(j);
    for (std::size_t i = 0; i < g.num_nodes(); ++i)
      out[i] += (pj[g.face_left(i, j)] - pj[g.face_right(i, j)]) * inv_h;
  }
  return out;
}

Field node_average(const FaceField& face) {
  const Grid& g = face.grid();
  Field out(g);
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    out[i] = 0.5 * (face[g.face_left(i, face.axis())] + face[g.face_right(i, face.axis())]);
  return out;
}

double integrate(const Field& w) {
  double s = 0.0;
  for (double v : w.values()) s += v;
  return s * w.grid().cell_volume();
}

double inner(const Field& a, const Field& b) {
  require_same_grid(a.grid(), b.grid(), "inner");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * a.grid().cell_volume();
}

double inner(const FaceField& a, const FaceField& b) {
  require_same_grid(a.grid(), b.grid(), "inner");
  if (a.axis() != b.axis()) throw std::invalid_argument("inner: face axes differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s * a.grid().cell_volume();
}

namespace {

double lq(std::span<const double> values, double volume, double q) {
  if (!(q >= 1.0)) throw std::invalid_argument("lq_norm: q must be >= 1");
  if (std::isinf(q)) {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
  }
  // Scale by the max to keep |v|^q representable for large q.
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (double v : values) s += std::pow(std::abs(v) / m, q);
  return m * std::pow(s * volume, 1.0 / q);
}

}  // namespace

double lq_norm(const Field& w, double q) { return lq(w.values(), w.grid().cell_volume(), q); }

double lq_norm(const FaceField& w, double q) { return lq(w.values(), w.grid().cell_volume(), q); }

double anisotropic_norm(const Field& u, const ExponentVector& p) {
  if (p.dim() != u.grid().dim()) throw std::invalid_argument("anisotropic_norm: exponent/grid dimension mismatch");
  double s = 0.0;
  for (int j = 0; j < p.dim(); ++j) s += lq_norm(forward_diff(u, j), p[j]);
  return s;
}

double nearest_value(const Field& u, std::span<const double> x) {
  const Grid& g = u.grid();
  std::array<int, 3> idx{0, 0, 0};
  for (int a = 0; a < g.dim(); ++a) {
    const long i = std::lround(x[static_cast<std::size_t>(a)] / g.h()) - 1;
    if (i < 0 || i >= g.n()) return 0.0;
    idx[static_cast<std::size_t>(a)] = static_cast<int>(i);
  }
  return u[g.node_linear(idx)];
}

void write_field_csv(std::ostream& os, const Field& u) {
  const Grid& g = u.grid();
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", g.h());
  os << "# dim=" << g.dim() << " n=" << g.n() << " h=" << buf << '\n';
  static constexpr const char* idx_names[] = {"i", "j", "k"};
  static constexpr const char* x_names[] = {"x", "y", "z"};
  for (int a = 0; a < g.dim(); ++a) os << idx_names[a] << ',';
  for (int a = 0; a < g.dim(); ++a) os << x_names[a] << ',';
  os << "value\n";
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    const auto idx = g.node_index(i);
    const auto x = g.node_coord(i);
    for (int a = 0; a < g.dim(); ++a) os << idx[static_cast<std::size_t>(a)] << ',';
    for (int a = 0; a < g.dim(); ++a) {
      std::snprintf(buf, sizeof buf, "%.17g", x[static_cast<std::size_t>(a)]);
      os << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", u[i]);
    os << buf << '\n';
  }
}

void write_field_csv(const std::string& path, const Field& u) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_field_csv(os, u);
}

Field read_field_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("# ", 0) != 0) throw std::runtime_error("field csv: missing header line");
  int dim = 0, n = 0;
  {
    std::istringstream hs(line.substr(2));
    std::string tok;
    while (hs >> tok) {
      if (tok.rfind("dim=", 0) == 0) dim = std::stoi(tok.substr(4));
      if (tok.rfind("n=", 0) == 0) n = std::stoi(tok.substr(2));
    }
  }
  Grid g(dim, n);
  if (!std::getline(is, line)) throw std::runtime_error("field csv: missing column line");
  Field u(g);
  std::vector<bool> seen(g.num_nodes(), false);
  std::size_t rows = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::array<int, 3> idx{0, 0, 0};
    for (int a = 0; a < dim; ++a) {
      std::getline(ls, cell, ',');
      idx[static_cast<std::size_t>(a)] = std::stoi(cell);
      if (idx[static_cast<std::size_t>(a)] < 0 || idx[static_cast<std::size_t>(a)] >= n)
        throw std::runtime_error("field csv: index out of range in row " + std::to_string(rows + 1));
    }
    for (int a = 0; a < dim; ++a) std::getline(ls, cell, ',');
    std::getline(ls, cell, ',');
    const std::size_t lin = g.node_linear(idx);
    u[lin] = std::strtod(cell.c_str(), nullptr);
    seen[lin] = true;
    ++rows;
  }
  if (rows != g.num_nodes() || std::find(seen.begin(), seen.end(), false) != seen.end())
    throw std::runtime_error("field csv: expected one row per node");
  return u;
}

Field read_field_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_field_csv(is);
}

}  // namespace anisolab
