#include "locred/mesh.hpp"

#include "locred/errors.hpp"

#include <string>

namespace locred {

TriMesh::TriMesh(int n_squares) : n_squares_(n_squares) {
  if (n_squares < 1) {
    throw ConfigError("mesh needs at least one square per side, got " + std::to_string(n_squares));
  }
  const int n = n_squares;
  const double h = 1.0 / n;
  nodes_.reserve(static_cast<std::size_t>((n + 1) * (n + 1) + n * n));
  for (int iy = 0; iy <= n; ++iy) {
    for (int ix = 0; ix <= n; ++ix) {
      nodes_.push_back({ix * h, iy * h});
    }
  }
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      nodes_.push_back({(ix + 0.5) * h, (iy + 0.5) * h});
    }
  }

  triangles_.reserve(static_cast<std::size_t>(4 * n * n));
  for (int iy = 0; iy < n; ++iy) {
    for (int ix = 0; ix < n; ++ix) {
      const int v00 = vertex_node(ix, iy);
      const int v10 = vertex_node(ix + 1, iy);
      const int v11 = vertex_node(ix + 1, iy + 1);
      const int v01 = vertex_node(ix, iy + 1);
      const int c = center_node(ix, iy);
      triangles_.push_back({v00, v10, c});
      triangles_.push_back({v10, v11, c});
      triangles_.push_back({v11, v01, c});
      triangles_.push_back({v01, v00, c});
    }
  }

  free_index_.assign(nodes_.size(), kConstrained);
  for (int node = 0; node < node_count(); ++node) {
    const auto [hx, hy] = half_pitch_coords(node);
    const bool boundary = hx == 0 || hy == 0 || hx == 2 * n || hy == 2 * n;
    if (!boundary) {
      free_index_[node] = static_cast<int>(free_nodes_.size());
      free_nodes_.push_back(node);
    }
  }
}

SquareIndex TriMesh::square_of_triangle(int t) const {
  const int s = t / 4;
  return {s % n_squares_, s / n_squares_};
}

std::array<int, 2> TriMesh::half_pitch_coords(int node) const {
  const int n = n_squares_;
  const int vertices = (n + 1) * (n + 1);
  if (node < vertices) {
    return {2 * (node % (n + 1)), 2 * (node / (n + 1))};
  }
  const int c = node - vertices;
  return {2 * (c % n) + 1, 2 * (c / n) + 1};
}

double signed_double_area(const TriMesh& mesh, int t) {
  const auto& tri = mesh.triangles()[t];
  const Point a = mesh.nodes()[tri[0]];
  const Point b = mesh.nodes()[tri[1]];
  const Point c = mesh.nodes()[tri[2]];
  return (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
}

}  // namespace locred
