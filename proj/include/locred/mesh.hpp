#pragma once

#include <array>
#include <span>
#include <vector>

namespace locred {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct SquareIndex {
  int ix = 0;
  int iy = 0;
};

/// Structured criss-cross triangulation of the unit square.
///
/// Every one of the n x n squares is split into four triangles through its
/// center node. Nodes are numbered grid vertices first (row-major, x fastest),
/// then square centers (row-major). Triangles are stored square by square, four
/// per square, counter-clockwise. Boundary nodes are eliminated from the free
/// DOF numbering, which follows node order.
class TriMesh {
 public:
  static constexpr int kConstrained = -1;

  /// Throws ConfigError for n_squares < 1.
  explicit TriMesh(int n_squares);

  int n_squares() const { return n_squares_; }
  double pitch() const { return 1.0 / n_squares_; }

  std::span<const Point> nodes() const { return nodes_; }
  std::span<const std::array<int, 3>> triangles() const { return triangles_; }

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int triangle_count() const { return static_cast<int>(triangles_.size()); }
  int square_count() const { return n_squares_ * n_squares_; }
  int free_count() const { return static_cast<int>(free_nodes_.size()); }

  bool is_boundary(int node) const { return free_index_[node] == kConstrained; }
  /// Free-DOF index of a node, or kConstrained.
  int free_index(int node) const { return free_index_[node]; }
  int node_of_free(int dof) const { return free_nodes_[dof]; }

  int vertex_node(int ix, int iy) const { return iy * (n_squares_ + 1) + ix; }
  int center_node(int ix, int iy) const {
    return (n_squares_ + 1) * (n_squares_ + 1) + iy * n_squares_ + ix;
  }

  /// Square containing triangle t; squares are numbered iy * n + ix.
  SquareIndex square_of_triangle(int t) const;
  int square_number(int t) const { return t / 4; }

  /// Node position in half-pitch units, i.e. integer coordinates in [0, 2n].
  std::array<int, 2> half_pitch_coords(int node) const;

 private:
  int n_squares_;
  std::vector<Point> nodes_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<int> free_index_;
  std::vector<int> free_nodes_;
};

/// Convenience wrapper for the builder operation.
inline TriMesh build_mesh(int n_squares) { return TriMesh(n_squares); }

/// Twice the signed area of triangle t.
double signed_double_area(const TriMesh& mesh, int t);

}  // namespace locred
