#pragma once

// Planar triangular meshes over a study region, the piecewise-linear basis
// projector, and lumped finite-element matrices.
//
// Coordinates are degrees treated as planar (x = lon, y = lat). That is fine
// at regional scale; large latitude spans distort distances.

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "sttrend/sparse.hpp"

namespace sttrend {

struct Point {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point&, const Point&) = default;
};

using Triangle = std::array<int, 3>;

/// Triangulation with counter-clockwise triangles and no degenerate ones.
class Mesh {
 public:
  Mesh() = default;
  /// Validates orientation and indices; throws DegenerateTriangle or
  /// InvalidInput.
  Mesh(std::vector<Point> vertices, std::vector<Triangle> triangles);

  int vertex_count() const noexcept { return static_cast<int>(vertices_.size()); }
  int triangle_count() const noexcept { return static_cast<int>(triangles_.size()); }
  const std::vector<Point>& vertices() const noexcept { return vertices_; }
  const std::vector<Triangle>& triangles() const noexcept { return triangles_; }

  double total_area() const;
  /// Index of a triangle containing p (boundary inclusive, with a small
  /// tolerance), or -1.
  int locate(const Point& p) const;
  /// Vertices lying on the outer boundary of the triangulation.
  std::vector<bool> boundary_vertices() const;

 private:
  std::vector<Point> vertices_;
  std::vector<Triangle> triangles_;
  // Uniform bucket grid over triangle bounding boxes for point location.
  double bx0_ = 0, by0_ = 0, bdx_ = 1, bdy_ = 1;
  int bnx_ = 0, bny_ = 0;
  std::vector<std::vector<int>> buckets_;
  void build_index();
};

struct MeshOptions {
  /// Margin added around the convex hull of the locations (degrees).
  double extension = 1.0;
  /// Longest admissible edge inside the hull of the locations.
  double max_edge_inner = 1.0;
  /// Longest admissible edge in the extension zone.
  double max_edge_outer = 2.0;
  /// Locations closer than this to an already inserted vertex are not added
  /// as vertices themselves. 0 keeps every distinct location.
  double cutoff = 0.0;
  /// Triangles with a smaller minimum angle are refined when their
  /// circumcentre can be inserted.
  double min_angle_deg = 21.0;
  int max_vertices = 200000;
};

/// Delaunay triangulation of the locations plus a convex extension zone and
/// Steiner points refining edges to the requested lengths.
/// Throws CollinearInput or InvalidParameters.
Mesh build_mesh(std::span<const Point> locations, const MeshOptions& options);

/// Regular grid of nx × ny cells over [x0, x1] × [y0, y1], each cell split
/// along its lower-left/upper-right diagonal.
Mesh regular_mesh(double x0, double x1, double y0, double y1, int nx, int ny);

/// Barycentric basis weights: row i holds ψ_g(s_i) for the containing
/// triangle's three vertices (n_locations × G).
struct Projector {
  SparseMatrix matrix;
  int rows() const noexcept { return static_cast<int>(matrix.rows()); }
  int cols() const noexcept { return static_cast<int>(matrix.cols()); }
  /// Vertices with a nonzero weight in some row, ascending.
  std::vector<int> support() const;
};

/// Throws PointOutsideMesh for locations outside the triangulation.
Projector basis_projector(const Mesh& mesh, std::span<const Point> locations);

struct FemMatrices {
  SparseSymmetric mass;       ///< lumped, diagonal
  SparseSymmetric stiffness;  ///< ∫ ∇ψ_i · ∇ψ_j
};

FemMatrices fem_matrices(const Mesh& mesh);

/// Plain-text format: "G T", then G lines "x y", then T lines "i j k" with
/// 0-based indices. Coordinates use 17 significant digits.
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);
void save_mesh(const std::string& path, const Mesh& mesh);
Mesh load_mesh(const std::string& path);

}  // namespace sttrend
