#pragma once

// Exact constructors for the canonical xi-submanifolds: planes with offsets,
// centered spheres, products, and parallel-mean-curvature submanifolds of
// spheres.  Each item carries closed-form jets, its xi field, and a parallel
// orthonormal normal frame (all catalog items have flat normal bundle).

#include "xisub/immersion.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <string>
#include <vector>

namespace xisub {

struct CatalogImmersion {
  ParametricImmersion immersion;
  PositionMap xi;
  std::vector<NormalField> parallel_frame;
  std::string family;
  std::map<std::string, double> parameters;
  bool self_shrinker = false;
  /// Axes along which the item is a flat, unbounded factor (truncated chart).
  std::vector<bool> flat_axes;

  int dim() const { return immersion.dim(); }
  int codim() const { return immersion.codim(); }
  bool compact() const;
  std::string name() const;
};

/// m-plane spanned by the first m coordinate axes, shifted by offset.
/// Throws BadOffset if offset has a component along the plane.
CatalogImmersion make_plane(int m, int p, const Vec& offset, double half_width = 9.0);

/// S^m(r) centered at the origin of R^{m+1}, embedded in R^{m+p}; m <= 3.
CatalogImmersion make_sphere(int m, double r, int p = 1);

CatalogImmersion make_product(const CatalogImmersion& a, const CatalogImmersion& b);

/// Parallel-mean-curvature submanifolds of a round sphere S^{m+p}(a), viewed
/// in the ambient Euclidean space.
struct SphericalSpec {
  enum class Kind { GreatSphere, SmallSphere, CliffordTorus };
  Kind kind = Kind::GreatSphere;
  int m = 2;              // dimension of the subsphere (ignored for Clifford)
  double radius = 1.0;    // radius a of the ambient sphere
  double height = 0.0;    // SmallSphere: distance of the hyperplane from 0
};

CatalogImmersion make_spherical(const SphericalSpec& spec);

/// Items used throughout verification: planes with offsets, spheres for
/// m in {1,2,3} and r in {0.8, 1, sqrt 2, 2}, products and the spherical menu.
std::vector<CatalogImmersion> standard_catalog();

nlohmann::json catalog_entry(const CatalogImmersion& item, int grid_nodes = 12);

// Test immersions that are not xi-submanifolds (or not catalog items).

/// Ellipse (a cos t, b sin t).
ParametricImmersion make_ellipse(double a, double b);
/// Sphere S^2(r, center) in R^3, exact jets.
ParametricImmersion make_offcenter_sphere(double r, const Vec& center);
/// Parabola (u, u^2) in R^2 with finite-difference jets only.
ParametricImmersion make_parabola(double half_width = 1.0);

}  // namespace xisub
