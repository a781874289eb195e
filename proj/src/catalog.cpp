#include "xisub/catalog.hpp"

#include "xisub/error.hpp"
#include "xisub/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace xisub {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPolarCollar = 1e-3;

Vec pad(const Vec& v, int n) {
  Vec out = Vec::Zero(n);
  out.head(v.size()) = v;
  return out;
}

Mat pad_rows(const Mat& a, int n) {
  Mat out = Mat::Zero(n, a.cols());
  out.topRows(a.rows()) = a;
  return out;
}

Vec unit(int n, int k) {
  Vec e = Vec::Zero(n);
  e[k] = 1.0;
  return e;
}

NormalField constant_normal(const Vec& e, std::string label) {
  NormalField f;
  f.value = [e](const Vec&) { return e; };
  f.parallel = true;
  f.label = std::move(label);
  return f;
}

void require_periodic(const ParametricImmersion& imm) {
  const double defect = imm.periodicity_defect();
  if (defect > 1e-12) {
    std::ostringstream os;
    os << "periodic axes do not close up (defect " << defect << ")";
    throw Error(ErrorCode::InvalidArgument, os.str());
  }
}

// Angles run up to 2 pi, where the (1 + |u|) step scaling would inflate
// steps by a factor 7; shrink the base steps to compensate.
fd::StepPolicy angular_steps() {
  fd::StepPolicy steps;
  steps.first *= 0.25;
  steps.second *= 0.5;
  return steps;
}

// Unit-sphere charts in R^{m+1}: position, Jacobian, Hessian.
struct SphereChart {
  Box box;
  std::function<Vec(const Vec&)> x;
  std::function<Mat(const Vec&)> dx;
  std::function<std::vector<Mat>(const Vec&)> ddx;
};

SphereChart unit_sphere_chart(int m) {
  SphereChart c;
  if (m == 1) {
    c.box = {Axis{0.0, 2 * kPi, true, 0.0}};
    c.x = [](const Vec& u) { return Vec{{std::cos(u[0]), std::sin(u[0])}}; };
    c.dx = [](const Vec& u) {
      Mat J(2, 1);
      J << -std::sin(u[0]), std::cos(u[0]);
      return J;
    };
    c.ddx = [](const Vec& u) {
      Mat H(2, 1);
      H << -std::cos(u[0]), -std::sin(u[0]);
      return std::vector<Mat>{H};
    };
  } else if (m == 2) {
    // (polar phi, azimuth theta)
    c.box = {Axis{0.0, kPi, false, kPolarCollar}, Axis{0.0, 2 * kPi, true, 0.0}};
    c.x = [](const Vec& u) {
      const double sp = std::sin(u[0]), cp = std::cos(u[0]);
      const double st = std::sin(u[1]), ct = std::cos(u[1]);
      return Vec{{sp * ct, sp * st, cp}};
    };
    c.dx = [](const Vec& u) {
      const double sp = std::sin(u[0]), cp = std::cos(u[0]);
      const double st = std::sin(u[1]), ct = std::cos(u[1]);
      Mat J(3, 2);
      J << cp * ct, -sp * st,
           cp * st, sp * ct,
           -sp, 0.0;
      return J;
    };
    c.ddx = [](const Vec& u) {
      const double sp = std::sin(u[0]), cp = std::cos(u[0]);
      const double st = std::sin(u[1]), ct = std::cos(u[1]);
      Mat Hp(3, 2), Ht(3, 2);
      Hp << -sp * ct, -cp * st,
            -sp * st, cp * ct,
            -cp, 0.0;
      Ht << -cp * st, -sp * ct,
            cp * ct, -sp * st,
            0.0, 0.0;
      return std::vector<Mat>{Hp, Ht};
    };
  } else if (m == 3) {
    // Hopf coordinates (a, b, c): (cos a cos b, cos a sin b, sin a cos c, sin a sin c)
    c.box = {Axis{0.0, kPi / 2, false, kPolarCollar}, Axis{0.0, 2 * kPi, true, 0.0},
             Axis{0.0, 2 * kPi, true, 0.0}};
    c.x = [](const Vec& u) {
      const double ca = std::cos(u[0]), sa = std::sin(u[0]);
      return Vec{{ca * std::cos(u[1]), ca * std::sin(u[1]), sa * std::cos(u[2]),
                  sa * std::sin(u[2])}};
    };
    c.dx = [](const Vec& u) {
      const double ca = std::cos(u[0]), sa = std::sin(u[0]);
      const double cb = std::cos(u[1]), sb = std::sin(u[1]);
      const double cc = std::cos(u[2]), sc = std::sin(u[2]);
      Mat J(4, 3);
      J << -sa * cb, -ca * sb, 0.0,
           -sa * sb, ca * cb, 0.0,
           ca * cc, 0.0, -sa * sc,
           ca * sc, 0.0, sa * cc;
      return J;
    };
    c.ddx = [](const Vec& u) {
      const double ca = std::cos(u[0]), sa = std::sin(u[0]);
      const double cb = std::cos(u[1]), sb = std::sin(u[1]);
      const double cc = std::cos(u[2]), sc = std::sin(u[2]);
      Mat Ha(4, 3), Hb(4, 3), Hc(4, 3);
      Ha << -ca * cb, sa * sb, 0.0,
            -ca * sb, -sa * cb, 0.0,
            -sa * cc, 0.0, -ca * sc,
            -sa * sc, 0.0, ca * cc;
      Hb << sa * sb, -ca * cb, 0.0,
            -sa * cb, -ca * sb, 0.0,
            0.0, 0.0, 0.0,
            0.0, 0.0, 0.0;
      Hc << 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0,
            -ca * sc, 0.0, -sa * cc,
            ca * cc, 0.0, -sa * sc;
      return std::vector<Mat>{Ha, Hb, Hc};
    };
  } else {
    throw Error(ErrorCode::UnsupportedSpec, "sphere charts exist for m <= 3 only");
  }
  return c;
}

// Sphere of radius r centered at `center` (in R^{m+1}), embedded in R^n.
ParametricImmersion sphere_immersion(int m, double r, int n, const Vec& center) {
  SphereChart c = unit_sphere_chart(m);
  const Vec ctr = pad(center, n);
  ParametricImmersion imm(m, n - m, c.box, [x = c.x, r, n, ctr](const Vec& u) {
    return Vec(ctr + r * pad(x(u), n));
  });
  imm.with_jacobian([dx = c.dx, r, n](const Vec& u) { return Mat(r * pad_rows(dx(u), n)); })
      .with_hessian([ddx = c.ddx, r, n](const Vec& u) {
        std::vector<Mat> H = ddx(u);
        for (auto& h : H) h = r * pad_rows(h, n);
        return H;
      })
      .with_scale(r)
      .with_steps(angular_steps());
  return imm;
}

bool nearly_equal(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); }

std::string format_number(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

bool CatalogImmersion::compact() const {
  for (bool f : flat_axes)
    if (f) return false;
  return true;
}

std::string CatalogImmersion::name() const {
  std::ostringstream os;
  os << family << "(";
  bool first = true;
  for (const auto& [k, v] : parameters) {
    os << (first ? "" : ",") << k << "=" << format_number(v);
    first = false;
  }
  os << ")";
  return os.str();
}

CatalogImmersion make_plane(int m, int p, const Vec& offset, double half_width) {
  const int n = m + p;
  if (m < 1 || p < 0) throw Error(ErrorCode::InvalidArgument, "plane needs m >= 1, p >= 0");
  if (offset.size() != n) throw Error(ErrorCode::InvalidArgument, "offset must live in R^{m+p}");
  if (offset.head(m).norm() > 1e-14) {
    throw Error(ErrorCode::BadOffset, "offset has a component along the plane");
  }
  Box box(m, Axis{-half_width, half_width, false, 0.0});
  ParametricImmersion imm(m, p, box, [offset, m, n](const Vec& u) {
    Vec x = offset;
    x.head(m) += u;
    (void)n;
    return x;
  });
  imm.with_jacobian([m, n](const Vec&) { return Mat(Mat::Identity(n, m)); })
      .with_hessian([m, n](const Vec&) { return std::vector<Mat>(m, Mat::Zero(n, m)); });

  CatalogImmersion item{std::move(imm), [offset](const Vec&) { return offset; }, {}, "plane",
                        {{"m", double(m)}, {"p", double(p)}}, offset.norm() == 0.0,
                        std::vector<bool>(m, true)};
  for (int k = 0; k < p; ++k) item.parameters["offset" + std::to_string(m + k)] = offset[m + k];
  for (int k = m; k < n; ++k)
    item.parallel_frame.push_back(constant_normal(unit(n, k), "e" + std::to_string(k + 1)));
  return item;
}

CatalogImmersion make_sphere(int m, double r, int p) {
  if (!(r > 0.0)) throw Error(ErrorCode::InvalidArgument, "sphere radius must be positive");
  if (p < 1) throw Error(ErrorCode::InvalidArgument, "sphere needs codimension >= 1");
  const int n = m + p;
  ParametricImmersion imm = sphere_immersion(m, r, n, Vec::Zero(m + 1));
  require_periodic(imm);
  const double c = 1.0 - m / (r * r);
  CatalogImmersion item{imm,
                        [imm, c](const Vec& u) { return Vec(c * imm.position(u)); },
                        {},
                        "sphere",
                        {{"m", double(m)}, {"r", r}, {"p", double(p)}},
                        nearly_equal(r * r, m),
                        std::vector<bool>(m, false)};
  NormalField radial;
  radial.value = [imm, r](const Vec& u) { return Vec(imm.position(u) / r); };
  radial.parallel = true;
  radial.label = "x/r";
  item.parallel_frame.push_back(radial);
  for (int k = m + 1; k < n; ++k)
    item.parallel_frame.push_back(constant_normal(unit(n, k), "e" + std::to_string(k + 1)));
  return item;
}

CatalogImmersion make_product(const CatalogImmersion& a, const CatalogImmersion& b) {
  const ParametricImmersion ia = a.immersion;
  const ParametricImmersion ib = b.immersion;
  const int ma = ia.dim(), mb = ib.dim();
  const int na = ia.ambient_dim(), nb = ib.ambient_dim();
  const int m = ma + mb, n = na + nb;
  Box box = ia.domain();
  box.insert(box.end(), ib.domain().begin(), ib.domain().end());

  auto split = [ma, mb](const Vec& u) {
    return std::pair<Vec, Vec>{u.head(ma), u.segment(ma, mb)};
  };
  ParametricImmersion imm(m, n - m, box, [=](const Vec& u) {
    auto [ua, ub] = split(u);
    Vec x(n);
    x << ia.position(ua), ib.position(ub);
    return x;
  });
  imm.with_jacobian([=](const Vec& u) {
       auto [ua, ub] = split(u);
       Mat J = Mat::Zero(n, m);
       J.topLeftCorner(na, ma) = ia.jacobian(ua);
       J.bottomRightCorner(nb, mb) = ib.jacobian(ub);
       return J;
     })
      .with_hessian([=](const Vec& u) {
        auto [ua, ub] = split(u);
        const std::vector<Mat> Ha = ia.hessian(ua);
        const std::vector<Mat> Hb = ib.hessian(ub);
        std::vector<Mat> H(m, Mat::Zero(n, m));
        for (int i = 0; i < ma; ++i) H[i].topLeftCorner(na, ma) = Ha[i];
        for (int i = 0; i < mb; ++i) H[ma + i].bottomRightCorner(nb, mb) = Hb[i];
        return H;
      })
      .with_scale(std::max(ia.scale(), ib.scale()))
      .with_steps({std::min(ia.steps().first, ib.steps().first),
                   std::min(ia.steps().second, ib.steps().second)});

  PositionMap xa = a.xi, xb = b.xi;
  CatalogImmersion item{std::move(imm),
                        [=](const Vec& u) {
                          auto [ua, ub] = split(u);
                          Vec xi(n);
                          xi << xa(ua), xb(ub);
                          return xi;
                        },
                        {},
                        a.family + "x" + b.family,
                        {},
                        a.self_shrinker && b.self_shrinker,
                        a.flat_axes};
  item.flat_axes.insert(item.flat_axes.end(), b.flat_axes.begin(), b.flat_axes.end());
  for (const auto& [k, v] : a.parameters) item.parameters["a." + k] = v;
  for (const auto& [k, v] : b.parameters) item.parameters["b." + k] = v;
  for (const auto& f : a.parallel_frame) {
    NormalField g = f;
    g.value = [=, fv = f.value](const Vec& u) { return pad(fv(split(u).first), n); };
    item.parallel_frame.push_back(g);
  }
  for (const auto& f : b.parallel_frame) {
    NormalField g = f;
    g.value = [=, fv = f.value](const Vec& u) {
      Vec out = Vec::Zero(n);
      out.tail(nb) = fv(split(u).second);
      return out;
    };
    item.parallel_frame.push_back(g);
  }
  require_periodic(item.immersion);
  return item;
}

CatalogImmersion make_spherical(const SphericalSpec& spec) {
  const double a = spec.radius;
  if (!(a > 0.0)) throw Error(ErrorCode::UnsupportedSpec, "ambient sphere radius must be positive");
  switch (spec.kind) {
    case SphericalSpec::Kind::GreatSphere: {
      if (spec.m < 1 || spec.m > 3) throw Error(ErrorCode::UnsupportedSpec, "great sphere needs 1 <= m <= 3");
      CatalogImmersion item = make_sphere(spec.m, a, 2);
      item.family = "great-sphere";
      item.parameters = {{"m", double(spec.m)}, {"a", a}};
      return item;
    }
    case SphericalSpec::Kind::SmallSphere: {
      const int m = spec.m;
      const double c = spec.height;
      if (m < 1 || m > 3) throw Error(ErrorCode::UnsupportedSpec, "small sphere needs 1 <= m <= 3");
      if (!(std::abs(c) < a)) throw Error(ErrorCode::UnsupportedSpec, "small sphere height must satisfy |c| < a");
      const double b = std::sqrt(a * a - c * c);
      const int n = m + 2;
      ParametricImmersion imm = sphere_immersion(m, b, n, Vec::Zero(m + 1));
      // shift into the hyperplane x_{m+2} = c
      const Vec lift = c * unit(n, m + 1);
      ParametricImmersion shifted(m, 2, imm.domain(), [imm, lift](const Vec& u) {
        return Vec(imm.position(u) + lift);
      });
      shifted.with_jacobian([imm](const Vec& u) { return imm.jacobian(u); })
          .with_hessian([imm](const Vec& u) { return imm.hessian(u); })
          .with_scale(a)
          .with_steps(imm.steps());
      const double k = 1.0 - m / (b * b);
      CatalogImmersion item{shifted,
                            [imm, k, lift](const Vec& u) { return Vec(k * imm.position(u) + lift); },
                            {},
                            "small-sphere",
                            {{"m", double(m)}, {"a", a}, {"c", c}},
                            c == 0.0 && nearly_equal(b * b, m),
                            std::vector<bool>(m, false)};
      NormalField radial;
      radial.value = [imm, b](const Vec& u) { return Vec(imm.position(u) / b); };
      radial.parallel = true;
      radial.label = "(x-c e)/b";
      item.parallel_frame.push_back(radial);
      item.parallel_frame.push_back(constant_normal(unit(n, m + 1), "e" + std::to_string(n)));
      return item;
    }
    case SphericalSpec::Kind::CliffordTorus: {
      const double rho = a / std::sqrt(2.0);
      CatalogImmersion item = make_product(make_sphere(1, rho), make_sphere(1, rho));
      item.family = "clifford-torus";
      item.parameters = {{"a", a}};
      return item;
    }
  }
  throw Error(ErrorCode::UnsupportedSpec, "unknown spherical spec");
}

std::vector<CatalogImmersion> standard_catalog() {
  std::vector<CatalogImmersion> items;
  items.push_back(make_plane(1, 1, Vec::Zero(2)));
  items.push_back(make_plane(1, 1, Vec{{0.0, 1.0}}));
  items.push_back(make_plane(2, 1, Vec::Zero(3)));
  items.push_back(make_plane(2, 2, Vec{{0.0, 0.0, 0.5, -0.3}}));
  for (int m = 1; m <= 3; ++m)
    for (double r : {0.8, 1.0, std::sqrt(2.0), 2.0}) items.push_back(make_sphere(m, r));
  items.push_back(make_product(make_sphere(1, 1.0), make_sphere(1, 1.0)));
  items.push_back(make_product(make_sphere(1, 1.5), make_plane(1, 0, Vec::Zero(1))));
  items.push_back(make_product(make_sphere(1, 1.0), make_sphere(2, std::sqrt(2.0))));
  using Kind = SphericalSpec::Kind;
  items.push_back(make_spherical({Kind::GreatSphere, 2, 1.5, 0.0}));
  items.push_back(make_spherical({Kind::GreatSphere, 2, std::sqrt(2.0), 0.0}));
  items.push_back(make_spherical({Kind::SmallSphere, 2, 2.0, 1.0}));
  items.push_back(make_spherical({Kind::CliffordTorus, 2, 2.0, 0.0}));
  return items;
}

nlohmann::json catalog_entry(const CatalogImmersion& item, int grid_nodes) {
  const QuadratureGrid grid = verification_grid(item.immersion, grid_nodes);
  double xi_max = 0.0;
  for (const Vec& u : grid.nodes) xi_max = std::max(xi_max, item.xi(u).norm());
  nlohmann::json params = nlohmann::json::object();
  for (const auto& [k, v] : item.parameters) params[k] = v;
  return {{"family", item.family},
          {"name", item.name()},
          {"parameters", params},
          {"m", item.dim()},
          {"p", item.codim()},
          {"xi_norm", xi_max},
          {"self_shrinker", item.self_shrinker}};
}

ParametricImmersion make_ellipse(double a, double b) {
  ParametricImmersion imm(1, 1, {Axis{0.0, 2 * kPi, true, 0.0}}, [a, b](const Vec& u) {
    return Vec{{a * std::cos(u[0]), b * std::sin(u[0])}};
  });
  imm.with_jacobian([a, b](const Vec& u) {
       Mat J(2, 1);
       J << -a * std::sin(u[0]), b * std::cos(u[0]);
       return J;
     })
      .with_hessian([a, b](const Vec& u) {
        Mat H(2, 1);
        H << -a * std::cos(u[0]), -b * std::sin(u[0]);
        return std::vector<Mat>{H};
      })
      .with_scale(std::max(a, b))
      .with_steps(angular_steps());
  return imm;
}

ParametricImmersion make_offcenter_sphere(double r, const Vec& center) {
  return sphere_immersion(2, r, 3, center);
}

ParametricImmersion make_parabola(double half_width) {
  return ParametricImmersion(1, 1, {Axis{-half_width, half_width, false, 0.0}},
                             [](const Vec& u) { return Vec{{u[0], u[0] * u[0]}}; });
}

}  // namespace xisub
