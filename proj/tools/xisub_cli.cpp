// xisub: batch front end.  JSON report on stdout (or --output); exit 0 iff
// every record passes, 1 on failed checks or errors, 2 on usage errors.

#include "xisub/acceptance.hpp"
#include "xisub/catalog.hpp"
#include "xisub/error.hpp"
#include "xisub/functionals.hpp"
#include "xisub/report.hpp"
#include "xisub/stability.hpp"
#include "xisub/xi_curves.hpp"
#include "xisub/xi_equation.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>

using namespace xisub;

namespace {

constexpr int kUsageError = 2;
constexpr int kMaxGrid = 64;

struct Selector {
  std::string family;
  int m = 2;
  int p = 1;
  double r = 1.0;
  std::vector<double> offset;
  double a = 2.0;  // ellipse semi-axis, ambient sphere radius
  double b = 1.0;  // ellipse semi-axis
  double c = 1.0;  // small-sphere height
  std::vector<double> center{0.3, 0.0, 0.4};
  std::string name;  // standard catalog name, overrides the family
};

struct Common {
  int grid = 0;  // 0: per-dimension default
  double tol = 1e-8;
  std::string output;
  bool reproducible = true;
  std::uint64_t seed = 1;

  kernels::ExecutionPolicy policy() const { return {true, reproducible}; }
};

struct Example {
  std::string label;
  ParametricImmersion immersion;
  std::optional<CatalogImmersion> item;
};

Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
  return out;
}

Example select(const Selector& s) {
  auto from_item = [](CatalogImmersion item) {
    Example e{item.name(), item.immersion, item};
    return e;
  };
  if (!s.name.empty()) {
    for (auto& item : standard_catalog())
      if (item.name() == s.name) return from_item(item);
    throw Error(ErrorCode::InvalidArgument, "no catalog item named " + s.name);
  }
  if (s.family == "plane") {
    Vec offset = s.offset.empty() ? Vec::Zero(s.m + s.p) : to_vec(s.offset);
    return from_item(make_plane(s.m, s.p, offset));
  }
  if (s.family == "sphere") return from_item(make_sphere(s.m, s.r, s.p));
  if (s.family == "cylinder") {
    return from_item(make_product(make_sphere(1, s.r, 1), make_plane(s.m - 1, 0, Vec::Zero(s.m - 1))));
  }
  if (s.family == "great-sphere" || s.family == "small-sphere" || s.family == "clifford-torus") {
    SphericalSpec spec;
    spec.kind = s.family == "great-sphere"   ? SphericalSpec::Kind::GreatSphere
                : s.family == "small-sphere" ? SphericalSpec::Kind::SmallSphere
                                             : SphericalSpec::Kind::CliffordTorus;
    spec.m = s.m;
    spec.radius = s.a;
    spec.height = s.c;
    return from_item(make_spherical(spec));
  }
  if (s.family == "ellipse") return {"ellipse", make_ellipse(s.a, s.b), std::nullopt};
  if (s.family == "offcenter-sphere") {
    return {"offcenter-sphere", make_offcenter_sphere(s.r, to_vec(s.center)), std::nullopt};
  }
  throw Error(ErrorCode::InvalidArgument, "unknown family " + s.family);
}

const CatalogImmersion& require_item(const Example& e) {
  if (!e.item) throw Error(ErrorCode::UnsupportedSpec, e.label + " is not a catalog item");
  return *e.item;
}

int grid_nodes(const Common& c, int m, int fallback) {
  const int n = c.grid > 0 ? c.grid : fallback;
  if (n > kMaxGrid) throw Error(ErrorCode::InvalidArgument, "grid resolution above 64");
  return n;
}

int default_nodes(int m) { return m == 1 ? 32 : m == 2 ? 20 : 14; }

void add_selector(CLI::App* cmd, Selector& s, bool positional = true) {
  if (positional) cmd->add_option("family", s.family, "example family")->required(false);
  cmd->add_option("--name", s.name, "standard catalog item by name");
  cmd->add_option("--m", s.m, "dimension")->check(CLI::Range(1, 3));
  cmd->add_option("--p", s.p, "codimension")->check(CLI::Range(0, 4));
  cmd->add_option("--r", s.r, "radius")->check(CLI::PositiveNumber);
  cmd->add_option("--offset", s.offset, "plane offset in R^{m+p}")->delimiter(',');
  cmd->add_option("--a", s.a, "ellipse semi-axis or ambient sphere radius")->check(CLI::PositiveNumber);
  cmd->add_option("--b", s.b, "ellipse semi-axis")->check(CLI::PositiveNumber);
  cmd->add_option("--c", s.c, "small-sphere height");
  cmd->add_option("--center", s.center, "off-center sphere center")->delimiter(',');
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--grid", c.grid, "quadrature nodes per axis (panel)")->check(CLI::Range(2, kMaxGrid));
  cmd->add_option("--tol", c.tol, "tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--output", c.output, "JSON report path (default stdout)");
  cmd->add_option("--reproducible", c.reproducible, "fixed-order reductions (default true)");
  cmd->add_option("--seed", c.seed, "seed for random test fields");
}

nlohmann::json echo(const CLI::App& cmd) {
  nlohmann::json j{{"name", cmd.get_name()}};
  for (const CLI::Option* opt : cmd.get_options()) {
    if (opt->get_name() == "--help" || opt->count() == 0) continue;
    j["options"][opt->get_name()] = opt->as<std::vector<std::string>>();
  }
  return j;
}

void cmd_catalog(Report& report) {
  nlohmann::json items = nlohmann::json::array();
  for (const auto& item : standard_catalog()) items.push_back(catalog_entry(item));
  report.set_result("catalog", items);
}

void cmd_check(Report& report, const Selector& s, const Common& c) {
  const Example e = select(s);
  const int m = e.immersion.dim();
  const auto grid = verification_grid(e.immersion, grid_nodes(c, m, default_nodes(m)));
  const XiResidual r = xi_residual(e.immersion, grid, c.policy());
  report.at_most("xi_residual " + e.label, r.residual, c.tol);
  const ParallelismCheck pc = modified_mcv_parallelism_check(e.immersion, grid, c.policy());
  report.at_most("gaussian parallelism discrepancy " + e.label, pc.discrepancy, 1e-5);
  report.set_result("xi_max", r.xi_max);
  report.set_result("gaussian_side", pc.gaussian_side);
  report.set_result("euclidean_side", pc.euclidean_side);
}

void cmd_functional(Report& report, const Selector& s, const Common& c) {
  const Example example = select(s);
  const CatalogImmersion& item = require_item(example);
  const WeightedVolume V = weighted_volume_refined(item.immersion, item.xi, {}, 12, 96, 1e-10,
                                                   c.policy());
  report.add({"V refinement converged", V.V, 1e-10, V.converged,
              std::to_string(V.nodes_per_panel) + " nodes per axis"});
  const CompactField f = random_compact_normal_field(item, c.seed);
  const auto grid = variation_grid(item.immersion, grid_nodes(c, item.dim(), default_nodes(item.dim())),
                                   f.panels);
  const PmcSuite pmc = pmc_functional_suite(item.immersion, item.xi, f.field, grid, c.policy());
  report.set_result("V_xi", V.V);
  report.set_result("V_bar_xi", V.V_bar);
  report.set_result("V_tilde_xi", pmc.V_tilde);
}

void cmd_variation(Report& report, const Selector& s, const Common& c) {
  const Example example = select(s);
  const CatalogImmersion& item = require_item(example);
  const CompactField f = random_compact_normal_field(item, c.seed);
  const VariationFamily fam = normal_family(f.field, f.panels);
  const auto grid = variation_grid(item.immersion, grid_nodes(c, item.dim(), default_nodes(item.dim())),
                                   f.panels);
  const FirstVariation a = first_variation(item.immersion, item.xi, fam, grid, c.policy());
  const FirstVariation d = first_variation_fd(item.immersion, item.xi, fam, grid, 1e-3, c.policy());
  const double V = weighted_volume(item.immersion, item.xi, grid, c.policy()).V;
  report.at_most("first variation / V", std::abs(a.V) / V, c.tol);
  report.at_most("first variation analytic vs fd", std::abs(a.V - d.V) / std::max(1.0, std::abs(d.V)), 1e-5);
  report.at_most("first variation (V_bar) analytic vs fd",
                 std::abs(a.V_bar - d.V_bar) / std::max(1.0, std::abs(d.V_bar)), 1e-5);
  const double Q = second_variation(item.immersion, item.xi, f.field, grid, c.policy());
  const double Qfd = second_variation_fd(item.immersion, item.xi, fam, grid, 5e-3, c.policy());
  report.at_most("second variation analytic vs fd", std::abs(Q - Qfd) / std::max(std::abs(Qfd), 1e-300), 1e-4);
  report.set_result("first", {{"analytic", a.V}, {"fd", d.V}, {"analytic_bar", a.V_bar}, {"fd_bar", d.V_bar}});
  report.set_result("second", {{"analytic", Q}, {"fd", Qfd}});
  report.set_result("field", f.field.label);
}

void cmd_spectrum(Report& report, const Selector& s, const Common& c, bool vp, int degree) {
  SpectralProblem problem = [&] {
    if (s.family == "sphere") {
      if (s.m > 2) throw Error(ErrorCode::UnsupportedSpec, "spectrum supports S^1 and S^2");
      return sphere_problem(s.m, s.p, s.r, vp, degree);
    }
    if (s.family == "plane") {
      if (s.m > 2) throw Error(ErrorCode::UnsupportedSpec, "spectrum supports P^1 and P^2");
      if (vp) throw Error(ErrorCode::UnsupportedSpec, "the plane spectrum is the scalar operator");
      return plane_scalar_problem(s.m, degree);
    }
    throw Error(ErrorCode::UnsupportedSpec, "spectrum supports the sphere and plane families");
  }();
  const Spectrum sp = galerkin_spectrum(problem, c.policy());
  report.at_most("stiffness symmetry defect", sp.symmetry_defect, 1e-10);
  report.at_most("eigenpair residual", sp.max_residual, 1e-8);
  report.set_result("spectrum", sp.to_json());
  report.set_result("negative_count", sp.negative_count());
  report.set_result("vp", vp);
}

void cmd_index(Report& report, const Selector& s, bool vp, const std::string& csv) {
  const SphereIndex idx = sphere_index(s.m, s.p, s.r, vp);
  const bool small = s.r * s.r <= s.m + 1e-12;
  report.add({"index = m+1 iff r^2 <= m", static_cast<double>(idx.index),
              static_cast<double>(s.m + 1), small == (idx.index == s.m + 1),
              std::string("r^2 <= m: ") + (small ? "true" : "false")});
  report.set_result("index", idx.index);
  nlohmann::json bands = nlohmann::json::array();
  for (const auto& b : idx.bands)
    bands.push_back({{"band", b.band}, {"k", b.k}, {"multiplicity", b.multiplicity}, {"value", b.value}});
  report.set_result("bands", bands);
  if (!csv.empty()) std::ofstream(csv) << bands_csv(idx);
}

void cmd_curve(Report& report, const std::string& kind, double C, const std::vector<double>& x0,
               double theta0, double s_max, const std::string& csv, const Common& c) {
  if (x0.size() != 2) throw Error(ErrorCode::InvalidArgument, "--x0 takes two numbers");
  const Vec2 start(x0[0], x0[1]);
  const Trajectory t = kind == "xi" ? integrate_xi_curve(start, theta0, C, s_max)
                                    : integrate_self_shrinker_curve(start, theta0, s_max);
  const Closure closure = closure_detect(t);
  if (kind == "xi") report.at_most("first-integral drift", t.max_drift(), 1e-8);
  const ParametricImmersion imm = t.as_immersion();
  report.at_most("xi_residual of the sampled curve",
                 xi_residual(imm, verification_grid(imm, grid_nodes(c, 1, 32)), c.policy()).residual,
                 1e-6);
  report.set_result("curve", curve_summary(t, closure));
  if (!csv.empty()) std::ofstream(csv) << t.csv();
}

void cmd_verify_all(Report& report, const std::string& only, bool quiet) {
  std::vector<std::string> ids;
  if (only.empty()) {
    ids = acceptance::criterion_ids();
  } else {
    std::stringstream ss(only);
    for (std::string id; std::getline(ss, id, ',');) ids.push_back(id);
  }
  nlohmann::json verdicts = nlohmann::json::array();
  for (const auto& v : acceptance::run(ids, report)) {
    if (!quiet) std::cerr << acceptance::format_verdict(v) << "\n";
    verdicts.push_back({{"id", v.id}, {"title", v.title}, {"pass", v.pass}, {"records", v.records},
                        {"failed", v.failed}, {"errors", v.errors}});
  }
  report.set_result("criteria", verdicts);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"xi-submanifold verification tool"};
  app.set_config("--config", "", "TOML/INI configuration file; flags override it");
  app.require_subcommand(1);

  Selector sel;
  Common common;
  bool vp = true;
  int degree = 8;
  std::string csv;
  std::string kind = "xi";
  double C = 0.3, theta0 = 0.0, s_max = 10.0;
  std::vector<double> x0{1.0, 0.0};
  std::string only;
  bool quiet = false;

  auto* catalog = app.add_subcommand("catalog", "list the standard catalog");
  add_common(catalog, common);
  auto* check = app.add_subcommand("check", "xi residual and Gaussian-space parallelism");
  add_selector(check, sel);
  add_common(check, common);
  auto* functional = app.add_subcommand("functional", "weighted volumes V, V_bar, V_tilde");
  add_selector(functional, sel);
  add_common(functional, common);
  auto* variation = app.add_subcommand("variation", "analytic vs finite-difference variations");
  add_selector(variation, sel);
  add_common(variation, common);
  auto* spectrum = app.add_subcommand("spectrum", "Galerkin spectrum of the stability operator");
  add_selector(spectrum, sel);
  add_common(spectrum, common);
  spectrum->add_option("--vp", vp, "restrict to VP-variations (default true)");
  spectrum->add_option("--degree", degree, "basis degree")->check(CLI::Range(1, 16));
  auto* index = app.add_subcommand("index", "closed-form sphere index");
  add_selector(index, sel, false);
  add_common(index, common);
  index->add_option("--vp", vp, "VP index (default true)");
  index->add_option("--csv", csv, "write the eigenvalue bands here");
  auto* curve = app.add_subcommand("curve", "integrate a xi-curve or self-shrinker curve");
  add_common(curve, common);
  curve->add_option("--kind", kind, "xi or shrinker")->check(CLI::IsMember({"xi", "shrinker"}));
  curve->add_option("--C", C, "first-integral constant");
  curve->add_option("--x0", x0, "start point x1,x2")->delimiter(',')->expected(2);
  curve->add_option("--theta0", theta0, "initial heading angle");
  curve->add_option("--smax", s_max, "arc length")->check(CLI::PositiveNumber);
  curve->add_option("--csv", csv, "write the polyline here");
  auto* verify = app.add_subcommand("verify-all", "run every acceptance criterion");
  add_common(verify, common);
  verify->add_option("--only", only, "comma-separated criterion ids");
  verify->add_flag("--quiet", quiet, "no per-criterion lines on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  const CLI::App* cmd = app.get_subcommands().front();
  Report report(echo(*cmd));
  try {
    if (cmd == catalog) cmd_catalog(report);
    else if (cmd == check) cmd_check(report, sel, common);
    else if (cmd == functional) cmd_functional(report, sel, common);
    else if (cmd == variation) cmd_variation(report, sel, common);
    else if (cmd == spectrum) cmd_spectrum(report, sel, common, vp, degree);
    else if (cmd == index) cmd_index(report, sel, vp, csv);
    else if (cmd == curve) cmd_curve(report, kind, C, x0, theta0, s_max, csv, common);
    else if (cmd == verify) cmd_verify_all(report, only, quiet);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) {
      std::cerr << "usage error: " << e.what() << "\n";
      return kUsageError;
    }
    report.add_error(cmd->get_name(), e);
  } catch (const std::exception& e) {
    report.add_error(cmd->get_name(), e);
  }

  const std::string text = dump(report.to_json());
  if (common.output.empty()) {
    std::cout << text;
  } else {
    std::ofstream(common.output) << text;
  }
  return report.all_pass() ? 0 : 1;
}
