#include "xisub/acceptance.hpp"

#include "xisub/catalog.hpp"
#include "xisub/error.hpp"
#include "xisub/functionals.hpp"
#include "xisub/stability.hpp"
#include "xisub/xi_curves.hpp"
#include "xisub/xi_equation.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace xisub::acceptance {

namespace {

// Tolerances.
constexpr double kResidualTol = 1e-8;
constexpr double kNonExampleResidual = 1e-2;
constexpr double kParallelismTol = 1e-5;
constexpr double kFirstVariationZero = 1e-8;   // relative to V
constexpr double kFirstVariationFd = 1e-5;     // relative to max(1, |fd|)
constexpr double kSecondVariationFd = 1e-4;    // relative
constexpr double kRadialAnchorTol = 1e-6;      // relative
constexpr double kIdentityTol = 1e-6;
constexpr double kHermiteEigenTol = 1e-9;
constexpr double kHermiteOrthTol = 1e-8;
constexpr double kPlaneSpectrumTol = 1e-6;
constexpr double kWStabilityTol = 1e-8;
constexpr double kDriftTol = 1e-8;
constexpr double kClosureGapTol = 1e-8;
constexpr double kRotationTol = 1e-8;
constexpr double kCurveResidualTol = 1e-6;

constexpr int kFirstVariationFields = 20;
constexpr int kSecondVariationFields = 10;
constexpr int kCurveRuns = 50;

const std::vector<std::pair<std::string, std::string>>& titles() {
  static const std::vector<std::pair<std::string, std::string>> t{
      {"1", "xi-equation certification"},
      {"2", "Gaussian-space parallelism identity"},
      {"3", "first variation"},
      {"4", "second variation"},
      {"5", "operator identities"},
      {"6", "Hermite suite"},
      {"7", "W-stability of planes"},
      {"8a", "sphere index: closed form vs Galerkin"},
      {"8b", "sphere index: index = m+1 iff r^2 <= m"},
      {"9", "xi-curve conservation"},
      {"10", "determinism"},
  };
  return t;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(3) << v;
  return os.str();
}

std::string key(const std::string& id, const std::string& check) { return id + "/" + check; }

// Runs body; an exception becomes an error record and a failing check.
void guarded(Report& report, const std::string& name, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report.add_error(name, e);
    report.add({name, std::nan(""), 0.0, false, e.what()});
  }
}

int verification_nodes(int m) { return m == 1 ? 24 : m == 2 ? 12 : 8; }
int variation_nodes(int m) { return m == 1 ? 24 : m == 2 ? 14 : 10; }
int identity_nodes(int m) { return m == 1 ? 32 : 24; }

bool is_plane_or_sphere(const CatalogImmersion& item) {
  return item.family == "plane" || item.family == "sphere";
}

void criterion_1(Report& report, const Options& opt) {
  for (const auto& item : standard_catalog()) {
    const std::string name = key("1", "residual " + item.name());
    guarded(report, name, [&] {
      const auto grid = verification_grid(item.immersion, verification_nodes(item.dim()));
      const XiResidual r = xi_residual(item.immersion, grid, opt.policy);
      report.at_most(name, r.residual, kResidualTol);
    });
  }
  const std::string name = key("1", "off-center sphere S^2(1, |x0| = 0.5) rejected");
  guarded(report, name, [&] {
    const ParametricImmersion imm = make_offcenter_sphere(1.0, Vec{{0.3, 0.0, 0.4}});
    const XiResidual r = xi_residual(imm, verification_grid(imm, 12), opt.policy);
    report.at_least(name, r.residual, kNonExampleResidual);
  });
}

void criterion_2(Report& report, const Options& opt) {
  auto check = [&](const std::string& label, const ParametricImmersion& imm) {
    const std::string name = key("2", "discrepancy " + label);
    guarded(report, name, [&] {
      const auto grid = verification_grid(imm, verification_nodes(imm.dim()));
      const ParallelismCheck c = modified_mcv_parallelism_check(imm, grid, opt.policy);
      report.at_most(name, c.discrepancy, kParallelismTol,
                     "gaussian side " + fmt(c.gaussian_side) + ", euclidean side " +
                         fmt(c.euclidean_side));
    });
  };
  for (const auto& item : standard_catalog()) check(item.name(), item.immersion);
  check("ellipse(a=2,b=1)", make_ellipse(2.0, 1.0));
}

void criterion_3(Report& report, const Options& opt) {
  for (const auto& item : standard_catalog()) {
    double worst_zero = 0.0, worst_fd = 0.0;
    const std::string zero_name = key("3", "analytic/V " + item.name());
    const std::string fd_name = key("3", "analytic vs fd " + item.name());
    guarded(report, zero_name, [&] {
      for (int k = 0; k < kFirstVariationFields; ++k) {
        const CompactField f = random_compact_normal_field(item, opt.seed + 1000 * k + 3);
        const VariationFamily fam = normal_family(f.field, f.panels);
        const auto grid = variation_grid(item.immersion, variation_nodes(item.dim()), f.panels);
        const WeightedVolume V = weighted_volume(item.immersion, item.xi, grid, opt.policy);
        const FirstVariation a = first_variation(item.immersion, item.xi, fam, grid, opt.policy);
        const FirstVariation d =
            first_variation_fd(item.immersion, item.xi, fam, grid, 1e-3, opt.policy);
        worst_zero = std::max(worst_zero, std::abs(a.V) / V.V);
        worst_fd = std::max({worst_fd, std::abs(a.V - d.V) / std::max(1.0, std::abs(d.V)),
                             std::abs(a.V_bar - d.V_bar) / std::max(1.0, std::abs(d.V_bar))});
      }
      report.at_most(zero_name, worst_zero, kFirstVariationZero);
      report.at_most(fd_name, worst_fd, kFirstVariationFd);
    });
  }
}

void criterion_4(Report& report, const Options& opt) {
  for (const auto& item : standard_catalog()) {
    if (!is_plane_or_sphere(item)) continue;
    const std::string name = key("4", "Q vs fd " + item.name());
    guarded(report, name, [&] {
      double worst = 0.0;
      const int nodes = identity_nodes(item.dim());
      for (int k = 0; k < kSecondVariationFields; ++k) {
        const CompactField f = random_compact_normal_field(item, opt.seed + 1000 * k + 4);
        const auto grid = variation_grid(item.immersion, nodes, f.panels);
        const double Q = second_variation(item.immersion, item.xi, f.field, grid, opt.policy);
        const double fd = second_variation_fd(item.immersion, item.xi,
                                              normal_family(f.field, f.panels), grid, 5e-3,
                                              opt.policy);
        worst = std::max(worst, std::abs(Q - fd) / std::max(std::abs(fd), 1e-300));
      }
      report.at_most(name, worst, kSecondVariationFd);
    });
  }
  for (int m : {1, 2}) {
    const std::string name = key("4", "Q(x,x) = -(m+r^2) V on S^" + std::to_string(m) + "(1)");
    guarded(report, name, [&] {
      const CatalogImmersion s = make_sphere(m, 1.0);
      NormalField x;
      x.value = [imm = s.immersion](const Vec& u) { return imm.position(u); };
      x.label = "position";
      const auto grid = variation_grid(s.immersion, m == 1 ? 32 : 24);
      const double Q = second_variation(s.immersion, s.xi, x, grid, opt.policy);
      const double V = weighted_volume(s.immersion, s.xi, grid, opt.policy).V;
      const double expected = -(m + 1.0) * V;
      report.at_most(name, std::abs(Q - expected) / std::abs(expected), kRadialAnchorTol,
                     "Q = " + fmt(Q) + ", V = " + fmt(V));
    });
  }
}

double relative_gap(const IntegralGap& g) { return g.gap() / std::max(1.0, g.scale); }

void criterion_5(Report& report, const Options& opt) {
  std::mt19937_64 rng(opt.seed + 5);
  std::normal_distribution<double> normal;
  for (const auto& item : standard_catalog()) {
    const ParametricImmersion& imm = item.immersion;
    const int nodes = item.dim() == 1 ? 16 : item.dim() == 2 ? 8 : 5;
    const CompactField eta1 = random_compact_normal_field(item, opt.seed + 51);
    const CompactField eta2 = random_compact_normal_field(item, opt.seed + 52);
    const CompactScalar phi = random_compact_scalar(item, opt.seed + 53);
    const CompactScalar psi = random_compact_scalar(item, opt.seed + 54);

    const std::string pr = key("5", "product rule " + item.name());
    guarded(report, pr, [&] {
      const auto grid = verification_grid(imm, nodes);
      report.at_most(pr, product_rule_check(imm, phi.field, eta1.field, grid, opt.policy),
                     kIdentityTol);
    });
    const std::string ibp = key("5", "integration by parts " + item.name());
    guarded(report, ibp, [&] {
      auto panels = eta1.panels;
      for (std::size_t a = 0; a < panels.size() && a < eta2.panels.size(); ++a)
        panels[a].breaks.insert(panels[a].breaks.end(), eta2.panels[a].breaks.begin(),
                                eta2.panels[a].breaks.end());
      const auto grid = variation_grid(imm, identity_nodes(item.dim()), panels);
      const double bundle = relative_gap(
          integration_by_parts_check(imm, item.xi, eta1.field, eta2.field, grid, opt.policy));
      report.at_most(ibp, bundle, kIdentityTol);
    });
    const std::string ibps = key("5", "scalar integration by parts " + item.name());
    guarded(report, ibps, [&] {
      auto panels = phi.panels;
      for (std::size_t a = 0; a < panels.size() && a < psi.panels.size(); ++a)
        panels[a].breaks.insert(panels[a].breaks.end(), psi.panels[a].breaks.begin(),
                                psi.panels[a].breaks.end());
      const auto grid = variation_grid(imm, identity_nodes(item.dim()), panels);
      report.at_most(ibps,
                     relative_gap(integration_by_parts_check(imm, item.xi, phi.field, psi.field,
                                                             grid, opt.policy)),
                     kIdentityTol);
    });
    const std::string cut = key("5", "cutoff identity " + item.name());
    guarded(report, cut, [&] {
      auto panels = phi.panels;
      for (std::size_t a = 0; a < panels.size() && a < eta1.panels.size(); ++a)
        panels[a].breaks.insert(panels[a].breaks.end(), eta1.panels[a].breaks.begin(),
                                eta1.panels[a].breaks.end());
      const auto grid = variation_grid(imm, identity_nodes(item.dim()), panels);
      report.at_most(cut,
                     relative_gap(cutoff_identity_check(imm, item.xi, phi.field, eta1.field,
                                                        grid, opt.policy)),
                     kIdentityTol);
    });
    const std::string heights = key("5", "height identities " + item.name());
    guarded(report, heights, [&] {
      const auto grid = verification_grid(imm, nodes);
      double vn = 0.0, lv = 0.0;
      for (const NormalField& N : item.parallel_frame) {
        Vec v(imm.ambient_dim());
        for (int i = 0; i < v.size(); ++i) v[i] = normal(rng);
        const HeightIdentities h = height_identities(imm, v, N, grid, opt.policy);
        vn = std::max(vn, h.vn_defect);
        lv = std::max(lv, h.lvbot_defect);
      }
      report.at_most(key("5", "vn identity " + item.name()), vn, kIdentityTol);
      report.at_most(key("5", "lvbot identity " + item.name()), lv, kIdentityTol);
    });
  }
}

void criterion_6(Report& report, const Options& opt) {
  for (int m = 1; m <= 3; ++m) {
    const std::string name = key("6", "OU eigen-equation degree <= 6, m = " + std::to_string(m));
    guarded(report, name, [&] {
      Box box(m, Axis{-4.0, 4.0, false, 0.0});
      const QuadratureGrid grid = tensor_grid(box, std::vector<int>(m, m == 3 ? 5 : 9));
      double worst = 0.0;
      for (const auto& idx : multi_indices(m, 6)) worst = std::max(worst, ou_eigen_check(idx, grid));
      report.at_most(name, worst, kHermiteEigenTol);
    });
    const std::string orth = key("6", "weighted orthogonality m = " + std::to_string(m));
    guarded(report, orth, [&] {
      report.at_most(orth, hermite_orthogonality_defect(m, 6), kHermiteOrthTol);
    });
  }
  for (int m : {1, 2}) {
    const std::string name = key("6", "spectrum of -L~ on P^" + std::to_string(m));
    guarded(report, name, [&] {
      const int degree = m == 1 ? 8 : 5;
      const Spectrum s = galerkin_spectrum(plane_scalar_problem(m, degree), opt.policy);
      std::vector<double> expected;
      for (const auto& idx : multi_indices(m, degree)) {
        int total = 0;
        for (int n : idx) total += n;
        expected.push_back(total - 1.0);
      }
      std::sort(expected.begin(), expected.end());
      double worst = 0.0;
      for (std::size_t i = 0; i < expected.size(); ++i)
        worst = std::max(worst, std::abs(s.eigenvalues.at(i) - expected[i]));
      report.at_most(name, worst, kPlaneSpectrumTol,
                     "lowest " + fmt(s.eigenvalues.front()) + ", size " +
                         std::to_string(expected.size()));
    });
  }
}

void criterion_7(Report& report, const Options&) {
  for (int m : {1, 2}) {
    const std::string sm = std::to_string(m);
    const std::string name = key("7", "min Q/|eta|^2 after VP projection on P^" + sm);
    guarded(report, name, [&] {
      const WStability w = plane_w_stability(m, 8);
      report.at_least(name, w.min_ratio, -kWStabilityTol,
                      std::to_string(w.fields) + " Hermite fields, unconstrained min " +
                          fmt(w.unconstrained_min));
    });
    const std::string wit = key("7", "cutoff constant normal at R = 10 on P^" + sm + " (Q < 0)");
    guarded(report, wit, [&] {
      WitnessParams params;
      params.m = m;
      params.p = 1;
      params.R = 10.0;
      const Witness w = instability_witness(WitnessKind::PlaneCutoff, params);
      report.add({wit, w.Q, 0.0, w.Q < 0.0, "V = " + fmt(w.V) + ", threshold R " + fmt(w.threshold)});
    });
  }
}

const std::vector<double>& index_radii() {
  static const std::vector<double> r{0.8, 1.0, std::sqrt(2.0), 2.0};
  return r;
}

std::string sphere_label(int m, int p, double r) {
  std::ostringstream os;
  os << "S^" << m << "(" << std::setprecision(6) << r << ") p=" << p;
  return os.str();
}

void criterion_8a(Report& report, const Options& opt) {
  for (int m : {1, 2})
    for (int p : {1, 2})
      for (double r : index_radii()) {
        const std::string name = key("8a", "negative count " + sphere_label(m, p, r));
        guarded(report, name, [&] {
          const Spectrum s = galerkin_spectrum(sphere_problem(m, p, r, true, m == 1 ? 16 : 8),
                                               opt.policy);
          const int closed = sphere_index(m, p, r, true).index;
          const int galerkin = s.negative_count();
          report.add({name, static_cast<double>(std::abs(galerkin - closed)), 0.0,
                      galerkin == closed,
                      "galerkin " + std::to_string(galerkin) + ", closed form " +
                          std::to_string(closed)});
        });
      }
}

void criterion_8b(Report& report, const Options&) {
  for (int m : {1, 2})
    for (int p : {1, 2})
      for (double r : index_radii()) {
        const std::string name = key("8b", "index = m+1 iff r^2 <= m " + sphere_label(m, p, r));
        guarded(report, name, [&] {
          const SphereIndex idx = sphere_index(m, p, r, true);
          const bool small = r * r <= m + 1e-12;
          const bool minimal = idx.index == m + 1;
          report.add({name, static_cast<double>(idx.index), static_cast<double>(m + 1),
                      small == minimal,
                      "index " + std::to_string(idx.index) + ", r^2 <= m " +
                          (small ? "true" : "false")});
        });
      }
}

void criterion_9(Report& report, const Options& opt) {
  const std::string sweep = key("9", "first-integral drift, 50-run sweep");
  guarded(report, sweep, [&] {
    struct Run {
      double C, x1, x2, theta;
      double drift = 0.0;
      bool blew_up = false;
    };
    std::mt19937_64 rng(opt.seed + 9);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::vector<Run> runs(kCurveRuns);
    for (auto& run : runs) {
      run.C = 0.5 * uni(rng);
      run.x1 = 1.2 * uni(rng);
      run.x2 = 1.2 * uni(rng);
      run.theta = std::numbers::pi * uni(rng);
    }
    kernels::for_each_index(
        runs.size(),
        [&](std::size_t i) {
          Run& run = runs[i];
          try {
            const Trajectory t = integrate_xi_curve(Vec2(run.x1, run.x2), run.theta, run.C, 20.0);
            run.drift = t.max_drift();
          } catch (const Error& e) {
            if (e.code() != ErrorCode::BlowUp) throw;
            run.blew_up = true;
          }
        },
        opt.policy);
    double worst = 0.0;
    int accepted = 0;
    for (const auto& run : runs) {
      if (run.blew_up) continue;
      ++accepted;
      worst = std::max(worst, run.drift);
    }
    report.at_most(sweep, worst, kDriftTol,
                   std::to_string(accepted) + " of " + std::to_string(kCurveRuns) +
                       " runs accepted, the rest reached |x| = 6");
    report.at_least(key("9", "accepted runs"), accepted, kCurveRuns / 2);
  });
  const std::string circle = key("9", "unit-circle self-shrinker closure gap");
  guarded(report, circle, [&] {
    const Trajectory t = integrate_self_shrinker_curve(Vec2(1.0, 0.0), std::numbers::pi / 2, 7.0);
    const Closure c = closure_detect(t);
    report.add({circle, c.gap, kClosureGapTol,
                c.status == ClosureStatus::Closed && c.gap <= kClosureGapTol,
                "status " + to_string(c.status) + ", period " + fmt(c.period)});
    report.at_most(key("9", "unit-circle rotation number - 1"), std::abs(c.rotation_number - 1.0),
                   kRotationTol);
  });
  const std::string sampled = key("9", "sampled xi-curve as immersion, xi_residual");
  guarded(report, sampled, [&] {
    const Trajectory t = integrate_xi_curve(Vec2(1.0, 0.0), std::numbers::pi / 2, 0.3, 6.0);
    const ParametricImmersion imm = t.as_immersion();
    report.at_most(sampled, xi_residual(imm, verification_grid(imm, 24), opt.policy).residual,
                   kCurveResidualTol);
  });
}

const std::vector<std::string>& first_pass_ids() {
  static const std::vector<std::string> ids{"1", "2", "3", "4", "5", "6", "7", "8a", "8b", "9"};
  return ids;
}

bool is_first_pass(const std::string& id) {
  const auto& ids = first_pass_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

// Records and errors appended since (rec0, err0), serialized.
std::string slice_dump(const Report& r, std::size_t rec0, std::size_t err0) {
  nlohmann::json j{{"records", nlohmann::json::array()}, {"errors", nlohmann::json::array()}};
  for (std::size_t i = rec0; i < r.records().size(); ++i) j["records"].push_back(to_json(r.records()[i]));
  for (std::size_t i = err0; i < r.errors().size(); ++i) j["errors"].push_back(r.errors()[i]);
  return dump(j);
}

std::string single_pass(const std::vector<std::string>& ids, const Options& opt) {
  Report r;
  std::string out;
  for (const auto& id : ids) {
    if (!is_first_pass(id)) continue;
    const std::size_t rec0 = r.records().size();
    const std::size_t err0 = r.errors().size();
    run_criterion(id, r, opt);
    out += slice_dump(r, rec0, err0);
  }
  return out;
}

void compare_passes(Report& report, const std::string& a, const std::string& b) {
  std::size_t diff = 0;
  const std::size_t n = std::max(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i)
    if (i >= a.size() || i >= b.size() || a[i] != b[i]) ++diff;
  report.add({key("10", "byte difference between two reproducible passes"),
              static_cast<double>(diff), 0.0, diff == 0, std::to_string(a.size()) + " bytes"});
}

Options reproducible(Options opt) {
  opt.policy.reproducible = true;
  return opt;
}

}  // namespace

std::vector<std::string> criterion_ids() {
  std::vector<std::string> ids;
  for (const auto& [id, title] : titles()) ids.push_back(id);
  return ids;
}

std::string criterion_title(const std::string& id) {
  for (const auto& [i, title] : titles())
    if (i == id) return title;
  throw Error(ErrorCode::InvalidArgument, "unknown criterion " + id);
}

void run_criterion(const std::string& id, Report& report, const Options& options) {
  static const std::map<std::string, void (*)(Report&, const Options&)> table{
      {"1", criterion_1},   {"2", criterion_2},   {"3", criterion_3},
      {"4", criterion_4},   {"5", criterion_5},   {"6", criterion_6},
      {"7", criterion_7},   {"8a", criterion_8a}, {"8b", criterion_8b},
      {"9", criterion_9}};
  if (id == "10") {
    const Options opt = reproducible(options);
    compare_passes(report, single_pass(first_pass_ids(), opt), single_pass(first_pass_ids(), opt));
    return;
  }
  const auto it = table.find(id);
  if (it == table.end()) throw Error(ErrorCode::InvalidArgument, "unknown criterion " + id);
  it->second(report, options);
}

std::vector<Verdict> run(const std::vector<std::string>& ids, Report& report,
                         const Options& options) {
  std::vector<Verdict> verdicts;
  bool complete_first = true;
  for (const auto& id : first_pass_ids())
    complete_first = complete_first && std::find(ids.begin(), ids.end(), id) != ids.end();
  const Options opt = complete_first ? reproducible(options) : options;
  // The first pass is the run itself; its slices are kept for the comparison.
  std::string first;

  for (const auto& id : ids) {
    const std::size_t rec0 = report.records().size();
    const std::size_t err0 = report.errors().size();
    const auto t0 = std::chrono::steady_clock::now();
    if (id == "10" && complete_first) {
      compare_passes(report, first, single_pass(ids, opt));
    } else {
      run_criterion(id, report, opt);
      if (complete_first && is_first_pass(id)) {
        first += slice_dump(report, rec0, err0);
      }
    }
    Verdict v;
    v.id = id;
    v.title = criterion_title(id);
    v.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    v.records = report.records().size() - rec0;
    v.errors = report.errors().size() - err0;
    for (std::size_t i = rec0; i < report.records().size(); ++i) {
      const CheckRecord& r = report.records()[i];
      if (r.pass) continue;
      if (v.failed++ == 0) v.worst = r.name + " = " + fmt(r.value) + " (tol " + fmt(r.tolerance) + ")";
    }
    v.pass = v.records > 0 && v.failed == 0 && v.errors == 0;
    verdicts.push_back(v);
  }
  return verdicts;
}

std::string format_verdict(const Verdict& v) {
  std::ostringstream os;
  os << "criterion " << std::left << std::setw(3) << v.id << (v.pass ? "PASS" : "FAIL") << "  "
     << v.title << " [" << v.records - v.failed << "/" << v.records << " checks, " << std::fixed
     << std::setprecision(1) << v.seconds << " s]";
  if (!v.pass && !v.worst.empty()) os << "  first failure: " << v.worst;
  return os.str();
}

}  // namespace xisub::acceptance
