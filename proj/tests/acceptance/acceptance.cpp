// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.
//   acceptance            run all criteria
//   acceptance 3 5        run a subset

#include "jmgt/diagnostics/identities.hpp"
#include "jmgt/lab/experiments.hpp"
#include "jmgt/spectral/checks.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

using namespace jmgt;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

PhysicalParams base_params() { return PhysicalParams{}; }

std::shared_ptr<const Model> interval_model(int n, const std::string& g0, const PhysicalParams& p) {
  const Mesh mesh = build_interval_mesh(1.0, n);
  return build_model(mesh, partition_boundary(mesh, g0), p);
}

std::shared_ptr<const Model> square_model(int n, const std::string& g0, const PhysicalParams& p) {
  const Mesh mesh = build_rect_mesh(1.0, 1.0, n, n);
  return build_model(mesh, partition_boundary(mesh, g0), p);
}

Scenario make_scenario(std::shared_ptr<const Model> m, double T, double dt, double h_size = 1.0) {
  Scenario sc;
  sc.model = m;
  InitialDataSpec spec;
  spec.h_size = h_size;
  sc.initial = make_initial_data(*m, spec);
  sc.T = T;
  sc.dt = dt;
  sc.compatible_data = true;
  return sc;
}

// 1) energy identity, forced and damped, with second-order residual decay under dt halving
Outcome criterion_energy_identity() {
  PhysicalParams p = base_params();
  p.set_gamma_constant(0.2);
  p.forcing = [](const Point& x, double t) { return std::sin(M_PI * x.x()) * std::cos(M_PI * x.y()) * std::cos(2.0 * t); };
  Outcome o{true, ""};
  for (int dim : {1, 2}) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto m = dim == 1 ? interval_model(200, "endpoint0", p) : square_model(32, "left", p);
    double res[2];
    int i = 0;
    for (double dt : {1e-3, 5e-4}) {
      const Trajectory tr = integrate(make_scenario(m, 1.0, dt));
      res[i++] = energy_identity_residual(tr, 0.0, 1.0).relative;
    }
    const double order = std::log2(res[0] / res[1]);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = res[0] <= 1e-4 && std::abs(order - 2.0) <= 0.3 && secs <= 30.0;
    o.pass = o.pass && ok;
    o.detail += std::to_string(dim) + "D residual " + fmt(res[0]) + " order " + fmt(order) + " in " + fmt(secs) + "s; ";
  }
  return o;
}

// 2) conservation at criticality without boundary damping
Outcome criterion_conservation() {
  PhysicalParams p = base_params();
  p.kappa1 = constant_field(0.0);
  Scenario sc = make_scenario(interval_model(200, "endpoint0", p), 10.0, 1e-3);
  sc.stride = 10;
  const ConservationReport r = experiment_conservation(sc);
  return {r.max_drift <= 1e-8, "max relative E1 drift " + fmt(r.max_drift)};
}

// 3) <A_d xi, xi>_H against its closed form
Outcome criterion_dissipativity() {
  PhysicalParams p = base_params();
  p.set_gamma_constant(0.3);
  Outcome o{true, ""};
  for (int dim : {1, 2}) {
    const auto m = dim == 1 ? interval_model(60, "endpoint0", p) : square_model(10, "left", p);
    const ZGenerators z = build_generator_z(m->ops, p);
    const DissipativityReport r = dissipativity_check(m->ops, p, z.Ad, 100);
    o.pass = o.pass && r.max_mismatch <= 1e-11 && r.max_form <= 0.0;
    o.detail += std::to_string(dim) + "D mismatch " + fmt(r.max_mismatch) + " max form " + fmt(r.max_form) + "; ";
  }
  return o;
}

// 4) elimination through K_s against a direct block solve
Outcome criterion_resolvent() {
  PhysicalParams p = base_params();
  Outcome o{true, ""};
  std::mt19937_64 rng(default_seed);
  std::normal_distribution<double> g;
  for (int dim : {1, 2}) {
    const auto m = dim == 1 ? interval_model(100, "endpoint0", p) : square_model(16, "left", p);
    const ZGenerators z = build_generator_z(m->ops, p);
    double worst = 0.0;
    double min_form = std::numeric_limits<double>::infinity();
    for (double s : {0.5, 1.0, 2.0}) {
      Vec L(3 * m->n());
      for (Index i = 0; i < L.size(); ++i) L[i] = g(rng);
      const ResolventReport r = resolvent_check(m->ops, p, z.Ad, s, L);
      worst = std::max(worst, r.discrepancy);
      min_form = std::min(min_form, r.min_ks_form);
    }
    o.pass = o.pass && worst <= 1e-10 && min_form > 0.0;
    o.detail += std::to_string(dim) + "D discrepancy " + fmt(worst) + "; ";
  }
  return o;
}

// 5) the u-form and z-form generators share their spectrum
Outcome criterion_similarity() {
  PhysicalParams p = base_params();
  p.set_gamma_constant(0.1);
  Outcome o{true, ""};
  for (int dim : {1, 2}) {
    const auto m = dim == 1 ? interval_model(299, "endpoint0", p) : square_model(30, "left", p);
    const ZGenerators z = build_generator_z(m->ops, p);
    const SpectrumReport su = spectrum(m->generator, SpectrumMode::dense, 0);
    const SpectrumReport sz = spectrum(z.A, SpectrumMode::dense, 0);
    const double d = multiset_distance(su.eigenvalues, sz.eigenvalues, true);
    o.pass = o.pass && d <= 1e-8;
    o.detail += std::to_string(dim) + "D 3N=" + std::to_string(su.dimension) + " distance " + fmt(d) + "; ";
  }
  return o;
}

struct DecayCase {
  std::string label;
  Scenario scenario;
};

// Data are the rightmost eigenmode, so the run shows the slowest discrete rate
// directly; dt resolves that mode's frequency.
std::vector<DecayCase> decay_cases() {
  PhysicalParams p = base_params();
  std::vector<DecayCase> cases;
  cases.push_back({"1D", make_scenario(interval_model(100, "endpoint0", p), 10.0, 2e-4)});
  cases.push_back({"2D", make_scenario(square_model(16, "left", p), 10.0, 1e-3)});
  cases[0].scenario.stride = 50;
  cases[1].scenario.stride = 10;
  for (auto& c : cases) c.scenario.initial = rightmost_mode(*c.scenario.model);
  return cases;
}

// 6) uniform decay at criticality: sigma < 0 and fitted rate near 2|sigma|
Outcome criterion_uniform_decay() {
  Outcome o{true, ""};
  for (const auto& c : decay_cases()) {
    const Model& m = *c.scenario.model;
    const Point x0 = m.dimension() == 1 ? Point(-1.0, 0.0) : Point(-1.0, 0.5);
    const bool star = check_star_shaped(*m.mesh, m.partition, x0).pass;
    const DecayRateReport r = experiment_decay_rate(c.scenario);
    o.pass = o.pass && star && r.pass;
    o.detail += c.label + " sigma " + fmt(r.sigma) + " omega " + fmt(r.fit.omega) + " 2|sigma| " + fmt(r.predicted) +
                " gap " + fmt(r.relative_gap) + "; ";
  }
  return o;
}

// 7) two-level decay on the same runs
Outcome criterion_two_level() {
  Outcome o{true, ""};
  for (const auto& c : decay_cases()) {
    const TwoLevelReport r = experiment_two_level(c.scenario);
    const bool ok = r.fit_calE.omega > 0.0 && r.fit_calE.omega <= r.fit_E.omega + 0.05 * r.fit_E.omega;
    o.pass = o.pass && ok;
    o.detail += c.label + " omega_E " + fmt(r.fit_E.omega) + " omega_calE " + fmt(r.fit_calE.omega) + "; ";
  }
  return o;
}

// 8) pairing identity of the Neumann map: (K N g, xi) = int_G1 g xi
Outcome criterion_neumann_adjoint() {
  PhysicalParams p = base_params();
  Outcome o{true, ""};
  std::mt19937_64 rng(default_seed + 8);
  std::normal_distribution<double> g;
  for (int dim : {1, 2}) {
    const auto m = dim == 1 ? interval_model(40, "endpoint0", p) : square_model(8, "left", p);
    const Mesh& mesh = *m->mesh;
    double worst = 0.0;
    for (int k = 0; k < 25; ++k) {
      Vec phi(m->n()), xi(m->n());
      for (Index i = 0; i < m->n(); ++i) phi[i] = g(rng);
      for (Index i = 0; i < m->n(); ++i) xi[i] = g(rng);
      const Vec psi = solve_neumann_map(m->ops, phi);
      const double lhs = xi.dot(m->ops.K * psi);
      double rhs = 0.0;
      for (std::size_t f = 0; f < mesh.boundary.size(); ++f) {
        if (!m->partition.is_gamma1(f)) continue;
        const auto& facet = mesh.boundary[f];
        for (const auto& q : mesh.facet_quadrature(facet)) {
          double a = 0, b = 0;
          for (int i = 0; i < facet.node_count; ++i) {
            a += q.shape[i] * phi[facet.nodes[i]];
            b += q.shape[i] * xi[facet.nodes[i]];
          }
          rhs += q.weight * a * b;
        }
      }
      const double scale = std::sqrt(xi.dot(m->ops.K * xi)) * std::sqrt(psi.dot(m->ops.K * psi));
      worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
    o.pass = o.pass && worst <= 1e-12;
    o.detail += std::to_string(dim) + "D worst " + fmt(worst) + "; ";
  }
  return o;
}

// 9) multiplier identity: exact on static P1 states, shrinking residual on dynamic ones
Outcome criterion_multiplier() {
  PhysicalParams p = base_params();
  p.set_gamma_constant(0.2);
  const auto m64 = square_model(64, "left", p);
  const MultiplierField h = synthesize_multiplier_field(*m64->mesh, m64->partition, 1, 1.0);
  const Vec z = m64->mesh->interpolate(
      [](const Point& x) { return std::sin(M_PI * x.x()) * std::cos(M_PI * x.y()) + x.x() * x.x() * x.y(); });
  const double stat = rellich_static_residual(*m64, h, z).relative;
  Outcome o{stat <= 1e-6, "static " + fmt(stat) + "; dynamic"};
  double prev = std::numeric_limits<double>::infinity();
  for (int n : {16, 32, 64}) {
    const auto m = square_model(n, "left", p);
    Scenario sc = make_scenario(m, 0.5, 1.0 / (8.0 * n));
    sc.store_states = true;
    const Trajectory tr = integrate(sc);
    const double r = multiplier_identity_residual(tr, h, 0.0, 0.5).relative;
    o.pass = o.pass && r < prev;
    prev = r;
    o.detail += " " + std::to_string(n) + ":" + fmt(r);
  }
  return o;
}

// 10) analytic fields certified exactly, synthesized field re-certified on a denser lattice
Outcome criterion_field() {
  Outcome o{true, ""};
  const Mesh line = build_interval_mesh(1.0, 50);
  const Mesh square = build_rect_mesh(1.0, 1.0, 16, 16);
  for (const auto& [mesh, g0] : {std::pair{&line, "endpoint0"}, std::pair{&square, "left"}}) {
    const auto part = partition_boundary(*mesh, g0);
    const MultiplierField h = synthesize_multiplier_field(*mesh, part, 2, 1.0);
    const FieldReport v = verify_field(h, *mesh, part);
    const bool ok = h.origin == "analytic" && std::abs(h.delta_h - 1.0) <= 1e-14 && h.boundary_residual == 0.0 && v.pass;
    o.pass = o.pass && ok;
    o.detail += std::to_string(mesh->dimension) + "D analytic delta " + fmt(h.delta_h) + " residual " +
                fmt(h.boundary_residual) + "; ";
  }
  const auto part = partition_boundary(square, "left,bottom");
  const MultiplierField h = synthesize_multiplier_field(square, part, 2, 0.5);
  const FieldReport v = verify_field(h, square, part);
  o.pass = o.pass && h.origin == "synthesized" && v.pass && v.min_eigenvalue - h.delta_target >= -1e-8;
  o.detail += "synthesized margin " + fmt(v.min_eigenvalue - h.delta_target) + " residual " + fmt(v.boundary_residual);
  return o;
}

Scenario sweep_scenario() {
  PhysicalParams p = base_params();
  Scenario sc = make_scenario(interval_model(100, "endpoint0", p), 30.0, 1e-2);
  sc.stride = 5;
  return sc;
}

// 11) nonlinear small-data decay over a beta sweep
Outcome criterion_sweep() {
  const SweepResult r = experiment_smallness_sweep(sweep_scenario(), {1e-3, 1e-2, 1e-1}, 3);
  std::ostringstream os;
  os << "omega_lin " << fmt(r.omega_linear) << " T " << fmt(r.T_run) << " omega(beta)";
  for (const auto& row : r.rows) os << ' ' << fmt(row.beta) << ':' << (row.fit ? fmt(row.fit->omega) : "none");
  os << " checks " << r.check_existence << r.check_monotone << r.check_limit;
  return {r.pass, os.str()};
}

// 12) halving the amplitude quarters the nonlinear deviation
Outcome criterion_signature() {
  Scenario sc = sweep_scenario();
  sc.T = 4.0;
  const SignatureReport r = quadratic_signature(sc, 0.05);
  return {std::abs(r.ratio - 4.0) <= 0.5, "deviation ratio " + fmt(r.ratio)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::tuple<int, std::string, double, std::function<Outcome()>>> criteria{
      {1, "energy identity", 60.0, criterion_energy_identity},
      {2, "critical conservation", 10.0, criterion_conservation},
      {3, "dissipativity formula", 1.0, criterion_dissipativity},
      {4, "resolvent by elimination", 5.0, criterion_resolvent},
      {5, "similarity of spectra", 60.0, criterion_similarity},
      {6, "uniform decay at criticality", 120.0, criterion_uniform_decay},
      {7, "two-level decay", 120.0, criterion_two_level},
      {8, "Neumann map pairing", 1.0, criterion_neumann_adjoint},
      {9, "multiplier identity", 120.0, criterion_multiplier},
      {10, "multiplier field certificates", 30.0, criterion_field},
      {11, "nonlinear small-data decay", 300.0, criterion_sweep},
      {12, "quadratic nonlinearity signature", 60.0, criterion_signature},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& [id, name, budget, run] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool ok = o.pass && secs <= budget;
    if (!ok) ++failed;
    std::printf("criterion %2d %-34s %s  [%.1fs of %.0fs] %s\n", id, name.c_str(), ok ? "PASS" : "FAIL", secs, budget,
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
