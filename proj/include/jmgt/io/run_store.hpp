#pragma once

#include "jmgt/diagnostics/identities.hpp"
#include "jmgt/io/scenario.hpp"
#include "jmgt/lab/experiments.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>

namespace jmgt {

namespace fs = std::filesystem;

inline Scenario build_scenario(const ScenarioConfig& cfg, std::uint64_t seed = default_seed) {
  Scenario sc;
  sc.model = make_model(cfg);
  if (cfg.initial.shape == "rightmost_mode") {
    sc.initial = rightmost_mode(*sc.model);
    InitialDataSpec rescale = cfg.initial;
    const EnergyReport e = compute_energies(sc.initial, *sc.model);
    if (rescale.h_size) sc.initial = sc.initial.scaled(*rescale.h_size / std::sqrt(e.H_norm_sq));
    if (rescale.h1_size) sc.initial = sc.initial.scaled(*rescale.h1_size / std::sqrt(e.H1_norm_sq));
  } else {
    sc.initial = make_initial_data(*sc.model, cfg.initial, seed);
  }
  sc.T = cfg.time.T;
  sc.dt = cfg.time.dt;
  sc.theta = cfg.time.theta;
  sc.nonlinear = cfg.time.nonlinear;
  sc.corrector = cfg.time.corrector;
  sc.stride = cfg.outputs.stride;
  sc.store_states = cfg.outputs.store_states;
  sc.compatible_data = cfg.initial.compatible;
  return sc;
}

// run-<hash prefix>, with -2, -3, ... appended when the directory already exists
inline fs::path create_run_dir(const fs::path& out, const std::string& hash, const std::string& prefix = "run") {
  fs::create_directories(out);
  const std::string base = prefix + "-" + hash.substr(0, 16);
  for (int k = 1;; ++k) {
    const fs::path p = out / (k == 1 ? base : base + "-" + std::to_string(k));
    if (fs::create_directory(p)) return p;
  }
}

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

inline void write_text(const fs::path& p, const std::string& text) {
  if (fs::exists(p)) throw Error("refusing to overwrite " + p.string());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

inline void write_json(const fs::path& p, const Json& j) { write_text(p, j.dump(2) + "\n"); }

inline const char* energies_header = "t,E0,E1,E2,E,calE,D_psi,Hnorm2,H1norm2,bd_damp,int_damp";

inline void write_energies_csv(const fs::path& p, const std::vector<EnergyReport>& rows) {
  std::ostringstream os;
  os << energies_header << '\n' << std::setprecision(17);
  for (const auto& r : rows)
    os << r.t << ',' << r.E0 << ',' << r.E1 << ',' << r.E2 << ',' << r.E << ',' << r.calE << ',' << r.D_psi << ','
       << r.H_norm_sq << ',' << r.H1_norm_sq << ',' << r.bd_damp << ',' << r.int_damp << '\n';
  write_text(p, os.str());
}

// "JMGTST01", u64 little-endian header length, JSON layout header, then f64 samples
inline void write_states(const fs::path& p, const Trajectory& tr) {
  const Index n = tr.states.empty() ? 0 : tr.states.front().size();
  const Json header = {{"format", "jmgt-states"},
                       {"version", 1},
                       {"dtype", "f64le"},
                       {"nodes", n},
                       {"samples", tr.states.size()},
                       {"record", {"t", "u[nodes]", "ut[nodes]", "utt[nodes]"}}};
  const std::string h = header.dump();
  if (fs::exists(p)) throw Error("refusing to overwrite " + p.string());
  std::ofstream out(p, std::ios::binary);
  out.write("JMGTST01", 8);
  const std::uint64_t len = h.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (const auto& s : tr.states) {
    out.write(reinterpret_cast<const char*>(&s.t), sizeof(double));
    for (const Vec* v : {&s.u, &s.ut, &s.utt})
      out.write(reinterpret_cast<const char*>(v->data()), static_cast<std::streamsize>(v->size() * sizeof(double)));
  }
  if (!out) throw Error("cannot write " + p.string());
}

struct StoredStates {
  Json header;
  std::vector<StateVector> states;
};

inline StoredStates read_states(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string(magic, 8) != "JMGTST01") throw Error(p.string() + " is not a state container");
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  std::string h(len, '\0');
  in.read(h.data(), static_cast<std::streamsize>(len));
  StoredStates out;
  out.header = Json::parse(h);
  const Index n = out.header["nodes"].get<Index>();
  const std::size_t count = out.header["samples"].get<std::size_t>();
  for (std::size_t k = 0; k < count; ++k) {
    StateVector s = StateVector::zeros(n);
    in.read(reinterpret_cast<char*>(&s.t), sizeof(double));
    for (Vec* v : {&s.u, &s.ut, &s.utt}) in.read(reinterpret_cast<char*>(v->data()), n * sizeof(double));
    out.states.push_back(std::move(s));
  }
  if (!in) throw Error(p.string() + " is truncated");
  return out;
}

// gnuplot-ready two-column file
inline void write_dat(const fs::path& p, const std::string& xname, const std::string& yname, const std::vector<double>& x,
                      const std::vector<double>& y) {
  std::ostringstream os;
  os << "# " << xname << ' ' << yname << '\n' << std::setprecision(17);
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) os << x[i] << ' ' << y[i] << '\n';
  write_text(p, os.str());
}

inline Json to_json(const DecayFit& f) {
  return {{"omega", f.omega}, {"M", f.M}, {"t_a", f.t_a}, {"t_b", f.t_b}, {"r2", f.r2}, {"norm", f.norm}, {"points", f.points}};
}

inline Json to_json(const IdentityResidual& r) {
  return {{"name", r.name},         {"t0", r.t0},           {"t1", r.t1},         {"lhs", r.lhs},
          {"rhs", r.rhs},           {"absolute", r.absolute}, {"relative", r.relative}, {"time_rule", r.time_rule},
          {"samples", r.samples}};
}

inline Json to_json(const MultiplierField& h, const FieldReport& verify) {
  Json j = {{"kind", h.kind() == MultiplierField::Kind::affine ? "affine" : "polynomial"},
            {"origin", h.origin},
            {"dimension", h.dimension()},
            {"delta_target", h.delta_target},
            {"delta_h", h.delta_h},
            {"boundary_residual", h.boundary_residual},
            {"verification",
             {{"min_eigenvalue", verify.min_eigenvalue},
              {"boundary_residual", verify.boundary_residual},
              {"interior_samples", verify.interior_samples},
              {"boundary_samples", verify.boundary_samples},
              {"pass", verify.pass}}}};
  if (h.kind() == MultiplierField::Kind::affine) {
    j["matrix"] = {{h.matrix()(0, 0), h.matrix()(0, 1)}, {h.matrix()(1, 0), h.matrix()(1, 1)}};
    j["offset"] = {h.offset().x(), h.offset().y()};
  } else {
    j["degree"] = h.degree();
    j["box_lower"] = {h.box_lower().x(), h.box_lower().y()};
    j["box_upper"] = {h.box_upper().x(), h.box_upper().y()};
    j["coefficients"] = std::vector<double>(h.coefficients().data(), h.coefficients().data() + h.coefficients().size());
  }
  return j;
}

inline MultiplierField field_from_json(const Json& j) {
  MultiplierField h;
  const int dim = j.at("dimension").get<int>();
  if (j.at("kind") == "affine") {
    Eigen::Matrix2d A;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) A(r, c) = j.at("matrix")[r][c].get<double>();
    h = MultiplierField::affine(dim, A, Point(j.at("offset")[0].get<double>(), j.at("offset")[1].get<double>()));
  } else {
    const auto c = j.at("coefficients").get<std::vector<double>>();
    h = MultiplierField::polynomial(dim, j.at("degree").get<int>(),
                                    Point(j.at("box_lower")[0].get<double>(), j.at("box_lower")[1].get<double>()),
                                    Point(j.at("box_upper")[0].get<double>(), j.at("box_upper")[1].get<double>()),
                                    Eigen::Map<const Vec>(c.data(), static_cast<Index>(c.size())));
  }
  h.delta_target = j.value("delta_target", 0.0);
  h.origin = j.value("origin", std::string("user"));
  return h;
}

}  // namespace jmgt
