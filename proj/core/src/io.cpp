#include "barylab/io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "barylab/error.hpp"

namespace barylab {

namespace {

json vec(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd to_vec(const json& j, const char* what) {
  if (!j.is_array()) throw InvalidArgument(std::string(what) + " must be an array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw InvalidArgument(std::string(what) + " must be an array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

json row_major(const Eigen::MatrixXd& m) {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index k = 0; k < m.cols(); ++k) out.push_back(m(i, k));
  return out;
}

Eigen::MatrixXd from_row_major(const json& j, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if (j.is_array() && !j.empty() && j[0].is_array()) {
    if (static_cast<Eigen::Index>(j.size()) != rows) throw InvalidArgument(std::string(what) + " has the wrong row count");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      auto r = to_vec(j[static_cast<std::size_t>(i)], what);
      if (r.size() != cols) throw InvalidArgument(std::string(what) + " has a row of the wrong length");
      m.row(i) = r.transpose();
    }
    return m;
  }
  auto flat = to_vec(j, what);
  if (flat.size() != rows * cols) throw InvalidArgument(std::string(what) + " has the wrong number of entries");
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = flat[i * cols + k];
  return m;
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw InvalidArgument(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

json potentials(const PotentialPair& p) {
  return {{"phi", vec(p.phi)}, {"psi", vec(p.psi)}, {"normalization", to_string(p.tag)}};
}

Normalization normalization_from_string(const std::string& s) {
  for (auto t : {Normalization::none, Normalization::zero_mean_phi, Normalization::centered_at_base})
    if (s == to_string(t)) return t;
  throw InvalidArgument("unknown normalization \"" + s + "\"");
}

}  // namespace

json stamped(json j, const RunStamp& stamp) {
  j["config_hash"] = stamp.config_hash;
  j["seed"] = stamp.seed;
  return j;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw InvalidArgument("cannot write " + path);
    out << text;
    if (!out) throw InvalidArgument("cannot write " + path);
  }
  fs::rename(tmp, p);
}

json space_to_json(const DiscreteSpace& space) {
  const auto& d = space.data();
  json j{{"label", d.label},
         {"kind", to_string(d.kind)},
         {"dim_n", d.dim_n},
         {"curv_k", d.curv_k},
         {"period", d.period},
         {"n", space.size()},
         {"diameter", space.diameter()},
         {"dist", row_major(d.dist)},
         {"ref_measure", vec(d.ref_measure)}};
  if (d.coords.size() > 0) {
    json pts = json::array();
    for (Eigen::Index i = 0; i < d.coords.rows(); ++i) pts.push_back(vec(d.coords.row(i).transpose()));
    j["points"] = pts;
  }
  return j;
}

DiscreteSpace space_from_json(const json& j) {
  SpaceData d;
  d.label = field(j, "label").get<std::string>();
  d.kind = j.contains("kind") ? space_kind_from_string(j["kind"].get<std::string>()) : SpaceKind::custom;
  d.dim_n = j.value("dim_n", 1);
  d.curv_k = j.value("curv_k", 0.0);
  d.period = j.value("period", 0.0);
  d.ref_measure = to_vec(field(j, "ref_measure"), "ref_measure");
  const auto n = d.ref_measure.size();
  d.dist = from_row_major(field(j, "dist"), n, n, "dist");
  if (j.contains("points")) {
    const auto& pts = j["points"];
    if (!pts.is_array() || static_cast<Eigen::Index>(pts.size()) != n)
      throw InvalidArgument("points must list one coordinate row per point");
    const auto dim = static_cast<Eigen::Index>(pts.empty() ? 0 : pts[0].size());
    d.coords = from_row_major(pts, n, dim, "points");
  }
  return DiscreteSpace(std::move(d));
}

json measure_to_json(const Measure& mu) {
  return {{"space_label", mu.space().label()}, {"weights", vec(mu.weights())}};
}

Measure measure_from_json(const json& j, const DiscreteSpace& space) {
  if (j.contains("space_label") && j["space_label"].get<std::string>() != space.label())
    throw InvalidArgument("measure belongs to space \"" + j["space_label"].get<std::string>() + "\", not \"" +
                          space.label() + "\"");
  auto w = to_vec(field(j, "weights"), "weights");
  if (w.size() != static_cast<Eigen::Index>(space.size()))
    throw InvalidArgument("measure has " + std::to_string(w.size()) + " weights for " +
                          std::to_string(space.size()) + " points");
  if (std::abs(w.sum() - 1.0) <= 1e-12 && w.minCoeff() >= 0.0) return Measure(space, w);
  return make_measure(space, w);
}

json good_params_to_json(const GoodMeasureParams& p) {
  return {{"m_lower", p.m_lower},
          {"M_upper", p.M_upper},
          {"john_eta", p.john_eta},
          {"perimeter_bound", p.perimeter_bound},
          {"alpha", p.alpha}};
}

GoodMeasureParams good_params_from_json(const json& j) {
  GoodMeasureParams p;
  p.m_lower = j.value("m_lower", p.m_lower);
  p.M_upper = j.value("M_upper", p.M_upper);
  p.john_eta = j.value("john_eta", p.john_eta);
  p.perimeter_bound = j.value("perimeter_bound", p.perimeter_bound);
  p.alpha = j.value("alpha", p.alpha);
  p.validate();
  return p;
}

json law_to_json(const SecondOrderLaw& P) {
  json atoms = json::array();
  for (const auto& a : P.atoms()) {
    json e{{"weight", a.weight}, {"weights", vec(a.measure.weights())}};
    if (a.good) e["good"] = good_params_to_json(*a.good);
    atoms.push_back(e);
  }
  return {{"space_label", P.space().label()}, {"atoms", atoms}};
}

SecondOrderLaw law_from_json(const json& j, const DiscreteSpace& space) {
  const auto& arr = field(j, "atoms");
  if (!arr.is_array() || arr.empty()) throw InvalidArgument("law needs a nonempty atoms array");
  std::vector<LawAtom> atoms;
  for (const auto& a : arr) {
    LawAtom atom{measure_from_json(a, space), field(a, "weight").get<double>(), std::nullopt};
    if (a.contains("good")) atom.good = good_params_from_json(a["good"]);
    atoms.push_back(std::move(atom));
  }
  return SecondOrderLaw(std::move(atoms));
}

json w2_to_json(const W2Result& r) {
  json coupling = json::array();
  for (const auto& e : r.plan.entries) coupling.push_back({e.x, e.y, e.mass});
  json j = potentials(r.potentials);
  j["value"] = r.value;
  j["w2"] = r.w2;
  j["gap"] = r.gap;
  j["iterations"] = r.iterations;
  j["coupling"] = coupling;
  return j;
}

W2Result w2_from_json(const json& j) {
  W2Result r;
  r.value = field(j, "value").get<double>();
  r.w2 = field(j, "w2").get<double>();
  r.gap = j.value("gap", 0.0);
  r.iterations = j.value("iterations", std::size_t{0});
  r.potentials.phi = to_vec(field(j, "phi"), "phi");
  r.potentials.psi = to_vec(field(j, "psi"), "psi");
  r.potentials.tag = normalization_from_string(j.value("normalization", std::string("none")));
  for (const auto& e : field(j, "coupling")) {
    r.plan.entries.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(), e.at(2).get<double>()});
  }
  r.plan.total_cost = r.value;
  return r;
}

json heat_kernel_to_json(const HeatKernel& k) {
  return {{"t", k.t},
          {"bandwidth", k.bandwidth},
          {"knn", k.knn},
          {"n", k.kernel.rows()},
          {"space_label", k.space.label()},
          {"kernel", row_major(k.kernel)}};
}

json heat_semigroup_to_json(const HeatSemigroup& h) {
  return {{"space_fingerprint", h.space().fingerprint()},
          {"bandwidth", h.bandwidth()},
          {"knn", h.knn()},
          {"n", h.space().size()},
          {"weights", row_major(h.weights())},
          {"eigenvalues", vec(h.eigenvalues())},
          {"eigenvectors", row_major(h.eigenvectors())}};
}

HeatSemigroup heat_semigroup_from_json(const json& j, const DiscreteSpace& space) {
  if (field(j, "space_fingerprint").get<std::uint64_t>() != space.fingerprint())
    throw InvalidArgument("cached heat factorization belongs to a different space");
  const auto n = static_cast<Eigen::Index>(space.size());
  auto evals = to_vec(field(j, "eigenvalues"), "eigenvalues");
  if (evals.size() != n) throw InvalidArgument("cached eigenvalue count does not match the space");
  return HeatSemigroup(space, field(j, "bandwidth").get<double>(), field(j, "knn").get<std::size_t>(),
                       from_row_major(field(j, "weights"), n, n, "weights"), std::move(evals),
                       from_row_major(field(j, "eigenvectors"), n, n, "eigenvectors"));
}

json barycenter_to_json(const BarycenterResult& r) {
  json per = json::array();
  for (std::size_t i = 0; i < r.per_atom_potentials.size(); ++i) {
    json e = potentials(r.per_atom_potentials[i]);
    e["gap"] = i < r.per_atom_gaps.size() ? r.per_atom_gaps[i] : 0.0;
    per.push_back(e);
  }
  return {{"weights", vec(r.measure.weights())},
          {"space_label", r.measure.space().label()},
          {"variance", r.variance_value},
          {"per_atom", per},
          {"flags", {{"non_unique", r.non_unique}, {"solver_status", r.solver_status}}},
          {"iterations", r.iterations}};
}

json balance_to_json(const BalanceResult& r) {
  json per = json::array();
  for (std::size_t i = 0; i < r.potentials.size(); ++i) {
    json e = potentials(r.potentials[i]);
    e["gap"] = i < r.gaps.size() ? r.gaps[i] : 0.0;
    per.push_back(e);
  }
  return {{"residual", r.residual}, {"iterations", r.iterations}, {"residual_trace", r.residual_trace}, {"per_atom", per}};
}

json net_to_json(const NetResult& r, bool with_measures) {
  json j{{"epsilon", r.epsilon},
         {"r", r.r},
         {"delta", r.delta},
         {"m", r.m},
         {"lattice_K", r.lattice_K},
         {"cardinality", r.cardinality},
         {"log_cardinality", std::log(static_cast<double>(r.cardinality))},
         {"centers", r.centers},
         {"verification",
          {{"probes", r.probes},
           {"max_distance", r.max_probe_distance},
           {"mean_distance", r.mean_probe_distance},
           {"verified", r.verified}}}};
  if (with_measures) {
    json net = json::array();
    for (const auto& m : r.net) net.push_back(vec(m.weights()));
    j["net"] = net;
    j["net_stored"] = !r.net.empty();
  }
  return j;
}

}  // namespace barylab
