#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <queue>
#include <sstream>

#include "barylab/error.hpp"
#include "barylab/space.hpp"

namespace barylab {

std::vector<double> dijkstra(std::size_t n,
                             const std::vector<std::vector<std::pair<std::size_t, double>>>& adj,
                             std::size_t source) {
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[source] = 0.0;
  pq.emplace(0.0, source);
  while (!pq.empty()) {
    auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[u]) continue;
    for (auto [v, w] : adj[u]) {
      double nd = d + w;
      if (nd < dist[v]) {
        dist[v] = nd;
        pq.emplace(nd, v);
      }
    }
  }
  return dist;
}

Eigen::MatrixXd shortest_path_distances(std::size_t n, const std::vector<WeightedEdge>& edges) {
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
  for (const auto& e : edges) {
    if (e.a >= n || e.b >= n) throw InvalidArgument("edge endpoint out of range");
    if (!(e.length >= 0.0)) throw InvalidArgument("edge lengths must be nonnegative");
    adj[e.a].emplace_back(e.b, e.length);
    adj[e.b].emplace_back(e.a, e.length);
  }
  const auto N = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd d(N, N);
  for (std::size_t s = 0; s < n; ++s) {
    auto row = dijkstra(n, adj, s);
    for (std::size_t t = 0; t < n; ++t) {
      if (!std::isfinite(row[t])) {
        std::size_t reached = 0;
        for (double x : row) reached += std::isfinite(x) ? 1 : 0;
        throw InvalidArgument("graph is disconnected: component of vertex " + std::to_string(s) +
                              " has " + std::to_string(reached) + " of " + std::to_string(n) +
                              " vertices");
      }
      d(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) = row[t];
    }
  }
  // Symmetrize away accumulation-order roundoff.
  return 0.5 * (d + d.transpose());
}

DiscreteSpace build_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open mesh file '" + path + "'");
  SpaceData s;
  s.kind = SpaceKind::mesh;
  s.dim_n = 2;
  s.label = path;
  std::vector<std::array<double, 3>> verts;
  std::vector<int> vert_dims;
  std::vector<WeightedEdge> edges;
  std::vector<bool> edge_has_length;
  std::vector<std::array<std::size_t, 3>> faces;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& what) {
    throw InvalidArgument("mesh file '" + path + "' line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag)) continue;
    if (tag == "label") {
      ls >> s.label;
    } else if (tag == "dim") {
      if (!(ls >> s.dim_n) || s.dim_n < 1) fail("bad dim");
    } else if (tag == "curv") {
      if (!(ls >> s.curv_k)) fail("bad curv");
    } else if (tag == "v") {
      std::array<double, 3> p{0, 0, 0};
      int k = 0;
      double x;
      while (k < 3 && ls >> x) p[static_cast<std::size_t>(k++)] = x;
      if (k == 0) fail("vertex without coordinates");
      verts.push_back(p);
      vert_dims.push_back(k);
    } else if (tag == "e") {
      long long a, b;
      if (!(ls >> a >> b)) fail("edge needs two vertex indices");
      if (a < 0 || b < 0) fail("negative vertex index");
      double len = 0.0;
      bool has = static_cast<bool>(ls >> len);
      if (has && !(len > 0.0)) fail("edge length must be positive");
      edges.push_back({static_cast<std::size_t>(a), static_cast<std::size_t>(b), len});
      edge_has_length.push_back(has);
    } else if (tag == "f") {
      long long a, b, c;
      if (!(ls >> a >> b >> c)) fail("face needs three vertex indices");
      if (a < 0 || b < 0 || c < 0) fail("negative vertex index");
      faces.push_back({static_cast<std::size_t>(a), static_cast<std::size_t>(b), static_cast<std::size_t>(c)});
    } else {
      fail("unknown record '" + tag + "'");
    }
  }
  const std::size_t n = verts.size();
  if (n < 2) throw InvalidArgument("mesh file '" + path + "' needs at least two vertices");
  auto euclid = [&](std::size_t a, std::size_t b) {
    double sq = 0;
    for (int k = 0; k < 3; ++k) {
      double d = verts[a][static_cast<std::size_t>(k)] - verts[b][static_cast<std::size_t>(k)];
      sq += d * d;
    }
    return std::sqrt(sq);
  };
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (edges[i].a >= n || edges[i].b >= n) {
      lineno = 0;
      fail("edge " + std::to_string(i) + " references a missing vertex");
    }
    if (!edge_has_length[i]) edges[i].length = euclid(edges[i].a, edges[i].b);
  }
  for (const auto& f : faces) {
    for (auto v : f)
      if (v >= n) throw InvalidArgument("mesh file '" + path + "': face references a missing vertex");
    // Faces imply their edges.
    edges.push_back({f[0], f[1], euclid(f[0], f[1])});
    edges.push_back({f[1], f[2], euclid(f[1], f[2])});
    edges.push_back({f[2], f[0], euclid(f[2], f[0])});
  }
  if (edges.empty()) throw InvalidArgument("mesh file '" + path + "' has no edges");

  const auto N = static_cast<Eigen::Index>(n);
  s.dist = shortest_path_distances(n, edges);
  int cdim = 1;
  for (int k : vert_dims) cdim = std::max(cdim, k);
  s.coords.resize(N, cdim);
  for (Eigen::Index i = 0; i < N; ++i)
    for (int k = 0; k < cdim; ++k) s.coords(i, k) = verts[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
  s.ref_measure = Eigen::VectorXd::Zero(N);
  if (!faces.empty()) {
    for (const auto& f : faces) {
      Eigen::Vector3d a(verts[f[0]].data()), b(verts[f[1]].data()), c(verts[f[2]].data());
      double area = 0.5 * (b - a).cross(c - a).norm();
      for (auto v : f) s.ref_measure[static_cast<Eigen::Index>(v)] += area / 3.0;
    }
  } else {
    for (const auto& e : edges) {
      s.ref_measure[static_cast<Eigen::Index>(e.a)] += 0.5 * e.length;
      s.ref_measure[static_cast<Eigen::Index>(e.b)] += 0.5 * e.length;
    }
  }
  for (Eigen::Index i = 0; i < N; ++i)
    if (!(s.ref_measure[i] > 0.0))
      throw InvalidArgument("mesh file '" + path + "': vertex " + std::to_string(i) +
                            " has zero volume weight");
  DiscreteSpace space(std::move(s));
  require_valid(space);
  return space;
}

}  // namespace barylab
