#include "barylab/nets.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "barylab/error.hpp"
#include "barylab/parallel.hpp"
#include "barylab/rng.hpp"
#include "barylab/transport.hpp"

namespace barylab {

std::vector<std::size_t> farthest_point_net(const DiscreteSpace& space, double r) {
  if (!(r > 0.0)) throw InvalidArgument("net radius must be positive");
  const auto n = static_cast<Eigen::Index>(space.size());
  const auto& d = space.dist();
  std::vector<std::size_t> net{0};
  Eigen::VectorXd gap = d.row(0).transpose();
  for (;;) {
    Eigen::Index far = 0;
    double worst = gap.maxCoeff(&far);
    if (worst <= r) break;
    net.push_back(static_cast<std::size_t>(far));
    for (Eigen::Index i = 0; i < n; ++i) gap[i] = std::min(gap[i], d(far, i));
  }
  return net;
}

std::uint64_t composition_count(std::size_t K, std::size_t m) {
  if (m == 0) return 0;
  // C(K + m - 1, m - 1) by the multiplicative formula.
  const std::uint64_t top = K + m - 1;
  const std::uint64_t k = std::min<std::uint64_t>(m - 1, K);
  long double acc = 1.0L;
  std::uint64_t exact = 1;
  bool overflow = false;
  for (std::uint64_t i = 1; i <= k; ++i) {
    acc = acc * static_cast<long double>(top - k + i) / static_cast<long double>(i);
    if (acc > static_cast<long double>(std::numeric_limits<std::uint64_t>::max() / 2)) overflow = true;
    if (!overflow) {
      const std::uint64_t g = std::gcd(exact, i);
      exact = (exact / g) * ((top - k + i) / (i / g));
    }
  }
  return overflow ? std::numeric_limits<std::uint64_t>::max() : exact;
}

namespace {

std::size_t lattice_size(std::size_t m, double delta) {
  if (m == 0) throw InvalidArgument("simplex dimension must be positive");
  if (!(delta > 0.0)) throw InvalidArgument("simplex net delta must be positive");
  return static_cast<std::size_t>(std::ceil(static_cast<double>(m) / delta - 1e-12));
}

}  // namespace

std::vector<Eigen::VectorXd> simplex_net(std::size_t m, double delta, std::uint64_t cap) {
  const std::size_t K = std::max<std::size_t>(1, lattice_size(m, delta));
  const auto count = composition_count(K, m);
  if (count > cap)
    throw CapExceeded("simplex net of dimension " + std::to_string(m) + " at delta " + std::to_string(delta) +
                      " needs " + std::to_string(count) + " vectors, cap is " + std::to_string(cap));
  std::vector<Eigen::VectorXd> out;
  out.reserve(static_cast<std::size_t>(count));
  std::vector<std::size_t> k(m, 0);
  k[0] = K;
  // Lexicographically decreasing compositions.
  for (;;) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) v[static_cast<Eigen::Index>(i)] = static_cast<double>(k[i]) / static_cast<double>(K);
    out.push_back(std::move(v));
    if (m == 1) break;
    std::size_t j = m - 1;
    while (j-- > 0)
      if (k[j] > 0) break;
    if (j == static_cast<std::size_t>(-1)) break;
    const std::size_t rest = k[m - 1];
    k[m - 1] = 0;
    --k[j];
    k[j + 1] = rest + 1;
  }
  return out;
}

Eigen::VectorXd round_to_lattice(const Eigen::VectorXd& p, std::size_t K) {
  const auto m = p.size();
  Eigen::VectorXd out(m);
  std::vector<std::pair<double, Eigen::Index>> rem;
  long assigned = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    double scaled = p[i] * static_cast<double>(K);
    double f = std::floor(scaled);
    out[i] = f;
    assigned += static_cast<long>(f);
    rem.emplace_back(scaled - f, i);
  }
  std::stable_sort(rem.begin(), rem.end(), [](auto& a, auto& b) { return a.first > b.first; });
  long missing = static_cast<long>(K) - assigned;
  for (long i = 0; i < missing && i < static_cast<long>(rem.size()); ++i) out[rem[static_cast<std::size_t>(i)].second] += 1.0;
  return out / static_cast<double>(K);
}

NetResult wasserstein_net(const DiscreteSpace& space, const NetParams& params, const Executor* exec) {
  const double eps = params.epsilon;
  if (!(eps > 0.0)) throw InvalidArgument("net epsilon must be positive");
  const auto n = static_cast<Eigen::Index>(space.size());
  NetResult res;
  res.epsilon = eps;
  const double D = space.diameter();

  if (eps >= space.wasserstein_diameter()) {
    res.r = eps / 2;
    res.m = 1;
    res.lattice_K = 1;
    res.centers = {0};
    res.cardinality = 1;
    res.net.push_back(dirac(space, 0));
  } else {
    res.r = eps / 2;
    res.delta = eps * eps / (2.0 * D * D);
    res.centers = farthest_point_net(space, res.r);
    res.m = res.centers.size();
    res.lattice_K = std::max<std::size_t>(1, lattice_size(res.m, res.delta));
    res.cardinality = composition_count(res.lattice_K, res.m);
    if (res.cardinality > params.cap)
      throw CapExceeded("net cardinality " + std::to_string(res.cardinality) + " exceeds the cap " +
                        std::to_string(params.cap) + " (epsilon " + std::to_string(eps) + ", m " +
                        std::to_string(res.m) + ", K " + std::to_string(res.lattice_K) + ")");
    if (res.cardinality <= 100'000) {
      for (const auto& w : simplex_net(res.m, res.delta, params.cap)) {
        Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
        for (std::size_t j = 0; j < res.m; ++j) full[static_cast<Eigen::Index>(res.centers[j])] += w[static_cast<Eigen::Index>(j)];
        res.net.push_back(make_measure(space, full));
      }
    }
  }

  // Nearest center for every point (lowest index on ties).
  std::vector<std::size_t> owner(static_cast<std::size_t>(n));
  for (Eigen::Index x = 0; x < n; ++x) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < res.centers.size(); ++j)
      if (space.dist()(x, static_cast<Eigen::Index>(res.centers[j])) <
          space.dist()(x, static_cast<Eigen::Index>(res.centers[best])))
        best = j;
    owner[static_cast<std::size_t>(x)] = best;
  }

  res.probes = params.probes;
  std::vector<double> dist(params.probes, 0.0);
  auto body = [&](std::size_t i) {
    Rng rng = Rng::split(params.seed, i);
    auto w = rng.dirichlet(static_cast<std::size_t>(n));
    auto probe = make_measure(space, std::span<const double>(w));
    Eigen::VectorXd q = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(res.m));
    for (Eigen::Index x = 0; x < n; ++x) q[static_cast<Eigen::Index>(owner[static_cast<std::size_t>(x)])] += probe.weights()[x];
    Eigen::VectorXd k = round_to_lattice(q, res.lattice_K);
    Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
    for (std::size_t j = 0; j < res.m; ++j) full[static_cast<Eigen::Index>(res.centers[j])] += k[static_cast<Eigen::Index>(j)];
    dist[i] = w2_distance(probe, make_measure(space, full));
  };
  if (exec)
    exec->parallel_for(params.probes, body);
  else
    for (std::size_t i = 0; i < params.probes; ++i) body(i);
  if (!dist.empty()) {
    res.max_probe_distance = *std::max_element(dist.begin(), dist.end());
    res.mean_probe_distance = std::accumulate(dist.begin(), dist.end(), 0.0) / static_cast<double>(dist.size());
  }
  res.verified = res.max_probe_distance <= eps;
  return res;
}

double fit_entropy_constant(const std::vector<double>& eps, const std::vector<double>& log_card, int n) {
  if (eps.size() != log_card.size() || eps.empty()) throw InvalidArgument("entropy fit needs matching, nonempty inputs");
  double C = 0.0;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double e = eps[i];
    auto bound = [&](double c) { return c * std::pow(e, -n) * std::log(c / e); };
    double lo = e, hi = 2.0 * e;
    while (bound(hi) < log_card[i]) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
      double mid = 0.5 * (lo + hi);
      (bound(mid) >= log_card[i] ? hi : lo) = mid;
    }
    C = std::max(C, hi);
  }
  return C;
}

}  // namespace barylab
