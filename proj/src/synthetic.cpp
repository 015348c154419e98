#include "adsgd/synthetic.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "adsgd/errors.hpp"

namespace adsgd {

SyntheticInstance generate_synthetic(const SyntheticParams& p) {
  if (p.n < 1 || p.d < 1) throw InvalidArgument("synthetic: n and d must be positive");
  if (!(p.density > 0.0 && p.density <= 1.0)) throw InvalidArgument("synthetic: density must lie in (0, 1]");
  if (p.noise < 0.0) throw InvalidArgument("synthetic: noise must be nonnegative");
  if (p.support < 0 || p.support > p.d) throw InvalidArgument("synthetic: support must lie in [0, d]");
  if (p.orthonormal && p.n < p.d) throw InvalidArgument("synthetic: orthonormal design needs n >= d");

  std::mt19937_64 gen(p.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Entry> entries;
  if (p.orthonormal) {
    Eigen::MatrixXd G(p.n, p.d);
    for (Index j = 0; j < p.d; ++j)
      for (Index i = 0; i < p.n; ++i) G(i, j) = normal(gen);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(p.n, p.d);
    const double scale = std::sqrt(static_cast<double>(p.n));
    entries.reserve(static_cast<std::size_t>(p.n * p.d));
    for (Index i = 0; i < p.n; ++i)
      for (Index j = 0; j < p.d; ++j) entries.push_back({i, j, scale * Q(i, j)});
  } else {
    for (Index i = 0; i < p.n; ++i)
      for (Index j = 0; j < p.d; ++j) {
        if (p.density < 1.0 && unit(gen) >= p.density) continue;
        entries.push_back({i, j, normal(gen)});
      }
    if (entries.empty()) throw DegenerateProblem("synthetic: design came out all zero; raise density");
  }

  std::vector<Index> coords(static_cast<std::size_t>(p.d));
  std::iota(coords.begin(), coords.end(), Index{0});
  std::shuffle(coords.begin(), coords.end(), gen);
  Vector planted = Vector::Zero(p.d);
  for (Index k = 0; k < p.support; ++k) {
    const double magnitude = 1.0 + std::abs(normal(gen));
    planted[coords[static_cast<std::size_t>(k)]] = unit(gen) < 0.5 ? -magnitude : magnitude;
  }

  Vector z = Vector::Zero(p.n);
  for (const Entry& e : entries) z[e.row] += e.value * planted[e.col];
  Vector y(p.n);
  for (Index i = 0; i < p.n; ++i) {
    if (p.model == LossKind::SquaredError) {
      y[i] = z[i] + p.noise * normal(gen);
    } else {
      const double prob = 1.0 / (1.0 + std::exp(-z[i]));
      y[i] = unit(gen) < prob ? 1.0 : 0.0;
    }
  }
  return {std::make_shared<const Dataset>(p.n, p.d, std::move(entries), std::move(y)), std::move(planted)};
}

}  // namespace adsgd
