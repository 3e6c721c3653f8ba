#pragma once

#include "nnq/types.hpp"

#include <cctype>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>

namespace nnq {

// n points in R^d, one per row. PD instances carry their q-side in `second`.
template <typename Scalar>
struct PointCloud {
  MatrixX<Scalar> points;
  std::optional<MatrixX<Scalar>> second;

  Index size() const { return points.rows(); }
  Index dim() const { return points.cols(); }
};

enum class CloudKind { unit_cube, near_sphere, shifted_cubes };

inline std::optional<CloudKind> parse_cloud_kind(const std::string& s) {
  if (s == "unit-cube") return CloudKind::unit_cube;
  if (s == "near-sphere") return CloudKind::near_sphere;
  if (s == "shifted-cubes") return CloudKind::shifted_cubes;
  return std::nullopt;
}

// Seeded synthetic clouds for the three experimental regimes:
//  unit-cube     — n uniform points in [0,1]^d
//  near-sphere   — unit directions scaled by (1+ε), ε uniform in [−1e-4, 1e-4]
//  shifted-cubes — two [−1,1]^d cubes (⌊n/2⌋ / ⌈n/2⌉ points), the second slid
//                  along the first axis so the cubes are at distance s
template <typename Scalar>
PointCloud<Scalar> generate_cloud(CloudKind kind, Index n, Index d, Scalar shift, std::uint64_t seed) {
  require(n >= 1 && d >= 1, "generate_cloud: need n, d >= 1");
  std::mt19937_64 rng(seed);
  PointCloud<Scalar> cloud;
  switch (kind) {
    case CloudKind::unit_cube: {
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      cloud.points.resize(n, d);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < d; ++j) cloud.points(i, j) = Scalar(unit(rng));
      break;
    }
    case CloudKind::near_sphere: {
      std::normal_distribution<double> gauss(0.0, 1.0);
      std::uniform_real_distribution<double> eps(-1e-4, 1e-4);
      cloud.points.resize(n, d);
      for (Index i = 0; i < n; ++i) {
        VectorX<Scalar> p(d);
        do {
          for (Index j = 0; j < d; ++j) p[j] = Scalar(gauss(rng));
        } while (p.norm() == Scalar(0));
        cloud.points.row(i) = (p * (Scalar(1) + Scalar(eps(rng))) / p.norm()).transpose();
      }
      break;
    }
    case CloudKind::shifted_cubes: {
      std::uniform_real_distribution<double> cube(-1.0, 1.0);
      const Index m = n / 2, k = n - m;
      require(m >= 1, "generate_cloud: shifted-cubes needs n >= 2");
      cloud.points.resize(m, d);
      MatrixX<Scalar> q(k, d);
      for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < d; ++j) cloud.points(i, j) = Scalar(cube(rng));
      for (Index i = 0; i < k; ++i)
        for (Index j = 0; j < d; ++j) q(i, j) = Scalar(cube(rng));
      // first cube spans [−1,1] on axis 0; slide the second to [1+s, 3+s]
      q.col(0).array() += Scalar(2) + shift;
      cloud.second = std::move(q);
      break;
    }
  }
  return cloud;
}

// One point per line, comma-separated coordinates; an optional non-numeric
// first line is treated as a header and skipped.
template <typename Scalar>
MatrixX<Scalar> read_cloud_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), "read_cloud_csv: cannot open " + path);
  std::vector<std::vector<Scalar>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<Scalar> row;
    std::stringstream ss(line);
    std::string tok;
    bool numeric = true;
    while (std::getline(ss, tok, ',')) {
      try {
        std::size_t used = 0;
        const double val = std::stod(tok, &used);
        while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
        if (used != tok.size()) throw std::invalid_argument(tok);
        row.push_back(Scalar(val));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      require(first, "read_cloud_csv: non-numeric row in " + path);
      first = false;
      continue;  // header
    }
    first = false;
    if (!rows.empty()) require(row.size() == rows.front().size(), "read_cloud_csv: ragged rows");
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), "read_cloud_csv: no data rows in " + path);
  MatrixX<Scalar> out(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j) out(i, j) = rows[i][j];
  return out;
}

template <typename Scalar>
void write_cloud_csv(const std::string& path, const MatrixX<Scalar>& points) {
  std::ofstream out(path);
  require(out.good(), "write_cloud_csv: cannot open " + path);
  out.precision(17);
  for (Index i = 0; i < points.rows(); ++i) {
    for (Index j = 0; j < points.cols(); ++j) {
      if (j) out << ',';
      out << points(i, j);
    }
    out << '\n';
  }
}

}  // namespace nnq
