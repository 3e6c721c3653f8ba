#pragma once

#include "nnq/problem.hpp"
#include "nnq/sampling.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <utility>

namespace nnq {

// r₀×c₀ grayscale pixel array, intensities kept as raw scalars in [0, 255]
// throughout the pipeline; quantization happens only at file write.
template <typename Scalar>
struct ImageGrid {
  Index rows = 0, cols = 0;
  MatrixX<Scalar> intensities;  // rows × cols

  Index pixel_count() const { return rows * cols; }
};

struct ImageGeometry {
  Index rows = 0, cols = 0;
};

// Linear pixel id of (a, b), both 1-based, row-major stacking.
inline Index pixel_index(Index a, Index b, const ImageGeometry& geom) {
  require(a >= 1 && a <= geom.rows && b >= 1 && b <= geom.cols, "pixel_index: out of range");
  return (a - 1) * geom.cols + b;
}

inline std::pair<Index, Index> pixel_coords(Index id, const ImageGeometry& geom) {
  require(id >= 1 && id <= geom.rows * geom.cols, "pixel_coords: out of range");
  return {(id - 1) / geom.cols + 1, (id - 1) % geom.cols + 1};
}

enum class PsfKind { turbulence, out_of_focus };

// One normalized kernel entry at offset (s, t) from the pixel.
template <typename Scalar>
struct StencilEntry {
  Index ds, dt;
  Scalar weight;
};

// Row-stochastic d×d blur matrix (d = r₀·c₀) induced by a spatially invariant
// PSF stencil; rows near the boundary fold their out-of-image weight onto the
// nearest in-image entry (coordinates clamped independently).
template <typename Scalar>
struct BlurOperator {
  SparseMatrix<Scalar> matrix;
  PsfKind psf_kind = PsfKind::turbulence;
  Scalar param = 0;  // σ or R
  ImageGeometry geometry;
  std::vector<StencilEntry<Scalar>> stencil;  // interior kernel, weights sum to 1
};

namespace detail {

template <typename Scalar>
BlurOperator<Scalar> assemble_blur(std::vector<StencilEntry<Scalar>> stencil, PsfKind kind,
                                   Scalar param, const ImageGeometry& geom) {
  require(geom.rows >= 1 && geom.cols >= 1, "assemble_blur: empty geometry");
  Scalar total = 0;
  for (const auto& e : stencil) total += e.weight;
  for (auto& e : stencil) e.weight /= total;

  const Index d = geom.rows * geom.cols;
  std::vector<Triplet<Scalar>> trip;
  trip.reserve(static_cast<std::size_t>(d) * stencil.size());
  for (Index a = 1; a <= geom.rows; ++a)
    for (Index b = 1; b <= geom.cols; ++b) {
      const Index row = pixel_index(a, b, geom) - 1;
      for (const auto& e : stencil) {
        const Index ta = std::clamp(a + e.ds, Index(1), geom.rows);
        const Index tb = std::clamp(b + e.dt, Index(1), geom.cols);
        trip.emplace_back(row, pixel_index(ta, tb, geom) - 1, e.weight);
      }
    }
  BlurOperator<Scalar> op;
  op.matrix.resize(d, d);
  op.matrix.setFromTriplets(trip.begin(), trip.end());  // duplicates fold by summing
  op.psf_kind = kind;
  op.param = param;
  op.geometry = geom;
  op.stencil = std::move(stencil);
  return op;
}

}  // namespace detail

// Atmospheric turbulence: Gaussian weights exp(−(s²+t²)/(2σ²)) truncated to the
// (2⌈σ⌉+1)² window and normalized to sum 1. Half-integer σ keeps the exact
// Gaussian formula with window half-width ⌈σ⌉.
template <typename Scalar>
BlurOperator<Scalar> build_turbulence_psf(Scalar sigma, const ImageGeometry& geom) {
  require(sigma >= Scalar(1), "build_turbulence_psf: sigma must be >= 1");
  const Index w = static_cast<Index>(std::ceil(static_cast<double>(sigma)));
  std::vector<StencilEntry<Scalar>> stencil;
  for (Index s = -w; s <= w; ++s)
    for (Index t = -w; t <= w; ++t)
      stencil.push_back({s, t, std::exp(-Scalar(s * s + t * t) / (2 * sigma * sigma))});
  return detail::assemble_blur(std::move(stencil), PsfKind::turbulence, sigma, geom);
}

// Out-of-focus: uniform weight 1/(πR²) on the discrete disc s²+t² ≤ R²,
// normalized to sum 1 so rows conserve intensity like the turbulence kernel.
template <typename Scalar>
BlurOperator<Scalar> build_outoffocus_psf(Scalar radius, const ImageGeometry& geom) {
  require(radius >= Scalar(1), "build_outoffocus_psf: radius must be >= 1");
  const Index w = static_cast<Index>(std::ceil(static_cast<double>(radius)));
  const Scalar raw = Scalar(1) / (Scalar(EIGEN_PI) * radius * radius);
  std::vector<StencilEntry<Scalar>> stencil;
  for (Index s = -w; s <= w; ++s)
    for (Index t = -w; t <= w; ++t)
      if (Scalar(s * s + t * t) <= radius * radius) stencil.push_back({s, t, raw});
  return detail::assemble_blur(std::move(stencil), PsfKind::out_of_focus, radius, geom);
}

template <typename Scalar>
VectorX<Scalar> vectorize(const ImageGrid<Scalar>& img) {
  VectorX<Scalar> v(img.pixel_count());
  for (Index a = 0; a < img.rows; ++a)
    for (Index b = 0; b < img.cols; ++b) v[a * img.cols + b] = img.intensities(a, b);
  return v;
}

template <typename Scalar>
ImageGrid<Scalar> devectorize(const VectorX<Scalar>& v, const ImageGeometry& geom) {
  require(v.size() == geom.rows * geom.cols, "devectorize: size mismatch");
  ImageGrid<Scalar> img{geom.rows, geom.cols, MatrixX<Scalar>(geom.rows, geom.cols)};
  for (Index a = 0; a < geom.rows; ++a)
    for (Index b = 0; b < geom.cols; ++b) img.intensities(a, b) = v[a * geom.cols + b];
  return img;
}

template <typename Scalar>
ImageGrid<Scalar> blur(const BlurOperator<Scalar>& op, const ImageGrid<Scalar>& image) {
  require(image.rows == op.geometry.rows && image.cols == op.geometry.cols,
          "blur: geometry mismatch");
  return devectorize<Scalar>(op.matrix * vectorize(image), op.geometry);
}

// NNLS deblurring: minimize ‖Ax − b‖² over x ≥ 0, stored as Q = AᵀA,
// a = −2Aᵀb, with ‖b‖² as objective_offset so reports read as ‖Ax−b‖².
template <typename Scalar>
Problem<Scalar> build_nnls(const BlurOperator<Scalar>& op, const ImageGrid<Scalar>& blurred) {
  require(blurred.rows == op.geometry.rows && blurred.cols == op.geometry.cols,
          "build_nnls: geometry mismatch");
  const VectorX<Scalar> b = vectorize(blurred);
  SparseMatrix<Scalar> Q = (op.matrix.transpose() * op.matrix).pruned();
  VectorX<Scalar> a = -2 * (op.matrix.transpose() * b);
  Problem<Scalar> p = make_unconstrained(GramMatrix<Scalar>(std::move(Q)), std::move(a), Family::nnls);
  p.objective_offset = b.squaredNorm();
  return p;
}

// Free set: the min(20τ, ν) most negative entries of ∇f(0) = a, ties by lower
// index. A nearly black blurred image leaves too few negative entries to work
// with; then fall back to β0 random indices.
template <typename Scalar>
IndexList init_deblur(const Problem<Scalar>& problem, Index tau, Index beta0 = 0,
                      std::uint64_t seed = 0) {
  require(tau >= 1, "init_deblur: tau must be >= 1");
  const Index nu = problem.dim;
  Index negatives = 0;
  for (Index i = 0; i < nu; ++i)
    if (problem.linear[i] < Scalar(0)) ++negatives;
  if (negatives < std::max<Index>(tau, 1)) {
    if (beta0 <= 0) beta0 = 3 * tau;
    std::mt19937_64 rng(seed);
    return complement_sorted(sample_distinct_indices(nu, beta0, rng), nu);
  }
  std::vector<std::pair<Scalar, Index>> order(static_cast<std::size_t>(nu));
  for (Index i = 0; i < nu; ++i) order[i] = {problem.linear[i], i};
  std::sort(order.begin(), order.end());
  IndexList free;
  const Index take = std::min(20 * tau, nu);
  for (Index k = 0; k < take; ++k) free.push_back(order[k].second);
  return complement_sorted(sorted_unique(std::move(free)), nu);
}

// Σ(recovered − original)² / Σ original²
template <typename Scalar>
Scalar relative_mse(const ImageGrid<Scalar>& recovered, const ImageGrid<Scalar>& original) {
  require(recovered.rows == original.rows && recovered.cols == original.cols,
          "relative_mse: geometry mismatch");
  const Scalar num = (recovered.intensities - original.intensities).squaredNorm();
  const Scalar den = original.intensities.squaredNorm();
  if (den == Scalar(0)) return num == Scalar(0) ? Scalar(0) : std::numeric_limits<Scalar>::infinity();
  return num / den;
}

// Preprocessing: intensities ≤ threshold set to 0 (nearly black pixels to black).
template <typename Scalar>
void sparsify(ImageGrid<Scalar>& img, Scalar threshold) {
  img.intensities = (img.intensities.array() <= threshold).select(Scalar(0), img.intensities);
}

// ---- PGM I/O: P2 (ASCII) and P5 (binary), 8-bit, maxval 255 ----

namespace detail {

inline int next_pgm_token(std::istream& in) {
  // skips whitespace and '#' comments
  while (true) {
    const int c = in.peek();
    if (c == std::char_traits<char>::eof()) break;
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int value = 0;
  in >> value;
  require(in.good() || in.eof(), "pgm: malformed header token");
  return value;
}

}  // namespace detail

template <typename Scalar>
ImageGrid<Scalar> read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "read_pgm: cannot open " + path);
  std::string magic;
  in >> magic;
  require(magic == "P2" || magic == "P5", "read_pgm: unsupported magic " + magic);
  const Index cols = detail::next_pgm_token(in);
  const Index rows = detail::next_pgm_token(in);
  const int maxval = detail::next_pgm_token(in);
  require(rows >= 1 && cols >= 1, "read_pgm: bad dimensions");
  require(maxval > 0 && maxval <= 255, "read_pgm: only 8-bit images supported");

  ImageGrid<Scalar> img{rows, cols, MatrixX<Scalar>(rows, cols)};
  if (magic == "P2") {
    for (Index a = 0; a < rows; ++a)
      for (Index b = 0; b < cols; ++b) {
        int value = 0;
        in >> value;
        require(!in.fail(), "read_pgm: truncated P2 data");
        img.intensities(a, b) = Scalar(value);
      }
  } else {
    in.get();  // single whitespace after maxval
    std::vector<unsigned char> buf(static_cast<std::size_t>(rows) * cols);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    require(in.gcount() == static_cast<std::streamsize>(buf.size()), "read_pgm: truncated P5 data");
    for (Index a = 0; a < rows; ++a)
      for (Index b = 0; b < cols; ++b) img.intensities(a, b) = Scalar(buf[a * cols + b]);
  }
  return img;
}

template <typename Scalar>
void write_pgm(const std::string& path, const ImageGrid<Scalar>& img) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "write_pgm: cannot open " + path);
  out << "P5\n" << img.cols << " " << img.rows << "\n255\n";
  std::vector<unsigned char> buf(static_cast<std::size_t>(img.rows) * img.cols);
  for (Index a = 0; a < img.rows; ++a)
    for (Index b = 0; b < img.cols; ++b) {
      const Scalar v = std::round(img.intensities(a, b));
      buf[a * img.cols + b] =
          static_cast<unsigned char>(std::clamp(v, Scalar(0), Scalar(255)));
    }
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
}

// Seeded synthetic sparse test image: `fraction` of the pixels bright on a
// black background.
template <typename Scalar>
ImageGrid<Scalar> synthetic_sparse_image(Index rows, Index cols, Scalar fraction,
                                         std::uint64_t seed) {
  require(fraction > Scalar(0) && fraction <= Scalar(1), "synthetic_sparse_image: bad fraction");
  ImageGrid<Scalar> img{rows, cols, MatrixX<Scalar>::Zero(rows, cols)};
  std::mt19937_64 rng(seed);
  const Index total = rows * cols;
  const Index bright = std::max<Index>(1, static_cast<Index>(Scalar(total) * fraction));
  IndexList where = sample_distinct_indices(total, bright, rng);
  std::uniform_real_distribution<double> level(60.0, 255.0);
  for (Index id : where) img.intensities(id / cols, id % cols) = Scalar(level(rng));
  return img;
}

}  // namespace nnq
