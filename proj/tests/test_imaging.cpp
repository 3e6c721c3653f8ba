#include "doctest.h"
#include "test_helpers.hpp"

#include <cstdio>
#include <fstream>

using namespace nnq;

namespace {

MatrixX<double> dense_blur(const BlurOperator<double>& op) { return MatrixX<double>(op.matrix); }

}  // namespace

TEST_CASE("pixel ids are 1-based row-major") {
  ImageGeometry geom{3, 4};
  CHECK(pixel_index(1, 1, geom) == 1);
  CHECK(pixel_index(1, 4, geom) == 4);
  CHECK(pixel_index(2, 1, geom) == 5);
  CHECK(pixel_index(3, 4, geom) == 12);
  for (Index id = 1; id <= 12; ++id) {
    const auto [a, b] = pixel_coords(id, geom);
    CHECK(pixel_index(a, b, geom) == id);
  }
  CHECK_THROWS(pixel_index(0, 1, geom));
  CHECK_THROWS(pixel_index(1, 5, geom));
}

TEST_CASE("psf stencil support sizes") {
  ImageGeometry geom{8, 8};
  CHECK(build_outoffocus_psf<double>(1.0, geom).stencil.size() == 5);
  CHECK(build_outoffocus_psf<double>(2.0, geom).stencil.size() == 13);
  CHECK(build_turbulence_psf<double>(1.0, geom).stencil.size() == 9);
  CHECK(build_turbulence_psf<double>(2.0, geom).stencil.size() == 25);
  CHECK(build_turbulence_psf<double>(1.5, geom).stencil.size() == 25);  // half-width ⌈1.5⌉ = 2
  CHECK_THROWS(build_turbulence_psf<double>(0.5, geom));
  CHECK_THROWS(build_outoffocus_psf<double>(0.5, geom));
}

TEST_CASE("every blur row sums to one, folding included") {
  for (auto geom : {ImageGeometry{8, 8}, ImageGeometry{3, 3}, ImageGeometry{5, 7}}) {
    for (double sigma : {1.0, 1.5, 2.0, 3.0}) {
      const BlurOperator<double> op = build_turbulence_psf<double>(sigma, geom);
      const VectorX<double> sums = op.matrix * VectorX<double>::Ones(op.matrix.cols());
      CHECK((sums.array() - 1).abs().maxCoeff() < 1e-12);
    }
    for (double radius : {1.0, 2.0}) {
      const BlurOperator<double> op = build_outoffocus_psf<double>(radius, geom);
      const VectorX<double> sums = op.matrix * VectorX<double>::Ones(op.matrix.cols());
      CHECK((sums.array() - 1).abs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("interior turbulence row reproduces the closed-form stamp") {
  ImageGeometry geom{7, 7};
  const BlurOperator<double> op = build_turbulence_psf<double>(1.0, geom);
  const MatrixX<double> M = dense_blur(op);

  double total = 0;
  for (Index s = -1; s <= 1; ++s)
    for (Index t = -1; t <= 1; ++t) total += std::exp(-(s * s + t * t) / 2.0);
  const Index row = pixel_index(4, 4, geom) - 1;
  for (Index s = -1; s <= 1; ++s)
    for (Index t = -1; t <= 1; ++t) {
      const Index col = pixel_index(4 + s, 4 + t, geom) - 1;
      const double expect = std::exp(-(s * s + t * t) / 2.0) / total;
      CHECK(std::abs(M(row, col) - expect) < 1e-14);
    }
  // nothing outside the 3×3 stamp
  CHECK(M.row(row).sum() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(M(row, pixel_index(1, 1, geom) - 1) == 0);
}

TEST_CASE("boundary rows fold clamped weight onto edge pixels") {
  ImageGeometry geom{4, 4};
  const BlurOperator<double> op = build_turbulence_psf<double>(1.0, geom);
  const MatrixX<double> M = dense_blur(op);
  const Index corner = pixel_index(1, 1, geom) - 1;

  // fold the stencil by hand for pixel (1,1)
  MatrixX<double> expect = MatrixX<double>::Zero(4, 4);
  for (const auto& e : op.stencil) {
    const Index a = std::clamp<Index>(1 + e.ds, 1, 4);
    const Index b = std::clamp<Index>(1 + e.dt, 1, 4);
    expect(a - 1, b - 1) += e.weight;
  }
  for (Index a = 0; a < 4; ++a)
    for (Index b = 0; b < 4; ++b)
      CHECK(M(corner, pixel_index(a + 1, b + 1, geom) - 1) ==
            doctest::Approx(expect(a, b)).epsilon(1e-14));
}

TEST_CASE("blurring a constant image is the identity") {
  ImageGeometry geom{6, 5};
  ImageGrid<double> flat{6, 5, MatrixX<double>::Constant(6, 5, 99.0)};
  const ImageGrid<double> out = blur(build_turbulence_psf<double>(2.0, geom), flat);
  CHECK((out.intensities.array() - 99.0).abs().maxCoeff() < 1e-10);
}

TEST_CASE("nnls formation matches the naive products") {
  ImageGeometry geom{4, 4};
  const BlurOperator<double> op = build_turbulence_psf<double>(1.0, geom);
  ImageGrid<double> img = synthetic_sparse_image<double>(4, 4, 0.3, 17);
  const ImageGrid<double> observed = blur(op, img);

  Problem<double> p = build_nnls(op, observed);
  const MatrixX<double> A = dense_blur(op);
  const VectorX<double> b = vectorize(observed);
  CHECK((MatrixX<double>(p.gram.sparse()) - A.transpose() * A).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK((p.linear + 2 * A.transpose() * b).lpNorm<Eigen::Infinity>() < 1e-12);
  CHECK(p.objective_offset == doctest::Approx(b.squaredNorm()));
  // offset makes the reported objective the residual norm: at x = truth the
  // total is ≈ 0
  CHECK(objective(p, vectorize(img)) + p.objective_offset ==
        doctest::Approx((A * vectorize(img) - b).squaredNorm()).epsilon(1e-10));
}

TEST_CASE("deblur free set tracks the most negative linear entries") {
  ImageGeometry geom{6, 6};
  const BlurOperator<double> op = build_turbulence_psf<double>(1.0, geom);
  ImageGrid<double> img = synthetic_sparse_image<double>(6, 6, 0.2, 23);
  Problem<double> p = build_nnls(op, blur(op, img));

  const Index tau = 1;
  IndexList active = init_deblur(p, tau, 0, 0);
  IndexList free = complement_sorted(active, p.dim);
  // sort oracle: the min(20τ, ν) smallest entries of a
  std::vector<std::pair<double, Index>> order;
  for (Index i = 0; i < p.dim; ++i) order.emplace_back(p.linear[i], i);
  std::sort(order.begin(), order.end());
  IndexList expect;
  for (Index k = 0; k < std::min<Index>(20 * tau, p.dim); ++k)
    expect.push_back(order[k].second);
  std::sort(expect.begin(), expect.end());
  CHECK(free == expect);
}

TEST_CASE("deblur initializer falls back to random sampling on a black image") {
  ImageGeometry geom{5, 5};
  const BlurOperator<double> op = build_turbulence_psf<double>(1.0, geom);
  ImageGrid<double> black{5, 5, MatrixX<double>::Zero(5, 5)};
  Problem<double> p = build_nnls(op, black);  // a = 0 → no strict negatives
  IndexList active = init_deblur(p, 2, 4, 11);
  CHECK(complement_sorted(active, p.dim).size() == 4);  // β0 = 4 sampled
  CHECK(init_deblur(p, 2, 4, 11) == active);
  // 20τ ≥ ν frees everything when negatives do exist
  ImageGrid<double> lit{5, 5, MatrixX<double>::Constant(5, 5, 50.0)};
  Problem<double> q = build_nnls(op, lit);
  CHECK(init_deblur(q, 2, 0, 0).empty());
}

TEST_CASE("sparsify zeroes dim pixels only") {
  ImageGrid<double> img{2, 2, MatrixX<double>(2, 2)};
  img.intensities << 0, 3, 10, 200;
  sparsify(img, 5.0);
  CHECK(img.intensities(0, 0) == 0);
  CHECK(img.intensities(0, 1) == 0);
  CHECK(img.intensities(1, 0) == 10);
  CHECK(img.intensities(1, 1) == 200);
}

TEST_CASE("relative mse") {
  ImageGrid<double> a{1, 2, MatrixX<double>(1, 2)};
  ImageGrid<double> b{1, 2, MatrixX<double>(1, 2)};
  a.intensities << 3, 4;
  b.intensities << 3, 4;
  CHECK(relative_mse(a, b) == 0);
  a.intensities << 4, 4;
  CHECK(relative_mse(a, b) == doctest::Approx(1.0 / 25));
}

TEST_CASE("pgm binary round trip is exact for integer images") {
  ImageGrid<double> img = synthetic_sparse_image<double>(9, 6, 0.25, 31);
  img.intensities = img.intensities.array().round();
  const std::string path = "pgm_roundtrip_test.pgm";
  write_pgm(path, img);
  const ImageGrid<double> back = read_pgm<double>(path);
  CHECK(back.rows == 9);
  CHECK(back.cols == 6);
  CHECK((back.intensities - img.intensities).lpNorm<Eigen::Infinity>() == 0);
  std::remove(path.c_str());
}

TEST_CASE("ascii pgm reader handles comments and whitespace") {
  const std::string path = "pgm_ascii_test.pgm";
  {
    std::ofstream f(path);
    f << "P2\n# a comment line\n3 2\n# another\n255\n0 10 20\n30 40 250\n";
  }
  const ImageGrid<double> img = read_pgm<double>(path);
  CHECK(img.rows == 2);
  CHECK(img.cols == 3);
  CHECK(img.intensities(0, 0) == 0);
  CHECK(img.intensities(0, 2) == 20);
  CHECK(img.intensities(1, 2) == 250);
  std::remove(path.c_str());

  {
    std::ofstream f(path);
    f << "P3\n1 1\n255\n0\n";  // wrong magic
  }
  CHECK_THROWS(read_pgm<double>(path));
  std::remove(path.c_str());
}

TEST_CASE("synthetic images are seeded and respect the brightness fraction") {
  ImageGrid<double> a = synthetic_sparse_image<double>(10, 10, 0.15, 41);
  ImageGrid<double> b = synthetic_sparse_image<double>(10, 10, 0.15, 41);
  CHECK(a.intensities.isApprox(b.intensities));
  const Index lit = (a.intensities.array() > 0).count();
  CHECK(lit == 15);
  CHECK(a.intensities.maxCoeff() <= 255);
}
