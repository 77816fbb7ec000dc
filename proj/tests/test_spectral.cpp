#include <doctest.h>

#include <cmath>
#include <random>

#include "envelope/extension.hpp"
#include "envelope/spectral.hpp"
#include "oracles.hpp"

using namespace envelope;

namespace {

constexpr double kPi = 3.14159265358979323846;

CMatrix diag(const std::vector<complex>& v) {
  CMatrix d = CMatrix::Zero(static_cast<Eigen::Index>(v.size()), static_cast<Eigen::Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) d(k, k) = v[k];
  return d;
}

CMatrix random_complex(std::mt19937& rng, int rows, int cols) {
  std::normal_distribution<double> nd;
  CMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = complex(nd(rng), nd(rng));
  }
  return m;
}

}  // namespace

TEST_CASE("eigendecomposition of the circulant") {
  const Matrix c = adjacency(cycle_digraph(4));
  const auto sys = eigendecompose(c);
  REQUIRE(sys.values.size() == 4);
  // magnitudes tie, so ordering is by argument in (-pi, pi]
  const std::vector<complex> expect{{0.0, -1.0}, 1.0, {0.0, 1.0}, -1.0};
  for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(sys.values[k] - expect[k]) < 1e-12);

  // each column is the DFT harmonic with the same eigenvalue, up to phase
  const auto spec = cayley_spectrum(ConnectionSet{4, {1}});
  const CMatrix dft = inverse_dft(4);
  for (std::size_t k = 0; k < 4; ++k) {
    std::size_t match = 4;
    for (std::size_t j = 0; j < 4; ++j) {
      if (std::abs(spec[j] - sys.values[k]) < 1e-10) match = j;
    }
    REQUIRE(match < 4);
    const complex overlap = dft.col(match).dot(sys.vectors.col(k));
    CHECK(std::abs(overlap) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("eigendecomposition of identity and diagonal") {
  const auto id = eigendecompose(Matrix(Matrix::Identity(3, 3)));
  for (const auto& v : id.values) CHECK(std::abs(v - 1.0) < 1e-14);

  Matrix d = Matrix::Zero(3, 3);
  d.diagonal() << 1, 2, 3;
  const auto sys = eigendecompose(d);
  CHECK(std::abs(sys.values[0] - 3.0) < 1e-14);
  CHECK(std::abs(sys.values[1] - 2.0) < 1e-14);
  CHECK(std::abs(sys.values[2] - 1.0) < 1e-14);
  CMatrix perm = CMatrix::Zero(3, 3);
  perm(2, 0) = perm(1, 1) = perm(0, 2) = 1.0;
  CHECK((sys.vectors - perm).norm() < 1e-14);
}

TEST_CASE("eigendecomposition satisfies A V = V D on random digraphs") {
  std::mt19937 rng(41);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + rng() % 10;
    const Matrix a = adjacency(oracle::random_digraph(rng, n, 0.4, true));
    const auto sys = eigendecompose(a);
    const CMatrix& v = sys.vectors;
    for (Eigen::Index k = 0; k < v.cols(); ++k) {
      CHECK(v.col(k).norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
    if (is_admissible(sys) == Admissibility::admissible) {
      CHECK((a.cast<complex>() * v - v * diag(sys.values)).norm() < 1e-9 * (1.0 + a.norm()));
    }
  }
}

TEST_CASE("normalization convention") {
  CMatrix v(3, 1);
  v << complex(0.0, 2.0), complex(0.0, -1.0), 0.5;
  normalize_columns(v);
  CHECK(v.col(0).norm() == doctest::Approx(1.0));
  CHECK(std::abs(v(0, 0).imag()) < 1e-15);
  CHECK(v(0, 0).real() > 0.0);
}

TEST_CASE("admissibility verdicts") {
  CHECK(is_admissible(eigendecompose(adjacency(cycle_digraph(7)))) == Admissibility::admissible);
  CHECK(is_admissible(eigendecompose(Matrix(Matrix::Identity(3, 3)))) == Admissibility::nonsingular_only);
  CHECK(is_admissible(eigendecompose(adjacency(line_digraph(5)))) == Admissibility::singular);
  Matrix jordan(2, 2);
  jordan << 1, 1, 0, 1;
  CHECK(is_admissible(eigendecompose(jordan)) == Admissibility::defective);
  CHECK(to_string(Admissibility::nonsingular_only) == "nonsingular_only");
}

TEST_CASE("DFT matrices") {
  const CMatrix v = inverse_dft(8);
  const CMatrix f = forward_dft(8);
  CHECK((f * v - CMatrix::Identity(8, 8)).norm() < 1e-13);
  CHECK(std::abs(v(1, 1) - std::polar(1.0 / std::sqrt(8.0), 2.0 * kPi / 8.0)) < 1e-15);
  const auto s = stability_norms(f, v);
  CHECK(s.left <= 1e-13);
  CHECK(s.right <= 1e-13);
}

TEST_CASE("compatibility indices of the line-to-cycle extension") {
  Matrix q = Matrix::Zero(16, 16);
  q(15, 0) = 1.0;
  const auto idx = compatibility_indices(q, inverse_dft(16));
  CHECK(idx.big_delta == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(idx.delta == doctest::Approx(0.25).epsilon(1e-12));

  const double w = 0.01;
  const auto basis = weighted_cycle_basis(16, w);
  const auto widx = compatibility_indices(q * w, basis.inverse);
  CHECK(widx.big_delta == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(widx.delta == doctest::Approx(0.0025).epsilon(1e-12));

  const auto zero = compatibility_indices(Matrix::Zero(16, 16), basis.inverse);
  CHECK(zero.delta == 0.0);
  CHECK(zero.big_delta == 0.0);
}

TEST_CASE("compatibility indices match a direct norm computation") {
  std::mt19937 rng(8);
  for (int t = 0; t < 20; ++t) {
    const int n = 2 + static_cast<int>(rng() % 7);
    Matrix q = adjacency(oracle::random_digraph(rng, n, 0.2, true));
    const CMatrix v = random_complex(rng, n, n);
    const CMatrix qv = q.cast<complex>() * v;
    double delta = 0.0;
    for (int k = 0; k < n; ++k) delta = std::max(delta, qv.col(k).norm());
    Eigen::JacobiSVD<CMatrix> svd(qv);
    const auto idx = compatibility_indices(q, v);
    CHECK(idx.delta == doctest::Approx(delta).epsilon(1e-12));
    CHECK(idx.big_delta == doctest::Approx(svd.singularValues()(0)).epsilon(1e-12));
  }
}

TEST_CASE("scaling homogeneity") {
  std::mt19937 rng(9);
  for (int t = 0; t < 20; ++t) {
    const int n = 3 + static_cast<int>(rng() % 5);
    const Matrix q = adjacency(oracle::random_digraph(rng, n, 0.3));
    const CMatrix v = random_complex(rng, n, n);
    const double eps = 0.1 + 3.0 * std::uniform_real_distribution<double>()(rng);
    const auto base = compatibility_indices(q, v);
    const auto scaled = compatibility_indices(q, scale_basis(v, eps));
    CHECK(scaled.delta == doctest::Approx(eps * base.delta).epsilon(1e-12));
    CHECK(scaled.big_delta == doctest::Approx(eps * base.big_delta).epsilon(1e-12));
    CHECK(condition_number(scale_basis(v, eps)) ==
          doctest::Approx(condition_number(v)).epsilon(1e-12));
  }
  const CMatrix v = inverse_dft(5);
  CHECK(scale_basis(v, 1.0) == v);
}

TEST_CASE("weighted cycle closed form") {
  CHECK(weighted_cycle_condition(16, 1.0) == 1.0);
  CHECK(weighted_cycle_condition(16, 0.01) == doctest::Approx(74.98942).epsilon(1e-6));

  const auto unit = weighted_cycle_basis(16, 1.0);
  CHECK((unit.inverse - inverse_dft(16)).norm() < 1e-14);
  CHECK(std::abs(unit.cond - 1.0) < 1e-12);

  for (double w : {1.0, 0.5, 0.01}) {
    const auto b = weighted_cycle_basis(16, w);
    CHECK(b.cond == doctest::Approx(std::pow(w, -15.0 / 16.0)).epsilon(1e-10));
    // V_w diagonalizes the line digraph closed by an edge of weight w
    Matrix a = adjacency(line_digraph(16));
    a(15, 0) = w;
    CHECK((a.cast<complex>() * b.inverse - b.inverse * diag(b.eigen.values)).norm() < 1e-12);
    CHECK(b.stability.left < 1e-10);
    CHECK(b.stability.right < 1e-10);
  }
}

TEST_CASE("invert_basis rejects singular input") {
  CMatrix v = CMatrix::Identity(3, 3);
  v(2, 2) = 0.0;
  try {
    invert_basis(v);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("inverse does not exist") != std::string::npos);
  }
}

TEST_CASE("make_gft on the circulant") {
  const auto gft = make_gft(adjacency(cycle_digraph(6)));
  CHECK(gft.cond == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((gft.forward * gft.inverse - CMatrix::Identity(6, 6)).norm() < 1e-12);
  const auto j = to_json(gft, Tolerances{});
  CHECK(j.contains("V"));
  CHECK(j["eigenvalues"].size() == 6);
}

TEST_CASE("compare_bases") {
  std::mt19937 rng(12);
  const CMatrix v1 = random_complex(rng, 4, 4);
  CHECK(compare_bases(v1, v1).diagonal().norm() == 0.0);

  CMatrix rotated = v1;
  for (int k = 0; k < 4; ++k) rotated.col(k) *= std::polar(1.0, 0.3 * (k + 1));
  CHECK(compare_bases(v1, rotated).diagonal().norm() < 1e-14);

  const CMatrix v2 = random_complex(rng, 4, 4);
  const Matrix d = compare_bases(v1, v2);
  for (int j = 0; j < 4; ++j) {
    for (int k = 0; k < 4; ++k) {
      double s = 0.0;
      for (int i = 0; i < 4; ++i) {
        const double diff = std::abs(v1(i, j)) - std::abs(v2(i, k));
        s += diff * diff;
      }
      CHECK(d(j, k) == doctest::Approx(std::sqrt(s)).epsilon(1e-12));
    }
  }
}
