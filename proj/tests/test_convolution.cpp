#include <doctest.h>

#include <cmath>
#include <random>

#include "envelope/convolution.hpp"
#include "oracles.hpp"

using namespace envelope;

namespace {

Signal random_signal(std::mt19937& rng, std::size_t n) {
  std::normal_distribution<double> nd;
  Signal x(static_cast<Eigen::Index>(n));
  for (auto& v : x) v = complex(nd(rng), nd(rng));
  return x;
}

// Random 0/1 digraph, retried until it is admissible in exact arithmetic
// (the floating-point verdict alone can pass a split defective eigenvalue).
ConvolutionContext random_context(std::mt19937& rng, std::size_t n, Matrix* a_out = nullptr) {
  for (;;) {
    const Matrix a = adjacency(oracle::random_digraph(rng, n, 0.4, true));
    if (!oracle::certified_admissible(oracle::to_int(a))) continue;
    const auto sys = eigendecompose(a);
    if (is_admissible(sys) != Admissibility::admissible) continue;
    if (a_out) *a_out = a;
    return ConvolutionContext(make_gft(sys));
  }
}

// Direct summation of the normalized cyclic convolution.
Signal cyclic_oracle(const Signal& x, const Signal& y) {
  const auto n = x.size();
  Signal out = Signal::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index m = 0; m < n; ++m) out(k) += x(m) * y(((k - m) % n + n) % n);
  }
  return out / std::sqrt(static_cast<double>(n));
}

}  // namespace

TEST_CASE("impulse product on the four-cycle") {
  const ConvolutionContext ctx(make_gft(adjacency(cycle_digraph(4))));
  const Signal z = convolve(ctx, impulse(4, 1), impulse(4, 2));
  CHECK((z - 0.5 * impulse(4, 3)).norm() < 1e-12);
}

TEST_CASE("identity element") {
  std::mt19937 rng(1);
  for (int t = 0; t < 10; ++t) {
    const auto ctx = random_context(rng, 2 + rng() % 7);
    const Signal x = random_signal(rng, ctx.size());
    const Signal e = convolution_identity(ctx);
    CHECK((convolve(ctx, x, e) - x).norm() < 1e-8 * x.norm());
  }
}

TEST_CASE("convolution theorem on random admissible digraphs") {
  std::mt19937 rng(2);
  for (int t = 0; t < 20; ++t) {
    const auto ctx = random_context(rng, 6);
    const Signal x = random_signal(rng, 6);
    const Signal y = random_signal(rng, 6);
    const Signal lhs = ctx.analyze(convolve(ctx, x, y));
    const Signal rhs = ctx.analyze(x).cwiseProduct(ctx.analyze(y));
    CHECK((lhs - rhs).norm() <= 1e-10 * std::max(1.0, rhs.norm()));
  }
}

TEST_CASE("impulse responses on the cycle") {
  const ConvolutionContext c4(make_gft(adjacency(cycle_digraph(4))));
  const Signal one = impulse_of_polynomial(c4, SystemPolynomial{{1.0}});
  CHECK((one - 2.0 * impulse(4, 0)).norm() < 1e-12);

  for (std::size_t n : {3, 5, 8}) {
    const ConvolutionContext ctx(make_gft(adjacency(cycle_digraph(n))));
    const Signal s = impulse_of_polynomial(ctx, SystemPolynomial{{0.0, 1.0}});
    CHECK((s - std::sqrt(static_cast<double>(n)) * impulse(n, n - 1)).norm() < 1e-12);
  }

  const Signal zero = impulse_of_polynomial(c4, SystemPolynomial{{0.0}});
  CHECK(zero.norm() == 0.0);
}

TEST_CASE("impulse via the forward transform agrees") {
  std::mt19937 rng(3);
  for (int t = 0; t < 10; ++t) {
    const auto ctx = random_context(rng, 5);
    const SystemPolynomial h{{complex(0.5, 0.1), 1.0, complex(-0.25, 0.3)}};
    const Signal a = impulse_of_polynomial(ctx, h);
    const Signal b = impulse_via_forward(ctx, h);
    CHECK((a - b).norm() < 1e-9 * std::max(1.0, a.norm()));
  }
}

TEST_CASE("signal to polynomial") {
  std::mt19937 rng(4);
  for (int t = 0; t < 10; ++t) {
    const auto ctx = random_context(rng, 5);
    const SystemPolynomial h{{1.0, complex(0.0, 2.0), -0.5}};
    const auto back = signal_to_polynomial(ctx, impulse_of_polynomial(ctx, h));
    for (const auto& lam : ctx.eigenvalues()) CHECK(std::abs(back(lam) - h(lam)) < 1e-8);

    const auto ident = signal_to_polynomial(ctx, convolution_identity(ctx));
    for (const auto& lam : ctx.eigenvalues()) CHECK(std::abs(ident(lam) - 1.0) < 1e-8);

    const Signal x = random_signal(rng, 5);
    const auto hx = signal_to_polynomial(ctx, x);
    CHECK(hx.degree() < 5);
    CHECK((impulse_of_polynomial(ctx, hx) - x).norm() <= 1e-8 * x.norm());
  }
}

TEST_CASE("apply_system") {
  const std::size_t n = 6;
  const ConvolutionContext ctx(make_gft(adjacency(cycle_digraph(n))));
  std::mt19937 rng(5);
  const Signal x = random_signal(rng, n);
  const Signal shifted = apply_system(ctx, SystemPolynomial{{0.0, 1.0}}, x);
  for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(shifted(i) - x((i + 1) % n)) < 1e-12);
  CHECK((apply_system(ctx, SystemPolynomial{{1.0}}, x) - x).norm() < 1e-12);

  for (int t = 0; t < 10; ++t) {
    Matrix a;
    const auto rc = random_context(rng, 6, &a);
    const Signal y = random_signal(rng, 6);
    const Signal expect = a.cast<complex>() * (a.cast<complex>() * y);
    const Signal got = apply_system(rc, SystemPolynomial{{0.0, 0.0, 1.0}}, y);
    CHECK((got - expect).norm() < 1e-9 * std::max(1.0, expect.norm()));
    // the matrix polynomial agrees with explicit powers
    const CMatrix h = matrix_polynomial(a.cast<complex>(), SystemPolynomial{{0.0, 0.0, 1.0}});
    CHECK((h * y - expect).norm() < 1e-12 * std::max(1.0, expect.norm()));
  }
}

TEST_CASE("cyclic convolution") {
  const Signal d0 = impulse(4, 0);
  std::mt19937 rng(6);
  const Signal x = random_signal(rng, 4);
  CHECK((cyclic_convolve(d0, x) - x / 2.0).norm() < 1e-14);
  CHECK((cyclic_convolve(impulse(4, 1), impulse(4, 2)) - 0.5 * impulse(4, 3)).norm() < 1e-14);

  for (std::size_t n = 2; n <= 16; ++n) {
    const ConvolutionContext ctx(make_gft(adjacency(cycle_digraph(n))));
    const Signal a = random_signal(rng, n);
    const Signal b = random_signal(rng, n);
    CHECK((cyclic_convolve(a, b) - cyclic_oracle(a, b)).norm() < 1e-12);
    CHECK((convolve(ctx, a, b) - cyclic_oracle(a, b)).norm() < 1e-10);
  }
}

TEST_CASE("inadmissible contexts are rejected") {
  CHECK_THROWS_AS(ConvolutionContext(make_gft(Matrix(Matrix::Identity(3, 3)))), ValidationError);
}

TEST_CASE("signal parsing") {
  CHECK(parse_signal("delta:2", 4) == impulse(4, 2));
  const Signal s = parse_signal("[[1, 2], 3, [0, -1]]", 3);
  CHECK(s(0) == complex(1.0, 2.0));
  CHECK(s(1) == complex(3.0, 0.0));
  CHECK(s(2) == complex(0.0, -1.0));
  CHECK_THROWS_AS(parse_signal("delta:4", 4), ValidationError);
  CHECK_THROWS_AS(parse_signal("[1, 2]", 3), ValidationError);
  CHECK_THROWS_AS(parse_signal("nonsense", 3), ValidationError);
}
