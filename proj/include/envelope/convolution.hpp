// Convolution product and polynomial systems on admissible digraphs.

#pragma once

#include <vector>

#include "envelope/graph.hpp"
#include "envelope/spectral.hpp"

namespace envelope {

/// h(z) = c_0 + c_1 z + ... (ascending degree).
struct SystemPolynomial {
  std::vector<complex> coefficients;

  complex operator()(complex z) const;
  std::size_t degree() const;
};

/// A GFT whose eigenvalues are distinct and nonzero, which is what the
/// convolution product and Lagrange interpolation require.
class ConvolutionContext {
 public:
  /// Throws ValidationError if the basis eigenvalues are not distinct and
  /// nonzero within `tol`.
  explicit ConvolutionContext(GftBasis basis, const Tolerances& tol = {});

  const GftBasis& basis() const { return basis_; }
  const std::vector<complex>& eigenvalues() const { return basis_.eigen.values; }
  std::size_t size() const { return basis_.eigen.values.size(); }

  /// Signal -> spectrum (F x) and back (V y).
  Signal analyze(const Signal& x) const;
  Signal synthesize(const Signal& y) const;

  /// Largest barycentric weight |1 / prod_{j != k}(lambda_k - lambda_j)|
  /// scaled by spectral_radius^(n-1); large values mean monomial
  /// interpolation coefficients are poorly conditioned.
  double interpolation_conditioning() const;

 private:
  GftBasis basis_;
};

/// x (*) y = V (F x .* F y).
Signal convolve(const ConvolutionContext& ctx, const Signal& x, const Signal& y);

/// Identity element of the product, V 1.
Signal convolution_identity(const ConvolutionContext& ctx);

/// s_h = V d_h with d_h = (h(lambda_0), ..., h(lambda_{n-1})).
Signal impulse_of_polynomial(const ConvolutionContext& ctx, const SystemPolynomial& h);
/// Same impulse computed as F^-1 h(D) 1 by solving F s = h(D) 1.
Signal impulse_via_forward(const ConvolutionContext& ctx, const SystemPolynomial& h);

/// The degree < n polynomial with h(lambda_k) = (F x)[k]. Writes a warning to
/// stderr when interpolation_conditioning() exceeds 1e12.
SystemPolynomial signal_to_polynomial(const ConvolutionContext& ctx, const Signal& x);

/// h(A) x computed spectrally as V h(D) F x.
Signal apply_system(const ConvolutionContext& ctx, const SystemPolynomial& h, const Signal& x);

/// h(A) by Horner's rule on the matrix itself.
CMatrix matrix_polynomial(const CMatrix& a, const SystemPolynomial& h);

/// (x * y)[n] = 1/sqrt(N) sum_m x[m] y[(n - m) mod N].
Signal cyclic_convolve(const Signal& x, const Signal& y);

/// Unit impulse delta[k] of length n.
Signal impulse(std::size_t n, std::size_t k);

/// Parses "delta:k" or a JSON array of [re, im] pairs.
Signal parse_signal(const std::string& text, std::size_t n);
nlohmann::json to_json(const Signal& s);

}  // namespace envelope
