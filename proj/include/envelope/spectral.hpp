// Eigendecomposition, admissibility testing and graph Fourier bases.

#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "envelope/graph.hpp"

namespace envelope {

/// Numerical thresholds shared by the spectral checks. All are relative to
/// the spectral radius except `defective_cond`, which bounds kappa(V).
struct Tolerances {
  double zero = 1e-10;
  double gap = 1e-8;
  double defective_cond = 1e12;
};

inline constexpr const char* kUnitMaxPhase = "unit-2norm,max-entry-real-positive";

/// Right eigenpairs of a dense matrix. Column k of `vectors` pairs with
/// values[k]; eigenvalues are ordered by descending magnitude, then by
/// ascending argument in (-pi, pi].
struct EigenSystem {
  std::vector<complex> values;
  CMatrix vectors;
  std::string normalization = kUnitMaxPhase;
};

/// Dense non-symmetric eigendecomposition. Throws NumericalError when the
/// solver does not converge or the input has non-finite entries.
EigenSystem eigendecompose(const Matrix& a);
EigenSystem eigendecompose(const CMatrix& a);

/// Rescales every column to unit 2-norm and rotates it so that its
/// largest-magnitude entry is real and positive.
void normalize_columns(CMatrix& v);

enum class Admissibility { admissible, nonsingular_only, singular, defective };

std::string to_string(Admissibility a);

/// Definition of admissibility: diagonalizable with distinct nonzero
/// eigenvalues. Checks run in the order singular, defective, repeated.
Admissibility is_admissible(const EigenSystem& sys, const Tolerances& tol = {});

/// 2-norm condition number sigma_max / sigma_min (infinity when singular).
double condition_number(const CMatrix& v);
/// Largest singular value.
double spectral_norm(const CMatrix& m);

/// Inverse of an eigenvector matrix; throws NumericalError when singular.
CMatrix invert_basis(const CMatrix& v);

struct StabilityNorms {
  double left = 0.0;   // ||F V - I||
  double right = 0.0;  // ||V F - I||
};

StabilityNorms stability_norms(const CMatrix& f, const CMatrix& v);

/// The graph Fourier transform F = V^-1 of an admissible digraph together
/// with the diagnostics used to rank candidate envelopes.
struct GftBasis {
  EigenSystem eigen;
  CMatrix forward;  // F
  CMatrix inverse;  // V
  double cond = 1.0;
  StabilityNorms stability;
};

GftBasis make_gft(EigenSystem eigen);
GftBasis make_gft(const Matrix& a);

struct CompatibilityIndices {
  double delta = 0.0;      // max_k ||Q w_k||
  double big_delta = 0.0;  // ||Q V||
};

/// How far the columns of `v` are from being eigenvectors of A = A_e - Q.
CompatibilityIndices compatibility_indices(const Matrix& q, const CMatrix& v);

/// eps * V. Scaling leaves the condition number unchanged.
CMatrix scale_basis(const CMatrix& v, double eps);

/// Unitary inverse DFT matrix, entries exp(+2 pi i k l / n) / sqrt(n). Its
/// columns diagonalize the circulant shift with eigenvalues exp(2 pi i k / n).
CMatrix inverse_dft(std::size_t n);
/// Unitary DFT, entries exp(-2 pi i k l / n) / sqrt(n).
CMatrix forward_dft(std::size_t n);

/// Closed-form basis of the weighted cycle C_w (line digraph plus the edge
/// n-1 -> 0 with weight w): V_w = E_w * inverse_dft(n) with
/// E_w = diag(w^(j/n)), eigenvalues w^(1/n) exp(2 pi i k / n).
GftBasis weighted_cycle_basis(std::size_t n, double w);

/// kappa(V_w) = w^-((n-1)/n) for 0 < w <= 1.
double weighted_cycle_condition(std::size_t n, double w);

/// Entry (j, k) is || |v1 column j| - |v2 column k| ||_2.
Matrix compare_bases(const CMatrix& v1, const CMatrix& v2);

nlohmann::json to_json(const GftBasis& basis, const Tolerances& tol);

}  // namespace envelope
