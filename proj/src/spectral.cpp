#include "envelope/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace envelope {

namespace {

constexpr double kPi = std::numbers::pi;

// Canonical ordering: descending |lambda| with magnitudes that agree to
// ~1e-9 relative treated as equal, then ascending argument in (-pi, pi].
std::vector<std::size_t> canonical_order(const std::vector<complex>& values) {
  double scale = 0.0;
  for (const auto& v : values) scale = std::max(scale, std::abs(v));
  const double quantum = std::max(scale, 1.0) * 1e-9;
  struct Key {
    long long mag;
    double arg;
  };
  std::vector<Key> keys;
  keys.reserve(values.size());
  for (const auto& v : values) {
    double arg = std::arg(v);
    if (std::abs(v) <= quantum || std::abs(arg) < 1e-12) arg = 0.0;
    if (arg <= -kPi + 1e-12) arg = kPi;
    keys.push_back({std::llround(std::abs(v) / quantum), arg});
  }
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (keys[a].mag != keys[b].mag) return keys[a].mag > keys[b].mag;
    return keys[a].arg < keys[b].arg;
  });
  return order;
}

EigenSystem assemble(const Eigen::VectorXcd& values, const CMatrix& vectors) {
  std::vector<complex> vals(values.data(), values.data() + values.size());
  for (const auto& v : vals) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw NumericalError("eigensolver produced non-finite eigenvalues");
    }
  }
  const auto order = canonical_order(vals);
  EigenSystem sys;
  sys.values.resize(vals.size());
  sys.vectors.resize(vectors.rows(), vectors.cols());
  for (std::size_t k = 0; k < order.size(); ++k) {
    sys.values[k] = vals[order[k]];
    sys.vectors.col(static_cast<Eigen::Index>(k)) =
        vectors.col(static_cast<Eigen::Index>(order[k]));
  }
  normalize_columns(sys.vectors);
  return sys;
}

void require_finite(const CMatrix& a) {
  if (!a.allFinite()) throw NumericalError("matrix has non-finite entries");
}

}  // namespace

void normalize_columns(CMatrix& v) {
  for (Eigen::Index k = 0; k < v.cols(); ++k) {
    auto col = v.col(k);
    const double norm = col.norm();
    if (norm == 0.0) continue;
    col /= norm;
    // First entry within a relative 1e-9 of the maximum magnitude carries the
    // phase, so near-ties resolve the same way on every platform.
    const double peak = col.cwiseAbs().maxCoeff();
    Eigen::Index pivot = 0;
    for (Eigen::Index i = 0; i < col.size(); ++i) {
      if (std::abs(col(i)) >= peak * (1.0 - 1e-9)) {
        pivot = i;
        break;
      }
    }
    const complex phase = col(pivot) / std::abs(col(pivot));
    col *= std::conj(phase);
    col(pivot) = complex(std::abs(col(pivot)), 0.0);
  }
}

EigenSystem eigendecompose(const Matrix& a) {
  if (a.rows() != a.cols()) throw ValidationError("eigendecompose requires a square matrix");
  if (!a.allFinite()) throw NumericalError("matrix has non-finite entries");
  Eigen::EigenSolver<Matrix> solver(a, true);
  if (solver.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  return assemble(solver.eigenvalues(), solver.eigenvectors());
}

EigenSystem eigendecompose(const CMatrix& a) {
  if (a.rows() != a.cols()) throw ValidationError("eigendecompose requires a square matrix");
  require_finite(a);
  Eigen::ComplexEigenSolver<CMatrix> solver(a, true);
  if (solver.info() != Eigen::Success) throw NumericalError("eigensolver did not converge");
  return assemble(solver.eigenvalues(), solver.eigenvectors());
}

std::string to_string(Admissibility a) {
  switch (a) {
    case Admissibility::admissible:
      return "admissible";
    case Admissibility::nonsingular_only:
      return "nonsingular_only";
    case Admissibility::singular:
      return "singular";
    case Admissibility::defective:
      return "defective";
  }
  return "unknown";
}

Admissibility is_admissible(const EigenSystem& sys, const Tolerances& tol) {
  const auto& vals = sys.values;
  if (vals.empty()) return Admissibility::singular;
  double radius = 0.0;
  double smallest = std::numeric_limits<double>::infinity();
  for (const auto& v : vals) {
    radius = std::max(radius, std::abs(v));
    smallest = std::min(smallest, std::abs(v));
  }
  if (radius == 0.0 || smallest <= tol.zero * radius) return Admissibility::singular;
  if (condition_number(sys.vectors) > tol.defective_cond) return Admissibility::defective;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    for (std::size_t j = i + 1; j < vals.size(); ++j) {
      if (std::abs(vals[i] - vals[j]) <= tol.gap * radius) return Admissibility::nonsingular_only;
    }
  }
  return Admissibility::admissible;
}

double condition_number(const CMatrix& v) {
  Eigen::JacobiSVD<CMatrix> svd(v);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

double spectral_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

CMatrix invert_basis(const CMatrix& v) {
  if (v.rows() != v.cols()) throw ValidationError("basis must be square");
  Eigen::FullPivLU<CMatrix> lu(v);
  if (!lu.isInvertible()) throw NumericalError("eigenvector matrix is singular: inverse does not exist");
  return lu.inverse();
}

StabilityNorms stability_norms(const CMatrix& f, const CMatrix& v) {
  if (f.rows() != v.cols() || f.cols() != v.rows()) {
    throw ValidationError("stability_norms: dimension mismatch");
  }
  const auto n = v.rows();
  const CMatrix id = CMatrix::Identity(n, n);
  return {spectral_norm(f * v - id), spectral_norm(v * f - id)};
}

GftBasis make_gft(EigenSystem eigen) {
  GftBasis basis;
  basis.inverse = eigen.vectors;
  basis.forward = invert_basis(basis.inverse);
  basis.cond = condition_number(basis.inverse);
  basis.stability = stability_norms(basis.forward, basis.inverse);
  basis.eigen = std::move(eigen);
  return basis;
}

GftBasis make_gft(const Matrix& a) { return make_gft(eigendecompose(a)); }

CompatibilityIndices compatibility_indices(const Matrix& q, const CMatrix& v) {
  if (q.rows() != v.rows() || q.cols() != v.rows()) {
    throw ValidationError("compatibility_indices: dimension mismatch");
  }
  const CMatrix qv = q.cast<complex>() * v;
  CompatibilityIndices idx;
  for (Eigen::Index k = 0; k < qv.cols(); ++k) idx.delta = std::max(idx.delta, qv.col(k).norm());
  idx.big_delta = spectral_norm(qv);
  return idx;
}

CMatrix scale_basis(const CMatrix& v, double eps) {
  if (!(eps > 0.0)) throw ValidationError("scale factor must be positive");
  return eps * v;
}

CMatrix inverse_dft(std::size_t n) {
  const auto size = static_cast<Eigen::Index>(n);
  CMatrix m(size, size);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  for (Eigen::Index k = 0; k < size; ++k) {
    for (Eigen::Index l = 0; l < size; ++l) {
      // Reduce k*l mod n first so the angle stays accurate for larger n.
      const auto r = static_cast<double>((k * l) % size);
      m(k, l) = std::polar(norm, 2.0 * kPi * r / static_cast<double>(n));
    }
  }
  return m;
}

CMatrix forward_dft(std::size_t n) { return inverse_dft(n).adjoint(); }

GftBasis weighted_cycle_basis(std::size_t n, double w) {
  if (n < 2) throw ValidationError("weighted cycle needs n >= 2");
  if (!(w > 0.0)) throw ValidationError("weight must be positive");
  const auto size = static_cast<Eigen::Index>(n);
  const double dn = static_cast<double>(n);
  Eigen::VectorXcd e(size);
  Eigen::VectorXcd e_inv(size);
  for (Eigen::Index j = 0; j < size; ++j) {
    const double s = std::pow(w, static_cast<double>(j) / dn);
    e(j) = s;
    e_inv(j) = 1.0 / s;
  }
  GftBasis basis;
  const double root = std::pow(w, 1.0 / dn);
  for (std::size_t k = 0; k < n; ++k) {
    basis.eigen.values.push_back(std::polar(root, 2.0 * kPi * static_cast<double>(k) / dn));
  }
  basis.eigen.vectors = e.asDiagonal() * inverse_dft(n);
  basis.eigen.normalization = "closed-form E_w * inverse DFT";
  basis.inverse = basis.eigen.vectors;
  basis.forward = forward_dft(n) * e_inv.asDiagonal();
  basis.cond = condition_number(basis.inverse);
  basis.stability = stability_norms(basis.forward, basis.inverse);
  return basis;
}

double weighted_cycle_condition(std::size_t n, double w) {
  const double exponent = (static_cast<double>(n) - 1.0) / static_cast<double>(n);
  return w <= 1.0 ? std::pow(w, -exponent) : std::pow(w, exponent);
}

Matrix compare_bases(const CMatrix& v1, const CMatrix& v2) {
  if (v1.rows() != v2.rows() || v1.cols() != v2.cols()) {
    throw ValidationError("compare_bases: shape mismatch");
  }
  const Matrix m1 = v1.cwiseAbs();
  const Matrix m2 = v2.cwiseAbs();
  Matrix out(m1.cols(), m2.cols());
  for (Eigen::Index j = 0; j < m1.cols(); ++j) {
    for (Eigen::Index k = 0; k < m2.cols(); ++k) out(j, k) = (m1.col(j) - m2.col(k)).norm();
  }
  return out;
}

namespace {

nlohmann::json interleaved(const CMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      row.push_back(m(i, j).real());
      row.push_back(m(i, j).imag());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

nlohmann::json to_json(const GftBasis& basis, const Tolerances& tol) {
  nlohmann::json values = nlohmann::json::array();
  for (const auto& v : basis.eigen.values) values.push_back({v.real(), v.imag()});
  return {
      {"n", basis.inverse.rows()},
      {"eigenvalues", std::move(values)},
      {"V", interleaved(basis.inverse)},
      {"F", interleaved(basis.forward)},
      {"cond", basis.cond},
      {"stability", {{"left", basis.stability.left}, {"right", basis.stability.right}}},
      {"normalization", basis.eigen.normalization},
      {"tolerances",
       {{"zero", tol.zero}, {"gap", tol.gap}, {"defective_cond", tol.defective_cond}}},
  };
}

}  // namespace envelope
