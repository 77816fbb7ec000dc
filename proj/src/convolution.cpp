#include "envelope/convolution.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace envelope {

namespace {

void require_size(const ConvolutionContext& ctx, const Signal& x, const char* what) {
  if (static_cast<std::size_t>(x.size()) != ctx.size()) {
    throw ValidationError(std::string(what) + ": signal length " + std::to_string(x.size()) +
                          " does not match digraph size " + std::to_string(ctx.size()));
  }
}

Signal spectrum_of(const ConvolutionContext& ctx, const SystemPolynomial& h) {
  Signal d(static_cast<Eigen::Index>(ctx.size()));
  for (std::size_t k = 0; k < ctx.size(); ++k) d(static_cast<Eigen::Index>(k)) = h(ctx.eigenvalues()[k]);
  return d;
}

}  // namespace

complex SystemPolynomial::operator()(complex z) const {
  complex acc(0.0, 0.0);
  for (auto it = coefficients.rbegin(); it != coefficients.rend(); ++it) acc = acc * z + *it;
  return acc;
}

std::size_t SystemPolynomial::degree() const {
  std::size_t d = coefficients.size();
  while (d > 0 && coefficients[d - 1] == complex(0.0, 0.0)) --d;
  return d == 0 ? 0 : d - 1;
}

ConvolutionContext::ConvolutionContext(GftBasis basis, const Tolerances& tol)
    : basis_(std::move(basis)) {
  const auto& vals = basis_.eigen.values;
  if (vals.empty()) throw ValidationError("inadmissible context: empty basis");
  double radius = 0.0;
  for (const auto& v : vals) radius = std::max(radius, std::abs(v));
  for (std::size_t i = 0; i < vals.size(); ++i) {
    if (std::abs(vals[i]) <= tol.zero * radius) {
      throw ValidationError("inadmissible context: zero eigenvalue");
    }
    for (std::size_t j = i + 1; j < vals.size(); ++j) {
      if (std::abs(vals[i] - vals[j]) <= tol.gap * radius) {
        throw ValidationError("inadmissible context: repeated eigenvalue");
      }
    }
  }
}

Signal ConvolutionContext::analyze(const Signal& x) const {
  require_size(*this, x, "analyze");
  return basis_.forward * x;
}

Signal ConvolutionContext::synthesize(const Signal& y) const {
  require_size(*this, y, "synthesize");
  return basis_.inverse * y;
}

double ConvolutionContext::interpolation_conditioning() const {
  const auto& vals = eigenvalues();
  double radius = 0.0;
  for (const auto& v : vals) radius = std::max(radius, std::abs(v));
  double worst = 0.0;
  for (std::size_t k = 0; k < vals.size(); ++k) {
    // log-domain product avoids overflow for larger n
    double log_prod = 0.0;
    for (std::size_t j = 0; j < vals.size(); ++j) {
      if (j != k) log_prod += std::log(std::abs(vals[k] - vals[j]) / radius);
    }
    worst = std::max(worst, std::exp(-log_prod));
  }
  return worst;
}

Signal convolve(const ConvolutionContext& ctx, const Signal& x, const Signal& y) {
  return ctx.synthesize(ctx.analyze(x).cwiseProduct(ctx.analyze(y)));
}

Signal convolution_identity(const ConvolutionContext& ctx) {
  return ctx.synthesize(Signal::Ones(static_cast<Eigen::Index>(ctx.size())));
}

Signal impulse_of_polynomial(const ConvolutionContext& ctx, const SystemPolynomial& h) {
  return ctx.synthesize(spectrum_of(ctx, h));
}

Signal impulse_via_forward(const ConvolutionContext& ctx, const SystemPolynomial& h) {
  return ctx.basis().forward.fullPivLu().solve(spectrum_of(ctx, h));
}

SystemPolynomial signal_to_polynomial(const ConvolutionContext& ctx, const Signal& x) {
  const Signal values = ctx.analyze(x);
  const auto& nodes = ctx.eigenvalues();
  const std::size_t n = nodes.size();

  if (ctx.interpolation_conditioning() > 1e12) {
    std::cerr << "warning: Lagrange interpolation over " << n
              << " eigenvalues is poorly conditioned\n";
  }

  // Master polynomial P(z) = prod_j (z - lambda_j), ascending coefficients.
  std::vector<complex> master{complex(1.0, 0.0)};
  for (const auto& lam : nodes) {
    std::vector<complex> next(master.size() + 1, complex(0.0, 0.0));
    for (std::size_t i = 0; i < master.size(); ++i) {
      next[i + 1] += master[i];
      next[i] -= lam * master[i];
    }
    master = std::move(next);
  }

  SystemPolynomial h{std::vector<complex>(n, complex(0.0, 0.0))};
  std::vector<complex> quotient(n);
  for (std::size_t k = 0; k < n; ++k) {
    // Barycentric weight w_k = 1 / prod_{j != k}(lambda_k - lambda_j).
    complex denom(1.0, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j != k) denom *= nodes[k] - nodes[j];
    }
    const complex scale = values(static_cast<Eigen::Index>(k)) / denom;
    // P(z) / (z - lambda_k) by synthetic division from the top.
    complex carry(0.0, 0.0);
    for (std::size_t i = n; i-- > 0;) {
      carry = master[i + 1] + carry * nodes[k];
      quotient[i] = carry;
    }
    for (std::size_t i = 0; i < n; ++i) h.coefficients[i] += scale * quotient[i];
  }
  return h;
}

Signal apply_system(const ConvolutionContext& ctx, const SystemPolynomial& h, const Signal& x) {
  return ctx.synthesize(spectrum_of(ctx, h).cwiseProduct(ctx.analyze(x)));
}

CMatrix matrix_polynomial(const CMatrix& a, const SystemPolynomial& h) {
  const auto n = a.rows();
  CMatrix acc = CMatrix::Zero(n, n);
  for (auto it = h.coefficients.rbegin(); it != h.coefficients.rend(); ++it) {
    acc = acc * a;
    acc.diagonal().array() += *it;
  }
  return acc;
}

Signal cyclic_convolve(const Signal& x, const Signal& y) {
  if (x.size() != y.size()) throw ValidationError("cyclic_convolve: length mismatch");
  const auto n = x.size();
  Signal out = Signal::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index m = 0; m < n; ++m) out(k) += x(m) * y((k - m + n) % n);
  }
  return out / std::sqrt(static_cast<double>(n));
}

Signal impulse(std::size_t n, std::size_t k) {
  if (k >= n) throw ValidationError("impulse position out of range");
  Signal s = Signal::Zero(static_cast<Eigen::Index>(n));
  s(static_cast<Eigen::Index>(k)) = 1.0;
  return s;
}

Signal parse_signal(const std::string& text, std::size_t n) {
  if (text.rfind("delta:", 0) == 0) {
    const std::string pos = text.substr(6);
    std::size_t k = 0;
    try {
      std::size_t used = 0;
      k = std::stoul(pos, &used);
      if (used != pos.size()) throw std::invalid_argument(pos);
    } catch (const std::exception&) {
      throw ValidationError("invalid impulse shorthand '" + text + "'");
    }
    return impulse(n, k);
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& ex) {
    throw ValidationError(std::string("signal is neither delta:k nor JSON: ") + ex.what());
  }
  if (!j.is_array() || j.size() != n) {
    throw ValidationError("signal must be a JSON array of " + std::to_string(n) + " [re, im] pairs");
  }
  Signal s(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = j[i];
    if (v.is_number()) {
      s(static_cast<Eigen::Index>(i)) = v.get<double>();
    } else if (v.is_array() && v.size() == 2) {
      s(static_cast<Eigen::Index>(i)) = complex(v[0].get<double>(), v[1].get<double>());
    } else {
      throw ValidationError("signal entry " + std::to_string(i) + " is not [re, im]");
    }
  }
  return s;
}

nlohmann::json to_json(const Signal& s) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < s.size(); ++i) out.push_back({s(i).real(), s(i).imag()});
  return out;
}

}  // namespace envelope
