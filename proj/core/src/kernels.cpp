#include "dbr/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>

#include <nlohmann/json.hpp>

#include "dbr/span.hpp"

namespace dbr {

namespace {

constexpr double kDegenTol = 1e-8;   // denominator size that triggers continuation
constexpr double kContStep = 1e-5;   // central-difference step for removable 0/0

CMat identity_like(Eigen::Index n) { return CMat::Identity(n, n); }

CMat k_h2(Complex mu, Complex lam) {
  CMat v(1, 1);
  v(0, 0) = 1.0 / (mu + std::conj(lam));
  return v;
}

CMat k_ko(const SchurFunction& f, Complex mu, Complex lam) {
  CMat fm = f.eval(mu);
  CMat fl = f.eval(lam);
  return (identity_like(f.output_dim()) - fm * fl.adjoint()) / (mu + std::conj(lam));
}

CMat k_kc(const SchurFunction& f, Complex mu, Complex lam) {
  CMat fm = f.eval(std::conj(mu));
  CMat fl = f.eval(std::conj(lam));
  return (identity_like(f.input_dim()) - fm.adjoint() * fl) / (mu + std::conj(lam));
}

// Disk kernels; 1 - z conj(w) ~ 0 is resolved by a tangential central difference.
CMat k_disk(const SchurFunction& f, Complex z, Complex w, bool controllable, int depth = 0);

CMat k_disk_direct(const SchurFunction& f, Complex z, Complex w, bool controllable) {
  Complex den = 1.0 - z * std::conj(w);
  if (controllable) {
    CMat fz = f.eval(std::conj(z));
    CMat fw = f.eval(std::conj(w));
    return (identity_like(f.input_dim()) - fz.adjoint() * fw) / den;
  }
  CMat fz = f.eval(z);
  CMat fw = f.eval(w);
  return (identity_like(f.output_dim()) - fz * fw.adjoint()) / den;
}

CMat k_disk(const SchurFunction& f, Complex z, Complex w, bool controllable, int depth) {
  if (depth < 2 && std::abs(1.0 - z * std::conj(w)) < kDegenTol && std::abs(z) > 0.0) {
    Complex rot = std::polar(1.0, kContStep);
    return 0.5 * (k_disk(f, z * rot, w, controllable, depth + 1) +
                  k_disk(f, z / rot, w, controllable, depth + 1));
  }
  return k_disk_direct(f, z, w, controllable);
}

// Double difference quotient kernel of the (+1)-rigged dual controllable space,
//   [Kc(mu,lam) - Kc(mu,bb) - Kc(bb,lam) + Kc(bb,bb)] / ((bb - mu)(beta - conj(lam))),
// bb = conj(beta); 0/0 points are continued by averaging over mu (resp. lam) +- h.
CMat k_c1d(const SchurFunction& f, Complex mu, Complex lam, Complex beta, int depth = 0) {
  Complex bb = std::conj(beta);
  if (depth < 4) {
    if (std::abs(bb - mu) < kDegenTol)
      return 0.5 * (k_c1d(f, mu + kContStep, lam, beta, depth + 1) +
                    k_c1d(f, mu - kContStep, lam, beta, depth + 1));
    if (std::abs(beta - std::conj(lam)) < kDegenTol)
      return 0.5 * (k_c1d(f, mu, lam + kContStep, beta, depth + 1) +
                    k_c1d(f, mu, lam - kContStep, beta, depth + 1));
  }
  CMat num = k_kc(f, mu, lam) - k_kc(f, mu, bb) - k_kc(f, bb, lam) + k_kc(f, bb, bb);
  return num / ((bb - mu) * (beta - std::conj(lam)));
}

// Observable-side (+1)-rigged kernel,
//   [Ko(mu,lam) - Ko(mu,beta) - Ko(beta,lam) + Ko(beta,beta)] / ((beta - mu) conj(beta - lam)).
CMat k_o1(const SchurFunction& f, Complex mu, Complex lam, Complex beta, int depth = 0) {
  if (depth < 4) {
    if (std::abs(beta - mu) < kDegenTol)
      return 0.5 * (k_o1(f, mu + kContStep, lam, beta, depth + 1) +
                    k_o1(f, mu - kContStep, lam, beta, depth + 1));
    if (std::abs(beta - lam) < kDegenTol)
      return 0.5 * (k_o1(f, mu, lam + kContStep, beta, depth + 1) +
                    k_o1(f, mu, lam - kContStep, beta, depth + 1));
  }
  CMat num = k_ko(f, mu, lam) - k_ko(f, mu, beta) - k_ko(f, beta, lam) + k_ko(f, beta, beta);
  return num / ((beta - mu) * std::conj(beta - lam));
}

// kappa_c(mu, lam) = (Kc(mu,lam) - Kc(conj(beta),lam)) / (conj(beta) - mu), a
// column family in H_c; continued at mu ~ conj(beta).
CMat kappa_c(const SchurFunction& f, Complex mu, Complex lam, Complex beta, int depth = 0) {
  Complex bb = std::conj(beta);
  if (depth < 2 && std::abs(bb - mu) < kDegenTol)
    return 0.5 * (kappa_c(f, mu + kContStep, lam, beta, depth + 1) +
                  kappa_c(f, mu - kContStep, lam, beta, depth + 1));
  return (k_kc(f, mu, lam) - k_kc(f, bb, lam)) / (bb - mu);
}

CMat kappa_o(const SchurFunction& f, Complex mu, Complex lam, Complex beta, int depth = 0) {
  if (depth < 2 && std::abs(beta - mu) < kDegenTol)
    return 0.5 * (kappa_o(f, mu + kContStep, lam, beta, depth + 1) +
                  kappa_o(f, mu - kContStep, lam, beta, depth + 1));
  return (k_ko(f, mu, lam) - k_ko(f, beta, lam)) / (beta - mu);
}

// tau of a controllable-model span combination, on raw coefficients:
// tau_{c,alpha} sum_j e_c(nu_j)* c_j = sum_j (phi(conj(nu_j)) - phi(alpha)) c_j / (alpha - conj(nu_j)).
CVec tau_on_coeffs(const SchurFunction& f, const std::vector<Complex>& nodes, const CVec& coeffs,
                   Complex alpha) {
  Eigen::Index m = f.input_dim();
  CMat phi_alpha = f.eval(alpha);
  CVec out = CVec::Zero(f.output_dim());
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    Complex den = alpha - std::conj(nodes[j]);
    if (std::abs(den) < kDegenTol) throw DegenerateNodeError("tau parameter collides with a basis node");
    CVec cj = coeffs.segment(static_cast<Eigen::Index>(j) * m, m);
    out += (f.eval(std::conj(nodes[j])) - phi_alpha) * cj / den;
  }
  return out;
}

// Projection surrogate for tau applied to a non-span function. `basis` is a
// dense span of the matching state space (Kc of f for the c-side; Ko of f,
// handled via the flipped function, for the o-side).
CMat tau_projected(const SpanBasis& basis, const SchurFunction& f_cside, Complex alpha,
                   const std::function<CVec(Complex, Eigen::Index)>& column_fn, Eigen::Index n_cols) {
  Eigen::Index p = f_cside.output_dim();
  CMat out(p, n_cols);
  for (Eigen::Index c = 0; c < n_cols; ++c) {
    std::vector<CVec> samples;
    samples.reserve(basis.nodes().size());
    for (Complex node : basis.nodes()) samples.push_back(column_fn(node, c));
    ProjectionResult proj = project(basis, samples);
    out.col(c) = tau_on_coeffs(f_cside, basis.nodes(), proj.vec.coeffs, alpha);
  }
  return out;
}

}  // namespace

bool kernel_is_disk(KernelTag tag) { return tag == KernelTag::DiskKo || tag == KernelTag::DiskKc; }

bool kernel_is_rigged(KernelTag tag) {
  switch (tag) {
    case KernelTag::Kc1d:
    case KernelTag::Kcm1d:
    case KernelTag::Kcm1:
    case KernelTag::Kc1:
    case KernelTag::Ko1:
    case KernelTag::Kom1:
    case KernelTag::Kom1d:
    case KernelTag::Ko1d:
      return true;
    default:
      return false;
  }
}

bool kernel_is_approximate(KernelTag tag) { return tag == KernelTag::Kc1 || tag == KernelTag::Ko1d; }

std::string kernel_tag_name(KernelTag tag) {
  switch (tag) {
    case KernelTag::H2: return "H2";
    case KernelTag::Ko: return "Ko";
    case KernelTag::Kc: return "Kc";
    case KernelTag::DiskKo: return "DiskKo";
    case KernelTag::DiskKc: return "DiskKc";
    case KernelTag::Kc1d: return "Kc1d";
    case KernelTag::Kcm1d: return "Kcm1d";
    case KernelTag::Kcm1: return "Kcm1";
    case KernelTag::Kc1: return "Kc1";
    case KernelTag::Ko1: return "Ko1";
    case KernelTag::Kom1: return "Kom1";
    case KernelTag::Kom1d: return "Kom1d";
    case KernelTag::Ko1d: return "Ko1d";
  }
  return "?";
}

Eigen::Index kernel_block_dim(KernelTag tag, const SchurFunction& f) {
  switch (tag) {
    case KernelTag::H2:
      return 1;
    case KernelTag::Ko:
    case KernelTag::DiskKo:
    case KernelTag::Ko1:
    case KernelTag::Kom1:
    case KernelTag::Kom1d:
    case KernelTag::Ko1d:
      return f.output_dim();
    default:
      return f.input_dim();
  }
}

KernelValue eval_kernel_ex(const KernelKind& kind, const SchurFunction& f, Complex mu, Complex lambda,
                           const SpanBasis* aux) {
  if (kernel_is_rigged(kind.tag) && !(kind.beta.real() > 0.0))
    throw DomainError("rigging parameter must lie in the open right half-plane");
  if (kernel_is_disk(kind.tag)) {
    if (!in_disk(mu) || !in_disk(lambda)) throw DomainError("disk kernels need points in the open unit disk");
  } else {
    if (!in_halfplane(mu) || !in_halfplane(lambda))
      throw DomainError("half-plane kernels need points with positive real part");
  }

  Complex beta = kind.beta;
  switch (kind.tag) {
    case KernelTag::H2:
      return {k_h2(mu, lambda), false};
    case KernelTag::Ko:
      return {k_ko(f, mu, lambda), false};
    case KernelTag::Kc:
      return {k_kc(f, mu, lambda), false};
    case KernelTag::DiskKo:
      return {k_disk(f, mu, lambda, /*controllable=*/false), false};
    case KernelTag::DiskKc:
      return {k_disk(f, mu, lambda, /*controllable=*/true), false};
    case KernelTag::Kc1d:
      return {k_c1d(f, mu, lambda, beta), false};
    case KernelTag::Kcm1d:
      return {(std::conj(beta) - mu) * (beta - std::conj(lambda)) * k_kc(f, mu, lambda), false};
    case KernelTag::Kcm1:
      return {(beta + mu) * std::conj(beta + lambda) * k_kc(f, mu, lambda), false};
    case KernelTag::Ko1:
      return {k_o1(f, mu, lambda, beta), false};
    case KernelTag::Kom1:
      return {(beta - mu) * std::conj(beta - lambda) * k_ko(f, mu, lambda), false};
    case KernelTag::Kom1d:
      return {(std::conj(beta) + mu) * (beta + std::conj(lambda)) * k_ko(f, mu, lambda), false};
    case KernelTag::Kc1: {
      // (kappa_c(mu,lam) - phi(conj(mu))* tau_{c,beta} kappa_c(.,lam)) / (beta + mu)
      SpanBasis fallback;
      const SpanBasis* dense = aux;
      if (dense != nullptr && dense->kind().tag != KernelTag::Kc)
        throw DomainError("Kc1 needs a Kc auxiliary span");
      if (dense == nullptr) {
        fallback = SpanBasis::build(KernelKind::kc(), f, default_dense_nodes());
        dense = &fallback;
      }
      Eigen::Index m = f.input_dim();
      CMat tau_term = tau_projected(
          *dense, f, beta,
          [&](Complex node, Eigen::Index col) -> CVec { return kappa_c(f, node, lambda, beta).col(col); }, m);
      CMat value = (kappa_c(f, mu, lambda, beta) - f.eval(std::conj(mu)).adjoint() * tau_term) / (beta + mu);
      return {value, true};
    }
    case KernelTag::Ko1d: {
      // (kappa_o(mu,lam) - phi(mu) tau_{o,conj(beta)} kappa_o(.,lam)) / (conj(beta) + mu);
      // the o-side tau is the c-side tau of the flipped function.
      SchurFunction flip = f.adjoint_flip();
      SpanBasis fallback;
      const SpanBasis* dense = aux;
      // A Ko span of f carries the same Gram and nodes as the Kc span of the
      // flipped symbol, so either kind works as the projection carrier.
      if (dense != nullptr && dense->kind().tag != KernelTag::Ko && dense->kind().tag != KernelTag::Kc)
        throw DomainError("Ko1d needs a Ko (or flipped Kc) auxiliary span");
      if (dense == nullptr) {
        fallback = SpanBasis::build(KernelKind::kc(), flip, default_dense_nodes());
        dense = &fallback;
      }
      Eigen::Index p = f.output_dim();
      CMat tau_term = tau_projected(
          *dense, flip, std::conj(beta),
          [&](Complex node, Eigen::Index col) -> CVec { return kappa_o(f, node, lambda, beta).col(col); }, p);
      CMat value = (kappa_o(f, mu, lambda, beta) - f.eval(mu) * tau_term) / (std::conj(beta) + mu);
      return {value, true};
    }
  }
  throw DomainError("unknown kernel tag");
}

CMat eval_kernel(const KernelKind& kind, const SchurFunction& f, Complex mu, Complex lambda,
                 const SpanBasis* aux) {
  return eval_kernel_ex(kind, f, mu, lambda, aux).value;
}

GramMatrix gram(const KernelKind& kind, const SchurFunction& f, const std::vector<Complex>& nodes,
                const SpanBasis* aux) {
  for (std::size_t j = 0; j < nodes.size(); ++j)
    for (std::size_t k = j + 1; k < nodes.size(); ++k)
      if (std::abs(nodes[j] - nodes[k]) < 1e-8) throw DomainError("gram nodes must be pairwise distinct");

  Eigen::Index d = kernel_block_dim(kind.tag, f);
  Eigen::Index n = static_cast<Eigen::Index>(nodes.size()) * d;
  GramMatrix g;
  g.nodes = nodes;
  g.block_dim = d;
  g.entries = CMat(n, n);
  // Canonical entry order: row-major over node blocks; assembly is therefore
  // bit-identical however the loop is scheduled.
  for (std::size_t j = 0; j < nodes.size(); ++j)
    for (std::size_t k = 0; k < nodes.size(); ++k)
      g.entries.block(static_cast<Eigen::Index>(j) * d, static_cast<Eigen::Index>(k) * d, d, d) =
          eval_kernel(kind, f, nodes[j], nodes[k], aux);
  g.entries = 0.5 * (g.entries + g.entries.adjoint()).eval();
  return g;
}

PositivityReport positivity_check(const GramMatrix& g, double tol_psd) {
  PositivityReport report;
  if (g.entries.rows() == 0) {
    report.pass = true;
    return report;
  }
  Eigen::SelfAdjointEigenSolver<CMat> eig(0.5 * (g.entries + g.entries.adjoint()));
  const auto& vals = eig.eigenvalues();
  report.eig_min = vals(0);
  report.eig_max = vals(vals.size() - 1);
  double scale = std::max(report.eig_max, 0.0);
  report.pass = report.eig_min >= -tol_psd * std::max(scale, 1e-300);
  const double tol_rank = 1e-10;
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    if (vals(i) > tol_rank * scale && vals(i) > 0.0) ++report.numerical_rank;
  return report;
}

namespace {

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  static std::mutex mtx;
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  std::lock_guard lock(mtx);
  auto it = cache.find(n);
  if (it == cache.end()) {
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
      double b = k / std::sqrt(4.0 * k * k - 1.0);
      jacobi(k, k - 1) = b;
      jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    std::vector<double> nodes(n), weights(n);
    for (int i = 0; i < n; ++i) {
      nodes[i] = eig.eigenvalues()(i);
      double v = eig.eigenvectors()(0, i);
      weights[i] = 2.0 * v * v;
    }
    it = cache.emplace(n, std::make_pair(std::move(nodes), std::move(weights))).first;
  }
  x = it->second.first;
  w = it->second.second;
}

using ThetaIntegrand = std::function<Complex(double)>;

Complex gl_panel(const ThetaIntegrand& fn, double lo, double hi, const std::vector<double>& x,
                 const std::vector<double>& w) {
  double mid = 0.5 * (lo + hi);
  double half = 0.5 * (hi - lo);
  Complex acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += w[i] * fn(mid + half * x[i]);
  return half * acc;
}

Complex adaptive_panel(const ThetaIntegrand& fn, double lo, double hi, const std::vector<double>& x,
                       const std::vector<double>& w, double tol, int depth) {
  Complex whole = gl_panel(fn, lo, hi, x, w);
  double mid = 0.5 * (lo + hi);
  Complex split = gl_panel(fn, lo, mid, x, w) + gl_panel(fn, mid, hi, x, w);
  if (std::abs(split - whole) <= tol || depth >= 14) return split;
  return adaptive_panel(fn, lo, mid, x, w, 0.5 * tol, depth + 1) +
         adaptive_panel(fn, mid, hi, x, w, 0.5 * tol, depth + 1);
}

Complex quadrature_pass(const Evaluator& g, const Evaluator& h, int n) {
  // omega = tan(theta); theta range cut so the 1/(1+omega^2) majorant tail is < 1e-8.
  const double omega_max = 1e9;
  const double theta_max = std::atan(omega_max);
  const double shift = 1e-9;
  ThetaIntegrand fn = [&](double theta) -> Complex {
    double omega = std::tan(theta);
    double sec2 = 1.0 + omega * omega;
    Complex mu(shift, omega);
    CVec gv = g(mu);
    CVec hv = h(mu);
    if (gv.size() != hv.size()) throw DimensionError("quadrature integrand dimensions differ");
    return sec2 * (hv.adjoint() * gv)(0, 0);
  };
  int panel_order = std::clamp(n / 8, 8, 64);
  std::vector<double> x, w;
  gauss_legendre(panel_order, x, w);
  Complex rough = gl_panel(fn, -theta_max, theta_max, x, w);
  double tol = 1e-10 * (1.0 + std::abs(rough));
  Complex acc = adaptive_panel(fn, -theta_max, theta_max, x, w, tol, 0);
  return acc / (2.0 * 3.14159265358979323846);
}

}  // namespace

Complex h2_inner_quadrature(const Evaluator& g, const Evaluator& h, int n_quad) {
  if (n_quad < 8) throw DomainError("quadrature needs at least 8 nodes");
  Complex coarse = quadrature_pass(g, h, n_quad);
  Complex fine = quadrature_pass(g, h, 2 * n_quad);
  if (std::abs(fine - coarse) > 1e-6 * (1.0 + std::abs(fine)))
    throw ConvergenceError("quadrature did not settle when doubling the node count");
  return fine;
}

double cayley_kernel_check(const SchurFunction& f, Complex alpha,
                           const std::vector<std::pair<Complex, Complex>>& pairs) {
  if (f.domain() != Domain::HalfPlane) throw DomainError("cayley_kernel_check expects a half-plane function");
  SchurFunction fd = f.to_disk(alpha);
  double two_re = 2.0 * alpha.real();
  double worst = 0.0;
  for (auto [mu, lam] : pairs) {
    if (!in_halfplane(mu) || !in_halfplane(lam)) throw DomainError("pairs must lie in the right half-plane");
    {
      CMat lhs = eval_kernel(KernelKind::disk_ko(), fd, mobius_to_disk(alpha, mu), mobius_to_disk(alpha, lam));
      CMat rhs = (std::conj(alpha) + mu) * (alpha + std::conj(lam)) / two_re *
                 eval_kernel(KernelKind::ko(), f, mu, lam);
      double scale = std::max(1.0, rhs.norm());
      worst = std::max(worst, (lhs - rhs).norm() / scale);
    }
    {
      Complex ab = std::conj(alpha);
      CMat lhs = eval_kernel(KernelKind::disk_kc(), fd, mobius_to_disk(ab, mu), mobius_to_disk(ab, lam));
      CMat rhs = (alpha + mu) * std::conj(alpha + lam) / two_re * eval_kernel(KernelKind::kc(), f, mu, lam);
      double scale = std::max(1.0, rhs.norm());
      worst = std::max(worst, (lhs - rhs).norm() / scale);
    }
  }
  return worst;
}

void export_gram_csv(const GramMatrix& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot open " + path);
  char buf[64];
  for (Eigen::Index i = 0; i < g.entries.rows(); ++i) {
    for (Eigen::Index j = 0; j < g.entries.cols(); ++j) {
      if (j) out << ',';
      std::snprintf(buf, sizeof buf, "%.17g,%.17g", g.entries(i, j).real(), g.entries(i, j).imag());
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw IOError("write failed: " + path);
}

void export_gram_json(const GramMatrix& g, const std::string& path) {
  nlohmann::json j;
  j["block_dim"] = g.block_dim;
  nlohmann::json nodes = nlohmann::json::array();
  for (Complex n : g.nodes) nodes.push_back({n.real(), n.imag()});
  j["nodes"] = nodes;
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < g.entries.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < g.entries.cols(); ++c)
      row.push_back({g.entries(i, c).real(), g.entries(i, c).imag()});
    rows.push_back(row);
  }
  j["entries"] = rows;
  std::ofstream out(path);
  if (!out) throw IOError("cannot open " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IOError("write failed: " + path);
}

void export_kernel_grid_csv(const KernelKind& kind, const SchurFunction& f, Complex lambda, double re_lo,
                            double re_hi, double im_lo, double im_hi, int n_re, int n_im,
                            const std::string& path) {
  if (n_re < 1 || n_im < 1) throw DomainError("grid needs at least one point per axis");
  std::ofstream out(path);
  if (!out) throw IOError("cannot open " + path);
  out << "mu_re,mu_im,lambda_re,lambda_im,value_re,value_im,value_fro\n";
  char buf[256];
  for (int i = 0; i < n_re; ++i) {
    double re = n_re == 1 ? re_lo : re_lo + (re_hi - re_lo) * i / (n_re - 1);
    for (int j = 0; j < n_im; ++j) {
      double im = n_im == 1 ? im_lo : im_lo + (im_hi - im_lo) * j / (n_im - 1);
      CMat v = eval_kernel(kind, f, {re, im}, lambda);
      Complex head = v.size() ? v(0, 0) : Complex(0, 0);
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", re, im, lambda.real(),
                    lambda.imag(), head.real(), head.imag(), v.norm());
      out << buf;
    }
  }
  if (!out) throw IOError("write failed: " + path);
}

}  // namespace dbr
