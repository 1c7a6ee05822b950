#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dbr/schur.hpp"
#include "dbr/types.hpp"

namespace dbr {

class SpanBasis;

enum class KernelTag {
  H2,      // k(mu,lambda) = 1 / (mu + conj(lambda)), scalar
  Ko,      // (1 - phi(mu) phi(lambda)*) / (mu + conj(lambda))
  Kc,      // (1 - phi(conj(mu))* phi(conj(lambda))) / (mu + conj(lambda))
  DiskKo,  // (1 - phi(z) phi(w)*) / (1 - z conj(w))
  DiskKc,  // (1 - phi(conj(z))* phi(conj(w))) / (1 - z conj(w))
  Kc1d,    // dual (+1)-rigged kernel of the controllable state space
  Kcm1d,   // dual (-1)-rigged: (conj(beta) - mu)(beta - conj(lambda)) Kc
  Kcm1,    // (-1)-rigged:      (beta + mu)(conj(beta) + conj(lambda)) Kc
  Kc1,     // (+1)-rigged, needs a tau projection (approximate)
  Ko1,     // (+1)-rigged kernel of the observable state space
  Kom1,    // (-1)-rigged:      (beta - mu)(conj(beta) - conj(lambda)) Ko
  Kom1d,   // dual (-1)-rigged: (conj(beta) + mu)(beta + conj(lambda)) Ko
  Ko1d,    // dual (+1)-rigged, needs a tau projection (approximate)
};

struct KernelKind {
  KernelTag tag = KernelTag::H2;
  Complex beta{1.0, 0.0};  // rigging parameter, used by the rigged tags only

  static KernelKind h2() { return {KernelTag::H2, {1.0, 0.0}}; }
  static KernelKind ko() { return {KernelTag::Ko, {1.0, 0.0}}; }
  static KernelKind kc() { return {KernelTag::Kc, {1.0, 0.0}}; }
  static KernelKind disk_ko() { return {KernelTag::DiskKo, {1.0, 0.0}}; }
  static KernelKind disk_kc() { return {KernelTag::DiskKc, {1.0, 0.0}}; }
  static KernelKind rigged(KernelTag t, Complex beta) { return {t, beta}; }
};

bool kernel_is_disk(KernelTag tag);
bool kernel_is_rigged(KernelTag tag);
bool kernel_is_approximate(KernelTag tag);  // Kc1, Ko1d
std::string kernel_tag_name(KernelTag tag);

/// Coefficient-space dimension of kernel values: 1 for H2, p for the
/// observable family, m for the controllable family.
Eigen::Index kernel_block_dim(KernelTag tag, const SchurFunction& f);

struct KernelValue {
  CMat value;
  bool approximate = false;  // true when a tau projection entered the evaluation
};

/// Evaluates the selected reproducing-kernel formula at (mu, lambda).
/// Difference-quotient 0/0 points are handled by a central-difference
/// continuation with step 1e-5 once a denominator falls below 1e-8.
/// The approximate tags (Kc1, Ko1d) project through `aux` (a dense span of
/// the corresponding state space); when aux == nullptr a default two-ray
/// 40-node span is built internally.
KernelValue eval_kernel_ex(const KernelKind& kind, const SchurFunction& f, Complex mu, Complex lambda,
                           const SpanBasis* aux = nullptr);

CMat eval_kernel(const KernelKind& kind, const SchurFunction& f, Complex mu, Complex lambda,
                 const SpanBasis* aux = nullptr);

struct GramMatrix {
  CMat entries;  // Hermitian N x N, N = nodes.size() * block_dim
  std::vector<Complex> nodes;
  Eigen::Index block_dim = 1;
  double tol_psd = 1e-10;
};

/// Gram of the kernel sections K(., lambda_j); re-Hermitianized before use.
GramMatrix gram(const KernelKind& kind, const SchurFunction& f, const std::vector<Complex>& nodes,
                const SpanBasis* aux = nullptr);

struct PositivityReport {
  bool pass = false;
  double eig_min = 0.0;
  double eig_max = 0.0;
  Eigen::Index numerical_rank = 0;
};

PositivityReport positivity_check(const GramMatrix& g, double tol_psd = 1e-10);

/// (1/2pi) Integral over iR of <g(i w), h(i w)> dw by Gauss-Legendre after the
/// substitution w = tan(theta). Throws ConvergenceError when doubling the node
/// count moves the result by more than 1e-6 relative.
Complex h2_inner_quadrature(const Evaluator& g, const Evaluator& h, int n_quad = 160);

/// Max relative residual of the disk/half-plane kernel relations
///   DiskKo(z_a(mu), z_a(lambda)) = (conj(a)+mu)(a+conj(lambda))/(2 Re a) Ko(mu,lambda)
///   DiskKc(z_conj(a)(mu), z_conj(a)(lambda)) = (a+mu)(conj(a)+conj(lambda))/(2 Re a) Kc(mu,lambda)
/// over the supplied pairs, both directions checked per pair.
double cayley_kernel_check(const SchurFunction& f, Complex alpha,
                           const std::vector<std::pair<Complex, Complex>>& pairs);

void export_gram_csv(const GramMatrix& g, const std::string& path);
void export_gram_json(const GramMatrix& g, const std::string& path);

/// Rectangular-grid samples of K(mu, lambda) for external plotting. Lambda is
/// held fixed; mu sweeps re in [re_lo, re_hi], im in [im_lo, im_hi].
void export_kernel_grid_csv(const KernelKind& kind, const SchurFunction& f, Complex lambda, double re_lo,
                            double re_hi, double im_lo, double im_hi, int n_re, int n_im,
                            const std::string& path);

}  // namespace dbr
