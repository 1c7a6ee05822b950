#include "dbr/model_c.hpp"

#include <cmath>

namespace dbr {
namespace model_c {

namespace {

constexpr double kDegenTol = 1e-8;

void check_not_degenerate(const SpanBasis& basis, Complex alpha) {
  for (Complex node : basis.nodes())
    if (std::abs(alpha - std::conj(node)) < kDegenTol)
      throw DegenerateNodeError("resolvent parameter collides with a conjugated basis node");
}

}  // namespace

GeneratorImage apply_generator(const SchurFunction& f, const NodePair& pair) {
  if (!(pair.lambda.real() > 0.0)) throw DomainError("generator node must lie in the right half-plane");
  if (pair.u.size() != f.input_dim()) throw DimensionError("generator vector must live in the input space");
  GeneratorImage image;
  image.basis = SpanBasis::build(KernelKind::kc(), f, {std::conj(pair.lambda)});
  image.state = image.basis.unit_section(0, pair.u);
  image.state.coeffs *= pair.lambda;
  image.output = f.eval(pair.lambda) * pair.u;
  return image;
}

double energy_identity_check(const SchurFunction& f, const std::vector<NodePair>& pairs) {
  if (pairs.empty()) throw DomainError("energy identity needs at least one pair");
  double worst = 0.0;
  for (const NodePair& p1 : pairs) {
    for (const NodePair& p2 : pairs) {
      Complex lhs = (p2.u.adjoint() * p1.u)(0, 0) -
                    ((f.eval(p2.lambda) * p2.u).adjoint() * (f.eval(p1.lambda) * p1.u))(0, 0);
      CMat kc = eval_kernel(KernelKind::kc(), f, std::conj(p2.lambda), std::conj(p1.lambda));
      Complex rhs = (std::conj(p2.lambda) + p1.lambda) * (p2.u.adjoint() * kc * p1.u)(0, 0);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
  }
  return worst;
}

SpanResult resolvent_on_span(const SpanBasis& basis, const ModelVector& x, Complex alpha) {
  if (!(alpha.real() > 0.0)) throw DomainError("resolvent parameter must lie in the right half-plane");
  if (x.coeffs.size() != basis.dim()) throw DimensionError("coefficient length does not match the basis");
  check_not_degenerate(basis, alpha);

  SpanResult result;
  result.basis = basis.with_node(std::conj(alpha));
  Eigen::Index d = basis.block_dim();
  result.vec.coeffs = CVec::Zero(result.basis.dim());
  CVec tail = CVec::Zero(d);
  for (std::size_t j = 0; j < basis.nodes().size(); ++j) {
    Complex den = alpha - std::conj(basis.nodes()[j]);
    CVec cj = x.coeffs.segment(static_cast<Eigen::Index>(j) * d, d) / den;
    result.vec.coeffs.segment(static_cast<Eigen::Index>(j) * d, d) = cj;
    tail -= cj;
  }
  result.vec.coeffs.tail(d) = tail;
  return result;
}

CVec tau(const SpanBasis& basis, const ModelVector& x, Complex alpha) {
  if (!(alpha.real() > 0.0)) throw DomainError("tau parameter must lie in the right half-plane");
  if (x.coeffs.size() != basis.dim()) throw DimensionError("coefficient length does not match the basis");
  check_not_degenerate(basis, alpha);
  const SchurFunction& f = basis.schur();
  Eigen::Index d = basis.block_dim();
  CMat phi_alpha = f.eval(alpha);
  CVec out = CVec::Zero(f.output_dim());
  for (std::size_t j = 0; j < basis.nodes().size(); ++j) {
    Complex den = alpha - std::conj(basis.nodes()[j]);
    out += (f.eval(std::conj(basis.nodes()[j])) - phi_alpha) *
           x.coeffs.segment(static_cast<Eigen::Index>(j) * d, d) / den;
  }
  return out;
}

SpanResult apply_A_regularized(const SchurFunction& f, Complex alpha, Complex node, const CVec& u) {
  if (!(alpha.real() > 0.0) || !(node.real() > 0.0)) throw DomainError("points must lie in the right half-plane");
  Complex den = alpha - std::conj(node);
  if (std::abs(den) < kDegenTol)
    throw DegenerateNodeError("regularized action degenerates when alpha equals the conjugated node");
  SpanResult result;
  result.basis = SpanBasis::build(KernelKind::kc(), f, {node, std::conj(alpha)});
  Eigen::Index d = result.basis.block_dim();
  if (u.size() != d) throw DimensionError("vector dimension mismatch");
  result.vec.coeffs = CVec::Zero(2 * d);
  result.vec.coeffs.head(d) = std::conj(node) * u / den;
  result.vec.coeffs.tail(d) = -alpha * u / den;
  return result;
}

Evaluator resolvent_generic(const SchurFunction& f, Complex alpha, const Evaluator& g, const CVec& tau_g) {
  if (!(alpha.real() > 0.0)) throw DomainError("resolvent parameter must lie in the right half-plane");
  SchurFunction flip = f.adjoint_flip();
  CVec tg = tau_g;
  return [flip, alpha, g, tg](Complex mu) -> CVec { return (g(mu) - flip.eval(mu) * tg) / (alpha + mu); };
}

CVec apply_Cc_zero_sum(const SpanBasis& basis, const ModelVector& x, double cancel_tol) {
  if (x.coeffs.size() != basis.dim()) throw DimensionError("coefficient length does not match the basis");
  const SchurFunction& f = basis.schur();
  Eigen::Index d = basis.block_dim();
  CVec sum = CVec::Zero(d);
  for (std::size_t j = 0; j < basis.nodes().size(); ++j)
    sum += x.coeffs.segment(static_cast<Eigen::Index>(j) * d, d);
  if (sum.norm() > cancel_tol * std::max(1.0, x.coeffs.norm()))
    throw DomainError("coefficients do not cancel at infinity; element is outside the regularized domain");
  CVec out = CVec::Zero(f.output_dim());
  for (std::size_t j = 0; j < basis.nodes().size(); ++j)
    out += f.eval(std::conj(basis.nodes()[j])) * x.coeffs.segment(static_cast<Eigen::Index>(j) * d, d);
  return out;
}

CVec semiexplicit_output(const SpanBasis& basis, const ModelVector& x, const CVec& u, Complex lambda) {
  if (!(lambda.real() > 0.0)) throw DomainError("lambda must lie in the right half-plane");
  const SchurFunction& f = basis.schur();
  Eigen::Index d = basis.block_dim();
  if (u.size() != d) throw DimensionError("input vector dimension mismatch");
  // gamma_lambda = C_c(x - e_c(lambda)* u) over the basis extended by lambda.
  std::vector<Complex> nodes = basis.nodes();
  CVec coeffs(basis.dim() + d);
  coeffs.head(basis.dim()) = x.coeffs;
  coeffs.tail(d) = -u;
  nodes.push_back(lambda);
  CVec gamma = CVec::Zero(f.output_dim());
  CVec sum = CVec::Zero(d);
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    CVec cj = coeffs.segment(static_cast<Eigen::Index>(j) * d, d);
    gamma += f.eval(std::conj(nodes[j])) * cj;
    sum += cj;
  }
  if (sum.norm() > 1e-10 * std::max(1.0, coeffs.norm()))
    throw DomainError("(x, u) is not a regularized pair: coefficients do not cancel at infinity");
  return gamma + f.eval(std::conj(lambda)) * u;
}

DualApplyResult dual_apply(const SchurFunction& f, const SpanBasis& basis, const ModelVector& x, const CVec& y,
                           const std::vector<double>& eta_schedule) {
  if (eta_schedule.size() < 3) throw DomainError("eta schedule needs at least three entries");
  for (std::size_t i = 1; i < eta_schedule.size(); ++i)
    if (!(eta_schedule[i] > eta_schedule[i - 1])) throw DomainError("eta schedule must increase");
  if (!(eta_schedule.back() >= 1e6)) throw DomainError("eta schedule must reach 1e6");
  SchurFunction flip = f.adjoint_flip();
  if (y.size() != flip.input_dim()) throw DimensionError("y must live in the output space");

  DualApplyResult result;
  for (double eta : eta_schedule) {
    Complex mu(eta, 0.0);
    result.estimates.push_back(Complex(eta, 0.0) * basis.point_eval(x, mu) + flip.eval(mu) * y);
  }
  // First-order Richardson in 1/eta on consecutive estimates.
  std::vector<CVec> extrapolated;
  for (std::size_t i = 0; i + 1 < result.estimates.size(); ++i) {
    double r = eta_schedule[i + 1] / eta_schedule[i];
    extrapolated.push_back((r * result.estimates[i + 1] - result.estimates[i]) / (r - 1.0));
  }
  result.u = extrapolated.back();
  result.extrapolation_residual =
      (extrapolated[extrapolated.size() - 1] - extrapolated[extrapolated.size() - 2]).norm();
  if (result.extrapolation_residual > 1e-6 * (1.0 + result.u.norm()))
    throw ConvergenceError("dual limit extrapolation did not settle");

  SpanBasis b = basis;
  ModelVector xv = x;
  CVec u = result.u;
  CVec yv = y;
  result.z = [b, xv, u, yv, flip](Complex mu) -> CVec {
    return mu * b.point_eval(xv, mu) + flip.eval(mu) * yv - u;
  };
  return result;
}

CVec dual_limit_closed_form(const SchurFunction& f, const SpanBasis& basis, const ModelVector& x,
                            const CVec& y) {
  CMat dinf = f.value_at_infinity();
  Eigen::Index d = basis.block_dim();
  CVec u = dinf.adjoint() * y;
  for (std::size_t j = 0; j < basis.nodes().size(); ++j) {
    CVec cj = x.coeffs.segment(static_cast<Eigen::Index>(j) * d, d);
    u += cj - dinf.adjoint() * (f.eval(std::conj(basis.nodes()[j])) * cj);
  }
  return u;
}

bool ExtRealization::is_hurwitz() const {
  if (A.rows() == 0) return true;
  Eigen::ComplexEigenSolver<CMat> eig(A);
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    if (eig.eigenvalues()(i).real() >= 0.0) return false;
  return true;
}

bool ExtRealization::is_energy_preserving(double tol) const {
  double r1 = (A + A.adjoint() + C.adjoint() * C).norm();
  double r2 = (B + C.adjoint() * D).norm();
  return r1 <= tol && r2 <= tol;
}

CMat ExtRealization::transfer(Complex mu) const {
  if (A.rows() == 0) return D;
  CMat shifted = mu * CMat::Identity(A.rows(), A.cols()) - A;
  return D + C * shifted.partialPivLu().solve(B);
}

DeltaResult intertwiner_delta(const SchurFunction& f, const ExtRealization& ext, const SpanBasis& kc_basis) {
  if (kc_basis.kind().tag != KernelTag::Kc) throw DomainError("delta needs a Kc span basis");
  if (!ext.is_hurwitz()) throw StabilityError("external state matrix must be Hurwitz");
  Eigen::Index n = ext.A.rows();
  Eigen::Index m = kc_basis.block_dim();
  Eigen::Index cols = kc_basis.dim();
  DeltaResult result;
  result.delta = CMat::Zero(n, cols);
  for (std::size_t j = 0; j < kc_basis.nodes().size(); ++j) {
    Complex lambda = std::conj(kc_basis.nodes()[j]);
    if (n > 0) {
      CMat shifted = lambda * CMat::Identity(n, n) - ext.A;
      result.delta.block(0, static_cast<Eigen::Index>(j) * m, n, m) = shifted.partialPivLu().solve(ext.B);
    }
  }
  CMat against_gram = result.delta.adjoint() * result.delta - kc_basis.gram().entries;
  result.isometry_residual = against_gram.size() ? against_gram.cwiseAbs().maxCoeff() : 0.0;

  double worst = 0.0;
  for (std::size_t j = 0; j < kc_basis.nodes().size(); ++j) {
    Complex lambda = std::conj(kc_basis.nodes()[j]);
    CMat dj = result.delta.block(0, static_cast<Eigen::Index>(j) * m, n, m);
    if (n > 0) worst = std::max(worst, (ext.A * dj + ext.B - lambda * dj).norm());
    CMat out_row = (n > 0 ? CMat(ext.C * dj + ext.D) : ext.D) - f.eval(lambda);
    worst = std::max(worst, out_row.norm());
  }
  result.intertwine_residual = worst;
  return result;
}

ConservativityReport conservativity_probe(const SchurFunction& f, Complex alpha, const std::vector<CVec>& ys,
                                          const SpanBasis& dense_basis, const std::vector<Complex>& probes,
                                          double in_span_tol) {
  if (dense_basis.kind().tag != KernelTag::Kc) throw DomainError("conservativity probe needs a Kc span");
  if (probes.empty()) throw DomainError("conservativity probe needs held-out probe points");
  SchurFunction flip = f.adjoint_flip();
  ConservativityReport report;

  for (const CVec& y : ys) {
    if (y.size() != f.output_dim()) throw DimensionError("probe vector must live in the output space");
    Evaluator g = [flip, alpha, y](Complex mu) -> CVec { return (flip.eval(mu) * y) / (alpha + mu); };
    ProjectionResult proj = project(dense_basis, g, probes);
    double scale = 0.0;
    for (Complex t : probes) scale = std::max(scale, g(t).norm());
    ConservativitySample sample;
    if (scale > 0.0) {
      sample.pointwise_residual_rel = proj.max_residual / scale;
      sample.norm_ratio = dense_basis.norm(proj.vec) / scale;
      sample.in_span = sample.pointwise_residual_rel < in_span_tol;
    } else {
      sample.in_span = true;  // zero function is trivially in the span
    }
    report.samples.push_back(sample);
  }

  // Sampled surrogate for the kernel condition: stack phi~ over the probes and
  // test the smallest singular value.
  Eigen::Index p = f.output_dim();
  Eigen::Index m = f.input_dim();
  CMat stacked(static_cast<Eigen::Index>(probes.size()) * m, p);
  for (std::size_t k = 0; k < probes.size(); ++k)
    stacked.block(static_cast<Eigen::Index>(k) * m, 0, m, p) = flip.eval(probes[k]);
  Eigen::JacobiSVD<CMat> svd(stacked);
  double smin = svd.singularValues().size() ? svd.singularValues()(svd.singularValues().size() - 1) : 0.0;
  report.phi_tilde_injective = smin > 1e-8;

  bool any_nonzero_in_span = false;
  for (std::size_t i = 0; i < report.samples.size(); ++i)
    if (ys[i].norm() > 0.0 && report.samples[i].in_span) any_nonzero_in_span = true;
  report.conservative = !any_nonzero_in_span && report.phi_tilde_injective;
  return report;
}

ObservableModel::ObservableModel(SchurFunction f) : f_(std::move(f)), flip_(f_.adjoint_flip()) {}

SpanBasis ObservableModel::build_span(const std::vector<Complex>& nodes, double pinv_cutoff) const {
  return SpanBasis::build(KernelKind::ko(), f_, nodes, pinv_cutoff);
}

GeneratorImage ObservableModel::apply_generator(Complex lambda, const CVec& y) const {
  if (!(lambda.real() > 0.0)) throw DomainError("generator node must lie in the right half-plane");
  if (y.size() != f_.output_dim()) throw DimensionError("generator vector must live in the output space");
  GeneratorImage image;
  image.basis = SpanBasis::build(KernelKind::ko(), f_, {std::conj(lambda)});
  image.state = image.basis.unit_section(0, y);
  image.state.coeffs *= lambda;
  image.output = flip_.eval(lambda) * y;
  return image;
}

Evaluator ObservableModel::resolvent(const SpanBasis& ko_basis, const ModelVector& x, Complex alpha) const {
  if (!(alpha.real() > 0.0)) throw DomainError("resolvent parameter must lie in the right half-plane");
  CVec x_alpha = ko_basis.point_eval(x, alpha);
  SpanBasis b = ko_basis;
  ModelVector xv = x;
  return [b, xv, alpha, x_alpha](Complex mu) -> CVec {
    if (std::abs(alpha - mu) < kDegenTol)
      throw DegenerateNodeError("observable resolvent evaluator probed at its parameter");
    return (b.point_eval(xv, mu) - x_alpha) / (alpha - mu);
  };
}

CVec ObservableModel::Co_of_resolvent(const SpanBasis& ko_basis, const ModelVector& x, Complex alpha) const {
  return ko_basis.point_eval(x, alpha);
}

Evaluator ObservableModel::Bo_section(Complex alpha, const CVec& u) const {
  if (!(alpha.real() > 0.0)) throw DomainError("parameter must lie in the right half-plane");
  if (u.size() != f_.input_dim()) throw DimensionError("vector must live in the input space");
  SchurFunction f = f_;
  CMat phi_alpha = f.eval(alpha);
  CVec uv = u;
  return [f, alpha, phi_alpha, uv](Complex mu) -> CVec {
    if (std::abs(alpha - mu) < kDegenTol)
      throw DegenerateNodeError("section evaluator probed at its parameter");
    return (f.eval(mu) - phi_alpha) * uv / (alpha - mu);
  };
}

double ObservableModel::duality_gram_residual(const std::vector<Complex>& nodes) const {
  GramMatrix go = gram(KernelKind::ko(), f_, nodes);
  GramMatrix gc = gram(KernelKind::kc(), flip_, nodes);
  if (go.entries.size() == 0) return 0.0;
  return (go.entries - gc.entries).cwiseAbs().maxCoeff();
}

double dual_resolvent_law_residual(const SpanBasis& kc_basis, const ModelVector& x, Complex alpha,
                                   const std::vector<ModelVector>& ys) {
  SpanResult reg = resolvent_on_span(kc_basis, x, alpha);
  Complex ab = std::conj(alpha);
  Eigen::Index d = kc_basis.block_dim();
  double worst = 0.0;
  for (const ModelVector& y : ys) {
    Complex lhs;
    {
      // <(alpha - A_c)^{-1} x, y> in exact span arithmetic over the augmented basis.
      ModelVector y_aug{CVec::Zero(reg.basis.dim())};
      y_aug.coeffs.head(kc_basis.dim()) = y.coeffs;
      lhs = reg.basis.inner(reg.vec, y_aug);
    }
    // <x, z> with z = (conj(alpha) - A_c*)^{-1} y known only pointwise.
    CVec y_at_ab = kc_basis.point_eval(y, ab);
    Complex rhs = 0.0;
    for (std::size_t j = 0; j < kc_basis.nodes().size(); ++j) {
      Complex nu = kc_basis.nodes()[j];
      CVec z_nu = (kc_basis.point_eval(y, nu) - y_at_ab) / (ab - nu);
      rhs += (z_nu.adjoint() * x.coeffs.segment(static_cast<Eigen::Index>(j) * d, d))(0, 0);
    }
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

}  // namespace model_c
}  // namespace dbr
