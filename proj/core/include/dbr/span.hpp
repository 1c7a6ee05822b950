#pragma once

#include <vector>

#include "dbr/kernels.hpp"
#include "dbr/schur.hpp"
#include "dbr/types.hpp"

namespace dbr {

/// Coefficient vector over a SpanBasis; block j multiplies the section
/// K(., node_j). Coefficients differing by a Gram-null vector represent the
/// same space element.
struct ModelVector {
  CVec coeffs;
};

/// Finite-rank model of H_c / H_o: the span of kernel sections at chosen
/// nodes, with the Gram matrix as state metric and a spectral pseudo-inverse
/// (relative cutoff, no ridge) for projections.
class SpanBasis {
 public:
  SpanBasis() = default;

  /// Kinds restricted to Ko, Kc, DiskKo, DiskKc. Throws PositivityError when
  /// the Gram fails its positivity check, DomainError on bad kinds/nodes.
  static SpanBasis build(const KernelKind& kind, const SchurFunction& f, std::vector<Complex> nodes,
                         double pinv_cutoff = 1e-10);

  /// Same basis with one extra node appended (Gram recomputed).
  SpanBasis with_node(Complex extra) const;

  const KernelKind& kind() const { return kind_; }
  const SchurFunction& schur() const { return f_; }
  const std::vector<Complex>& nodes() const { return nodes_; }
  Eigen::Index block_dim() const { return block_dim_; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(nodes_.size()) * block_dim_; }
  const GramMatrix& gram() const { return gram_; }
  const CMat& gram_pinv() const { return pinv_; }
  Eigen::Index numerical_rank() const { return rank_; }
  double pinv_cutoff() const { return pinv_cutoff_; }

  ModelVector zero_vector() const { return ModelVector{CVec::Zero(dim())}; }
  ModelVector unit_section(Eigen::Index node_index, const CVec& u) const;

  /// <x, y> = y^H G x (linear in x, conjugate-linear in y).
  Complex inner(const ModelVector& x, const ModelVector& y) const;
  double norm(const ModelVector& x) const;

  /// Sum_j K(mu, node_j) c_j.
  CVec point_eval(const ModelVector& x, Complex mu) const;

  Evaluator evaluator(const ModelVector& x) const;

 private:
  KernelKind kind_;
  SchurFunction f_ = SchurFunction::constant(CMat::Zero(1, 1));
  std::vector<Complex> nodes_;
  Eigen::Index block_dim_ = 1;
  GramMatrix gram_;
  CMat pinv_;
  Eigen::Index rank_ = 0;
  double pinv_cutoff_ = 1e-10;
};

struct ProjectionResult {
  ModelVector vec;
  Eigen::Index numerical_rank = 0;
  std::vector<double> residuals;  // pointwise |proj(nu) - f(nu)| at the test nodes
  double max_residual = 0.0;
};

/// Galerkin projection from pointwise samples at the basis nodes:
/// coeffs = pinv(G) b with b_j = f(node_j). Rank deficiency is absorbed by
/// the spectral cutoff; never throws for consistent dimensions.
ProjectionResult project(const SpanBasis& basis, const std::vector<CVec>& samples_at_nodes);

/// Same, but samples the evaluator itself and reports residuals at test nodes.
ProjectionResult project(const SpanBasis& basis, const Evaluator& f, const std::vector<Complex>& test_nodes);

struct DecayBoundReport {
  bool pass = true;
  double worst_margin = 0.0;  // max over probes of ||x(mu)|| sqrt(2 Re mu) / ||x||
};

/// Verifies ||x(mu)|| <= (1 + 1e-8) ||x|| / sqrt(2 Re mu) at every probe.
DecayBoundReport decay_bound_check(const SpanBasis& basis, const ModelVector& x,
                                   const std::vector<Complex>& probes);

nlohmann::json span_basis_to_json(const SpanBasis& basis);
nlohmann::json model_vector_to_json(const ModelVector& x);

/// Default dense auxiliary span: two conjugate rays at arg +-pi/6 with radii
/// log-spaced in [0.1, 50].
std::vector<Complex> default_dense_nodes(int count = 40);

}  // namespace dbr
