#include "dbr/span.hpp"

#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace dbr {

namespace {

bool span_kind_ok(KernelTag tag) {
  return tag == KernelTag::Ko || tag == KernelTag::Kc || tag == KernelTag::DiskKo ||
         tag == KernelTag::DiskKc;
}

}  // namespace

SpanBasis SpanBasis::build(const KernelKind& kind, const SchurFunction& f, std::vector<Complex> nodes,
                           double pinv_cutoff) {
  if (!span_kind_ok(kind.tag)) throw DomainError("span bases are restricted to Ko, Kc, DiskKo, DiskKc");
  if (!(pinv_cutoff > 0.0)) throw DomainError("pinv cutoff must be positive");
  bool disk_kind = kernel_is_disk(kind.tag);
  if ((f.domain() == Domain::Disk) != disk_kind) throw DomainError("kernel kind does not match the function domain");

  SpanBasis basis;
  basis.kind_ = kind;
  basis.f_ = f;
  basis.nodes_ = std::move(nodes);
  basis.block_dim_ = kernel_block_dim(kind.tag, f);
  basis.pinv_cutoff_ = pinv_cutoff;
  basis.gram_ = dbr::gram(kind, f, basis.nodes_);

  PositivityReport pos = positivity_check(basis.gram_, basis.gram_.tol_psd);
  if (!pos.pass) throw PositivityError("gram matrix failed its positivity check");

  Eigen::Index n = basis.dim();
  if (n == 0) {
    basis.pinv_ = CMat(0, 0);
    basis.rank_ = 0;
    return basis;
  }
  Eigen::SelfAdjointEigenSolver<CMat> eig(basis.gram_.entries);
  double largest = std::max(eig.eigenvalues().maxCoeff(), 0.0);
  CVec inv = CVec::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double v = eig.eigenvalues()(i);
    if (v > pinv_cutoff * largest && v > 0.0) {
      inv(i) = 1.0 / v;
      ++basis.rank_;
    }
  }
  basis.pinv_ = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().adjoint();
  return basis;
}

SpanBasis SpanBasis::with_node(Complex extra) const {
  std::vector<Complex> nodes = nodes_;
  nodes.push_back(extra);
  return build(kind_, f_, std::move(nodes), pinv_cutoff_);
}

ModelVector SpanBasis::unit_section(Eigen::Index node_index, const CVec& u) const {
  if (node_index < 0 || node_index >= static_cast<Eigen::Index>(nodes_.size()))
    throw DimensionError("node index out of range");
  if (u.size() != block_dim_) throw DimensionError("section vector has wrong dimension");
  ModelVector x = zero_vector();
  x.coeffs.segment(node_index * block_dim_, block_dim_) = u;
  return x;
}

Complex SpanBasis::inner(const ModelVector& x, const ModelVector& y) const {
  if (x.coeffs.size() != dim() || y.coeffs.size() != dim())
    throw DimensionError("coefficient length does not match the basis");
  if (dim() == 0) return 0.0;
  return (y.coeffs.adjoint() * gram_.entries * x.coeffs)(0, 0);
}

double SpanBasis::norm(const ModelVector& x) const {
  double sq = inner(x, x).real();
  return std::sqrt(std::max(sq, 0.0));
}

CVec SpanBasis::point_eval(const ModelVector& x, Complex mu) const {
  if (x.coeffs.size() != dim()) throw DimensionError("coefficient length does not match the basis");
  CVec out = CVec::Zero(block_dim_);
  for (std::size_t j = 0; j < nodes_.size(); ++j)
    out += eval_kernel(kind_, f_, mu, nodes_[j]) *
           x.coeffs.segment(static_cast<Eigen::Index>(j) * block_dim_, block_dim_);
  return out;
}

Evaluator SpanBasis::evaluator(const ModelVector& x) const {
  SpanBasis self = *this;
  ModelVector vec = x;
  return [self, vec](Complex mu) { return self.point_eval(vec, mu); };
}

ProjectionResult project(const SpanBasis& basis, const std::vector<CVec>& samples_at_nodes) {
  if (samples_at_nodes.size() != basis.nodes().size())
    throw DimensionError("one sample per basis node required");
  Eigen::Index d = basis.block_dim();
  CVec b(basis.dim());
  for (std::size_t j = 0; j < samples_at_nodes.size(); ++j) {
    if (samples_at_nodes[j].size() != d) throw DimensionError("sample dimension mismatch");
    b.segment(static_cast<Eigen::Index>(j) * d, d) = samples_at_nodes[j];
  }
  ProjectionResult result;
  result.vec.coeffs = basis.gram_pinv() * b;
  result.numerical_rank = basis.numerical_rank();
  return result;
}

ProjectionResult project(const SpanBasis& basis, const Evaluator& f, const std::vector<Complex>& test_nodes) {
  std::vector<CVec> samples;
  samples.reserve(basis.nodes().size());
  for (Complex node : basis.nodes()) samples.push_back(f(node));
  ProjectionResult result = project(basis, samples);
  for (Complex t : test_nodes) {
    double r = (basis.point_eval(result.vec, t) - f(t)).norm();
    result.residuals.push_back(r);
    result.max_residual = std::max(result.max_residual, r);
  }
  return result;
}

DecayBoundReport decay_bound_check(const SpanBasis& basis, const ModelVector& x,
                                   const std::vector<Complex>& probes) {
  if (kernel_is_disk(basis.kind().tag)) throw DomainError("decay bound applies to half-plane spans");
  DecayBoundReport report;
  double nrm = basis.norm(x);
  for (Complex mu : probes) {
    if (!in_halfplane(mu)) throw DomainError("decay probes must lie in the right half-plane");
    double lhs = basis.point_eval(x, mu).norm() * std::sqrt(2.0 * mu.real());
    double ratio = nrm > 0.0 ? lhs / nrm : (lhs > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    report.worst_margin = std::max(report.worst_margin, ratio);
    if (lhs > (1.0 + 1e-8) * nrm) report.pass = false;
  }
  return report;
}

nlohmann::json span_basis_to_json(const SpanBasis& basis) {
  nlohmann::json j;
  j["kind"] = kernel_tag_name(basis.kind().tag);
  if (kernel_is_rigged(basis.kind().tag))
    j["beta"] = {basis.kind().beta.real(), basis.kind().beta.imag()};
  j["function"] = basis.schur().to_json();
  nlohmann::json nodes = nlohmann::json::array();
  for (Complex n : basis.nodes()) nodes.push_back({n.real(), n.imag()});
  j["nodes"] = nodes;
  j["pinv_cutoff"] = basis.pinv_cutoff();
  return j;
}

nlohmann::json model_vector_to_json(const ModelVector& x) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < x.coeffs.size(); ++i) j.push_back({x.coeffs(i).real(), x.coeffs(i).imag()});
  return j;
}

std::vector<Complex> default_dense_nodes(int count) {
  if (count < 2) throw DomainError("dense span needs at least two nodes");
  std::vector<Complex> nodes;
  int per_ray = count / 2;
  const double arg = 3.14159265358979323846 / 6.0;
  for (int k = 0; k < per_ray; ++k) {
    double t = per_ray == 1 ? 0.0 : static_cast<double>(k) / (per_ray - 1);
    double r = std::pow(10.0, std::log10(0.1) + t * (std::log10(50.0) - std::log10(0.1)));
    nodes.push_back(std::polar(r, arg));
    nodes.push_back(std::polar(r, -arg));
  }
  return nodes;
}

}  // namespace dbr
