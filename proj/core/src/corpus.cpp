#include "dbr/corpus.hpp"

#include <cmath>

#include "dbr/rng.hpp"

namespace dbr {

SchurFunction random_contractive_rational(std::uint64_t seed, int degree) {
  if (degree < 1) throw DomainError("rational corpus member needs degree >= 1");
  RngStream rng(seed, "corpus-rational");
  Eigen::Index n = degree;
  // Well-separated stable poles plus a mild random coupling keep the transfer
  // function generic without conditioning trouble.
  CMat a = CMat::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) a(i, i) = Complex(-0.4 - 1.1 * static_cast<double>(i), rng.uniform(-1.0, 1.0));
  a += 0.2 * rng.cmat(n, n);
  Eigen::ComplexEigenSolver<CMat> eig(a);
  double max_re = -1.0;
  for (Eigen::Index i = 0; i < n; ++i) max_re = std::max(max_re, eig.eigenvalues()(i).real());
  if (max_re >= -0.05) a -= (max_re + 0.2) * CMat::Identity(n, n);

  CMat b = rng.cmat(n, 1);
  CMat c = rng.cmat(1, n);
  CMat d = CMat::Constant(1, 1, 0.3 * rng.complex_unit_box());

  SchurFunction raw = SchurFunction::rational(a, b, c, d);
  ContractivityReport scan = contractivity_scan(raw, 200, 200);
  double scale = 0.95 / std::max(scan.max_singular_value, 1e-12);
  if (scale < 1.0) {
    c *= scale;
    d *= scale;
  }
  return SchurFunction::rational(std::move(a), std::move(b), std::move(c), std::move(d));
}

std::vector<CorpusEntry> standard_corpus(std::uint64_t seed) {
  std::vector<CorpusEntry> corpus;
  corpus.push_back({"constant-zero", SchurFunction::constant(CMat::Zero(1, 1))});
  corpus.push_back({"constant-half", SchurFunction::constant(CMat::Constant(1, 1, 0.5))});
  CMat d2(2, 2);
  d2 << 1.0, 0.0, 0.0, 0.3;
  corpus.push_back({"constant-2x2", SchurFunction::constant(d2)});
  corpus.push_back({"blaschke-1", SchurFunction::blaschke({1.0, 0.0})});
  corpus.push_back({"blaschke-2+i", SchurFunction::blaschke({2.0, 1.0})});
  corpus.push_back({"rational-deg3", random_contractive_rational(seed)});
  return corpus;
}

}  // namespace dbr
