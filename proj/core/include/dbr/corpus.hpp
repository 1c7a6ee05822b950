#pragma once

#include <string>
#include <vector>

#include "dbr/schur.hpp"

namespace dbr {

struct CorpusEntry {
  std::string name;
  SchurFunction f;
};

/// Deterministic desk-scale test corpus: constants (zero, strict contraction,
/// 2x2 with singular values {1, 0.3}), two scalar Blaschke factors, and a
/// degree-3 random strictly contractive rational function derived from `seed`.
std::vector<CorpusEntry> standard_corpus(std::uint64_t seed = 20240803);

/// The degree-3 member alone (state-space form, Hurwitz A, sup-norm < 1).
SchurFunction random_contractive_rational(std::uint64_t seed, int degree = 3);

}  // namespace dbr
