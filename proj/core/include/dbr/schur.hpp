#pragma once

#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dbr/types.hpp"

namespace dbr {

enum class Domain { HalfPlane, Disk };

/// Contractive analytic function on the right half-plane or the unit disk,
/// kept in a closed finitely-described variant set so that the adjoint flip
/// phi~(mu) = phi(conj(mu))* and serialization are exact.
class SchurFunction {
 public:
  struct Constant {
    CMat d;  // p x m
  };
  struct BlaschkeScalar {
    Complex a;  // zero in C+, function (mu - a) / (mu + conj(a))
  };
  // Half-plane: phi(mu) = d + c (mu - a)^{-1} b.
  // Disk:       phi(z)  = d + z c (1 - z a)^{-1} b.
  struct Rational {
    CMat a, b, c, d;
  };

  static SchurFunction constant(CMat d, Domain dom = Domain::HalfPlane);
  static SchurFunction blaschke(Complex zero);
  static SchurFunction rational(CMat a, CMat b, CMat c, CMat d, Domain dom = Domain::HalfPlane);

  Domain domain() const { return domain_; }
  Eigen::Index output_dim() const { return p_; }  // dim Y
  Eigen::Index input_dim() const { return m_; }   // dim U

  /// Pointwise value, a p x m matrix.
  CMat eval(Complex point) const;

  /// The function mu -> phi(conj(mu))*, exact on the variant set.
  SchurFunction adjoint_flip() const;

  /// Transfer to the disk: g(z) = phi(mu_alpha(z)).
  SchurFunction to_disk(Complex alpha) const;

  nlohmann::json to_json() const;
  static SchurFunction from_json(const nlohmann::json& j);

  const std::variant<Constant, BlaschkeScalar, Rational>& data() const { return data_; }

  bool is_constant() const { return std::holds_alternative<Constant>(data_); }
  bool is_blaschke() const { return std::holds_alternative<BlaschkeScalar>(data_); }

  /// Value at Re -> +infinity (half-plane) resp. the feedthrough term (disk).
  CMat value_at_infinity() const;

 private:
  SchurFunction() = default;

  Domain domain_ = Domain::HalfPlane;
  Eigen::Index p_ = 0, m_ = 0;
  std::variant<Constant, BlaschkeScalar, Rational> data_;
};

/// z_alpha(mu) = (alpha - mu) / (conj(alpha) + mu), maps C+ onto D.
Complex mobius_to_disk(Complex alpha, Complex mu);

/// mu_alpha(z) = (alpha - conj(alpha) z) / (1 + z), inverse of the above.
Complex mobius_to_halfplane(Complex alpha, Complex z);

struct ContractivityReport {
  double max_singular_value = 0.0;
  Complex argmax_point;
  bool flagged = false;  // max exceeds 1 + 1e-8
};

/// Samples the largest singular value on a logarithmic boundary grid
/// (imaginary axis shifted by 1e-9) and quasi-random interior points.
ContractivityReport contractivity_scan(const SchurFunction& f, int n_boundary, int n_interior);

}  // namespace dbr
