#include "dbr/schur.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "dbr/rng.hpp"

namespace dbr {

namespace {

using json = nlohmann::json;

constexpr double kSingularCond = 1e12;

// Solves (M) x = rhs columnwise with a singularity guard on the condition number.
CMat guarded_solve(const CMat& m, const CMat& rhs, Complex point) {
  Eigen::JacobiSVD<CMat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  double smax = svd.singularValues()(0);
  double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (!(smin > 0.0) || smax / smin > kSingularCond) {
    throw SingularError("resolvent numerically singular at point (" + std::to_string(point.real()) + ", " +
                        std::to_string(point.imag()) + ")");
  }
  return svd.solve(rhs);
}

json cmat_to_json(const CMat& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

CMat cmat_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw ConfigError("matrix must be a non-empty array of rows");
  Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  CMat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(j[i].size()) != cols) throw ConfigError("ragged matrix rows");
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto& cell = j[i][c];
      if (!cell.is_array() || cell.size() != 2) throw ConfigError("matrix cells must be [re, im]");
      m(i, c) = Complex(cell[0].get<double>(), cell[1].get<double>());
    }
  }
  return m;
}

}  // namespace

SchurFunction SchurFunction::constant(CMat d, Domain dom) {
  SchurFunction f;
  f.domain_ = dom;
  f.p_ = d.rows();
  f.m_ = d.cols();
  f.data_ = Constant{std::move(d)};
  return f;
}

SchurFunction SchurFunction::blaschke(Complex zero) {
  if (!(zero.real() > 0.0)) throw DomainError("Blaschke zero must lie in the open right half-plane");
  SchurFunction f;
  f.domain_ = Domain::HalfPlane;
  f.p_ = 1;
  f.m_ = 1;
  f.data_ = BlaschkeScalar{zero};
  return f;
}

SchurFunction SchurFunction::rational(CMat a, CMat b, CMat c, CMat d, Domain dom) {
  if (a.rows() != a.cols()) throw DimensionError("state matrix must be square");
  if (b.rows() != a.rows() || c.cols() != a.rows() || c.rows() != d.rows() || b.cols() != d.cols())
    throw DimensionError("inconsistent state-space dimensions");
  if (dom == Domain::HalfPlane && a.rows() > 0) {
    Eigen::ComplexEigenSolver<CMat> eig(a);
    for (Eigen::Index i = 0; i < a.rows(); ++i)
      if (eig.eigenvalues()(i).real() >= 0.0)
        throw StabilityError("state matrix must be Hurwitz for half-plane analyticity");
  }
  SchurFunction f;
  f.domain_ = dom;
  f.p_ = d.rows();
  f.m_ = d.cols();
  f.data_ = Rational{std::move(a), std::move(b), std::move(c), std::move(d)};
  return f;
}

CMat SchurFunction::eval(Complex point) const {
  if (domain_ == Domain::HalfPlane) {
    if (!in_halfplane(point)) throw DomainError("evaluation point must have positive real part");
  } else {
    if (!in_disk(point)) throw DomainError("evaluation point must lie in the open unit disk");
  }
  if (const auto* c = std::get_if<Constant>(&data_)) return c->d;
  if (const auto* b = std::get_if<BlaschkeScalar>(&data_)) {
    CMat v(1, 1);
    v(0, 0) = (point - b->a) / (point + std::conj(b->a));
    return v;
  }
  const auto& r = std::get<Rational>(data_);
  if (r.a.rows() == 0) return r.d;
  if (domain_ == Domain::HalfPlane) {
    CMat shifted = point * CMat::Identity(r.a.rows(), r.a.cols()) - r.a;
    return r.d + r.c * guarded_solve(shifted, r.b, point);
  }
  CMat shifted = CMat::Identity(r.a.rows(), r.a.cols()) - point * r.a;
  return r.d + point * (r.c * guarded_solve(shifted, r.b, point));
}

SchurFunction SchurFunction::adjoint_flip() const {
  if (const auto* c = std::get_if<Constant>(&data_)) return constant(c->d.adjoint(), domain_);
  if (const auto* b = std::get_if<BlaschkeScalar>(&data_)) return blaschke(std::conj(b->a));
  const auto& r = std::get<Rational>(data_);
  return rational(r.a.adjoint(), r.c.adjoint(), r.b.adjoint(), r.d.adjoint(), domain_);
}

SchurFunction SchurFunction::to_disk(Complex alpha) const {
  if (domain_ != Domain::HalfPlane) throw DomainError("to_disk expects a half-plane function");
  if (!(alpha.real() > 0.0)) throw DomainError("Cayley parameter must lie in the open right half-plane");
  if (const auto* c = std::get_if<Constant>(&data_)) return constant(c->d, Domain::Disk);

  // Lift to a half-plane realization, then apply the internal Cayley transform:
  // Ad = (conj(a)+A)(a-A)^{-1}, Bd = sqrt(2 Re a)(a-A)^{-1}B,
  // Cd = sqrt(2 Re a) C(a-A)^{-1}, Dd = phi(a).
  CMat A, B, C;
  if (const auto* b = std::get_if<BlaschkeScalar>(&data_)) {
    double s = std::sqrt(2.0 * b->a.real());
    A = CMat::Constant(1, 1, -std::conj(b->a));
    B = CMat::Constant(1, 1, -s);
    C = CMat::Constant(1, 1, s);
  } else {
    const auto& r = std::get<Rational>(data_);
    A = r.a;
    B = r.b;
    C = r.c;
  }
  CMat Dval = eval(alpha);
  if (A.rows() == 0) return rational(A, B, C, Dval, Domain::Disk);
  double s = std::sqrt(2.0 * alpha.real());
  CMat shifted = alpha * CMat::Identity(A.rows(), A.cols()) - A;
  CMat res = guarded_solve(shifted, CMat::Identity(A.rows(), A.cols()), alpha);
  CMat Ad = (std::conj(alpha) * CMat::Identity(A.rows(), A.cols()) + A) * res;
  CMat Bd = s * res * B;
  CMat Cd = s * (C * res);
  return rational(Ad, Bd, Cd, Dval, Domain::Disk);
}

CMat SchurFunction::value_at_infinity() const {
  if (const auto* c = std::get_if<Constant>(&data_)) return c->d;
  if (std::holds_alternative<BlaschkeScalar>(data_)) return CMat::Constant(1, 1, 1.0);
  return std::get<Rational>(data_).d;
}

json SchurFunction::to_json() const {
  json j;
  j["domain"] = domain_ == Domain::HalfPlane ? "halfplane" : "disk";
  if (const auto* c = std::get_if<Constant>(&data_)) {
    j["kind"] = "constant";
    j["data"] = {{"d", cmat_to_json(c->d)}};
  } else if (const auto* b = std::get_if<BlaschkeScalar>(&data_)) {
    j["kind"] = "blaschke";
    j["data"] = {{"a", {b->a.real(), b->a.imag()}}};
  } else {
    const auto& r = std::get<Rational>(data_);
    j["kind"] = "rational";
    j["data"] = {{"a", cmat_to_json(r.a)}, {"b", cmat_to_json(r.b)}, {"c", cmat_to_json(r.c)},
                 {"d", cmat_to_json(r.d)}};
  }
  return j;
}

SchurFunction SchurFunction::from_json(const json& j) {
  if (!j.contains("kind") || !j.contains("domain") || !j.contains("data"))
    throw ConfigError("function object needs kind, domain, data");
  std::string kind = j["kind"].get<std::string>();
  std::string dom_s = j["domain"].get<std::string>();
  Domain dom;
  if (dom_s == "halfplane")
    dom = Domain::HalfPlane;
  else if (dom_s == "disk")
    dom = Domain::Disk;
  else
    throw ConfigError("domain must be halfplane or disk");

  const json& data = j["data"];
  if (kind == "constant") return constant(cmat_from_json(data.at("d")), dom);
  if (kind == "blaschke") {
    if (dom != Domain::HalfPlane) throw ConfigError("blaschke functions are half-plane only");
    const auto& a = data.at("a");
    if (!a.is_array() || a.size() != 2) throw ConfigError("blaschke zero must be [re, im]");
    return blaschke({a[0].get<double>(), a[1].get<double>()});
  }
  if (kind == "rational")
    return rational(cmat_from_json(data.at("a")), cmat_from_json(data.at("b")), cmat_from_json(data.at("c")),
                    cmat_from_json(data.at("d")), dom);
  throw ConfigError("unknown function kind: " + kind);
}

Complex mobius_to_disk(Complex alpha, Complex mu) {
  if (!(alpha.real() > 0.0)) throw DomainError("Moebius parameter must lie in the open right half-plane");
  if (mu.real() < 0.0) throw DomainError("to_disk expects Re >= 0 (boundary allowed for diagnostics)");
  return (alpha - mu) / (std::conj(alpha) + mu);
}

Complex mobius_to_halfplane(Complex alpha, Complex z) {
  if (!(alpha.real() > 0.0)) throw DomainError("Moebius parameter must lie in the open right half-plane");
  if (std::abs(z) > 1.0 || std::abs(z + 1.0) < 1e-14)
    throw DomainError("to_halfplane expects |z| <= 1 and z != -1");
  return (alpha - std::conj(alpha) * z) / (1.0 + z);
}

ContractivityReport contractivity_scan(const SchurFunction& f, int n_boundary, int n_interior) {
  if (n_boundary < 1) throw DomainError("contractivity_scan needs at least one boundary point");
  ContractivityReport report;
  auto consider = [&](Complex point) {
    CMat v = f.eval(point);
    double sv = v.size() == 0 ? 0.0 : Eigen::JacobiSVD<CMat>(v).singularValues()(0);
    if (sv > report.max_singular_value) {
      report.max_singular_value = sv;
      report.argmax_point = point;
    }
  };

  if (f.domain() == Domain::HalfPlane) {
    const double shift = 1e-9;
    for (int k = 0; k < n_boundary; ++k) {
      double t = n_boundary == 1 ? 0.0 : static_cast<double>(k) / (n_boundary - 1);
      double omega = std::pow(10.0, -3.0 + 6.0 * t);
      consider({shift, omega});
      consider({shift, -omega});
    }
    for (int k = 0; k < n_interior; ++k) {
      double r = std::pow(10.0, -2.0 + 4.0 * halton(k, 2));
      double theta = 3.14159265358979323846 * (halton(k, 3) - 0.5) * 0.98;
      consider({r * std::cos(theta), r * std::sin(theta)});
    }
  } else {
    for (int k = 0; k < n_boundary; ++k) {
      double t = 2.0 * 3.14159265358979323846 * k / n_boundary;
      double r = 1.0 - 1e-9;
      consider({r * std::cos(t), r * std::sin(t)});
    }
    for (int k = 0; k < n_interior; ++k) {
      double r = 0.999 * std::sqrt(halton(k, 2));
      double t = 2.0 * 3.14159265358979323846 * halton(k, 3);
      consider({r * std::cos(t), r * std::sin(t)});
    }
  }
  report.flagged = report.max_singular_value > 1.0 + 1e-8;
  return report;
}

}  // namespace dbr
