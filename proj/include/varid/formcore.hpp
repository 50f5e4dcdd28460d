#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "json.hpp"

#include "varid/linsolve.hpp"
#include "varid/sparse.hpp"
#include "varid/types.hpp"

namespace varid {

/// Discrete (V, H, j): two Gram matrices on one coefficient space. j is the
/// identity on coefficients; gamma = ||j||.
struct SpacePair {
  ComplexSparseMatrix gram_V;
  ComplexSparseMatrix gram_H;
  double gamma = 0.0;

  int size() const { return gram_V.rows(); }
  double norm_V(const Vector& v) const;
  double norm_H(const Vector& v) const;
  /// Dual norm of a functional vector phi (w -> w^H phi): sqrt(phi^H G_V^{-1} phi).
  double norm_Vstar(const Vector& phi) const;
  /// Riesz representative G_V^{-1} phi.
  Vector riesz_V(const Vector& phi) const;

 private:
  friend SpacePair make_space_pair(ComplexSparseMatrix, ComplexSparseMatrix, const NumericPolicy&);
  std::shared_ptr<const SparseLU> gram_V_lu_;
};

/// Validates the Grams and computes gamma.
SpacePair make_space_pair(ComplexSparseMatrix gram_V, ComplexSparseMatrix gram_H,
                          const NumericPolicy& policy = default_policy());

struct FormSet {
  ComplexSparseMatrix A1;    // a1(v, w) = w^H A1 v on V x V
  ComplexSparseMatrix Cmat;  // c(x, w) = w^H Cmat x on H x V
  double c_t = 0.0;
  double C_t = 0.0;
  double M_tm = 0.0;
};

/// Fills c_t, C_t, M_tm from the exact discrete operator norms, with upper
/// bounds inflated and the lower bound deflated by policy.bound_safety.
/// Throws WellPosednessFailure when A1 is degenerate.
/// A known coercivity constant (Re a1(v,v) >= c |v|_V^2) may be supplied to
/// skip the inf-sup computation.
FormSet make_form_set(ComplexSparseMatrix A1, ComplexSparseMatrix Cmat, const SpacePair& sp,
                      const NumericPolicy& policy = default_policy(),
                      std::optional<double> coercivity = std::nullopt);

double embedding_constant(const SpacePair& sp, const NumericPolicy& policy = default_policy());

struct InfSupResult {
  double value = 0.0;
  double lower = 0.0;  // value reduced by the Ritz residual
  bool nondegenerate = false;
};
/// min_v max_w |w^H A1 v| / (|v|_V |w|_V). Singular A1 gives {0, false}.
InfSupResult inf_sup_constant(const ComplexSparseMatrix& A1, const SpacePair& sp,
                              const NumericPolicy& policy = default_policy());

/// sup |w^H F v| / (|v|_left |w|_right), together with a certified-ish upper
/// bound (Ritz residual and bound_safety added).
struct NormResult {
  double value = 0.0;
  double upper = 0.0;
};
NormResult form_norm(const ComplexSparseMatrix& F, const ComplexSparseMatrix& left_gram,
                     const ComplexSparseMatrix& right_gram, const NumericPolicy& policy = default_policy());

double neumann_margin(const FormSet& fs, const SpacePair& sp);

enum class CertificateKind { Neumann, Pivoting };

struct Certificate {
  CertificateKind kind = CertificateKind::Pivoting;
  double margin = 0.0;
  double condition_estimate = 0.0;
};

/// T_t, C^V = T_t^{-1} Cmat (applied through a factorization of A1) and the
/// system A1 + Cmat with its invertibility certificate.
class OperatorBundle {
 public:
  OperatorBundle(FormSet fs, SpacePair sp, const NumericPolicy& policy = default_policy());

  const FormSet& forms() const { return fs_; }
  const SpacePair& spaces() const { return sp_; }
  const ComplexSparseMatrix& system() const { return system_; }
  const Certificate& certificate() const { return certificate_; }
  int size() const { return system_.rows(); }
  const NumericPolicy& policy() const { return policy_; }

  Vector apply_T(const Vector& v) const { return fs_.A1 * v; }
  Vector solve_T(const Vector& phi) const { return a1_lu_->solve(phi); }
  Vector apply_CV(const Vector& x) const { return a1_lu_->solve(fs_.Cmat * x); }
  /// Dense C^V; only for size() <= policy.dense_limit.
  DenseMatrix dense_CV() const;

  SolveReport solve_system(const Vector& phi) const;
  const SparseLU& system_factor() const { return *system_lu_; }

  /// ||(I + C^V)^{-1}||_{V->V} = ||A^{-1} A1||_V. Dense up to dense_limit,
  /// Lanczos beyond. Computed once.
  double inverse_factor_norm() const;

 private:
  FormSet fs_;
  SpacePair sp_;
  NumericPolicy policy_;
  ComplexSparseMatrix system_;
  std::shared_ptr<const SparseLU> a1_lu_;
  std::shared_ptr<const SparseLU> system_lu_;
  Certificate certificate_;
  struct NormCache {
    std::once_flag once;
    double value = 0.0;
  };
  std::shared_ptr<NormCache> norm_cache_ = std::make_shared<NormCache>();
};

/// ||A^{-1} A1||_V for a factorized system A: dense up to dense_limit,
/// Lanczos (with the Ritz residual added) beyond.
double inverse_factor_norm(const ComplexSparseMatrix& A1, const SparseLU& system_lu, const SpacePair& sp,
                           const NumericPolicy& policy = default_policy());

/// Throws SingularMatrix if neither certificate holds.
OperatorBundle build_operator_bundle(const FormSet& fs, const SpacePair& sp,
                                     const NumericPolicy& policy = default_policy());

struct VariationalSolution {
  Vector u;
  SolveReport report;
  std::optional<double> a_priori_bound;  // (1/c_t) ||(I+C^V)^{-1}|| ||phi||_{V*}
  bool bound_holds = true;
};

/// Solves (A1 + Cmat) u = phi and, when the dense factor norm is affordable,
/// checks the a-priori bound.
VariationalSolution solve_variational(const OperatorBundle& bundle, const Vector& phi);

struct FactorizationReport {
  double relative_defect = 0.0;  // ||A - A1 (I + C^V)||_F / ||A||_F
  bool singular = false;
  int kernel_dim_system = 0;
  int kernel_dim_factor = 0;
  double kernel_angle = 0.0;  // ||(I - Q1 Q1^H) Q2||_2, 0 when both kernels are trivial
  std::string note;
};

/// Dense check of A = A1 (I + C^V) and of ker A = ker(I + C^V). Never throws
/// on singular systems; A1 itself must be invertible.
FactorizationReport factorization_check(const FormSet& fs, const SpacePair& sp,
                                        const NumericPolicy& policy = default_policy());
FactorizationReport factorization_check(const OperatorBundle& bundle, const NumericPolicy& policy = default_policy());

/// {gamma, c_t, C_t, M_tm, margin, condition_estimate}
nlohmann::json diagnostics_json(const OperatorBundle& bundle);

std::string to_string(CertificateKind kind);

}  // namespace varid
