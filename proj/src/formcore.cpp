#include "varid/formcore.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

namespace varid {

namespace {

double gram_norm(const ComplexSparseMatrix& g, const Vector& v) {
  return std::sqrt(std::max(0.0, v.dot(g * v).real()));
}

void require_gram(const ComplexSparseMatrix& g, const char* name) {
  if (g.rows() != g.cols()) throw std::invalid_argument(std::string(name) + " is not square");
  if (g.hermitian_defect() > 1e-12 * std::max(1.0, g.max_abs()))
    throw std::invalid_argument(std::string(name) + " is not Hermitian");
  for (int i = 0; i < g.rows(); ++i)
    if (!(g.coeff(i, i).real() > 0.0)) throw std::invalid_argument(std::string(name) + " is not positive definite");
}

// Largest eigenvalue of a G-self-adjoint operator with its Ritz residual.
RayleighResult top_eigenvalue(int n, std::function<Vector(const Vector&)> apply, const ComplexSparseMatrix& gram,
                              const NumericPolicy& policy) {
  SelfAdjointOperator op{n, std::move(apply), [&gram](const Vector& x) { return gram * x; }};
  return extreme_eigenvalue(op, Extreme::Max, policy);
}

// ||X||_G for the dense map X, with G = L L^H:  ||L^H X L^{-H}||_2.
double dense_gram_operator_norm(const DenseMatrix& x, const ComplexSparseMatrix& gram) {
  const Eigen::LLT<DenseMatrix> llt(gram.to_dense());
  if (llt.info() != Eigen::Success) throw std::invalid_argument("Gram matrix is not positive definite");
  const DenseMatrix lh = llt.matrixU();
  const DenseMatrix lhx = lh * x;
  // (L^H X) L^{-H}  computed as  solve(L, (L^H X)^H)^H
  const DenseMatrix y = llt.matrixL().solve(lhx.adjoint()).adjoint();
  Eigen::BDCSVD<DenseMatrix> svd(y);
  return svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
}

}  // namespace

double SpacePair::norm_V(const Vector& v) const { return gram_norm(gram_V, v); }
double SpacePair::norm_H(const Vector& v) const { return gram_norm(gram_H, v); }

Vector SpacePair::riesz_V(const Vector& phi) const {
  if (!gram_V_lu_) throw std::logic_error("SpacePair was not built by make_space_pair");
  return gram_V_lu_->solve(phi);
}

double SpacePair::norm_Vstar(const Vector& phi) const {
  return std::sqrt(std::max(0.0, phi.dot(riesz_V(phi)).real()));
}

SpacePair make_space_pair(ComplexSparseMatrix gram_V, ComplexSparseMatrix gram_H, const NumericPolicy& policy) {
  require_gram(gram_V, "gram_V");
  require_gram(gram_H, "gram_H");
  if (gram_V.rows() != gram_H.rows()) throw std::invalid_argument("Gram matrices differ in size");
  SpacePair sp;
  sp.gram_V = std::move(gram_V);
  sp.gram_H = std::move(gram_H);
  sp.gram_V_lu_ = std::make_shared<const SparseLU>(sp.gram_V, policy);
  sp.gamma = embedding_constant(sp, policy);
  return sp;
}

double embedding_constant(const SpacePair& sp, const NumericPolicy& policy) {
  const auto r = top_eigenvalue(
      sp.size(), [&](const Vector& x) { return sp.riesz_V(sp.gram_H * x); }, sp.gram_V, policy);
  return std::sqrt(std::max(0.0, r.value));
}

InfSupResult inf_sup_constant(const ComplexSparseMatrix& A1, const SpacePair& sp, const NumericPolicy& policy) {
  if (A1.rows() != sp.size() || A1.cols() != sp.size()) throw std::invalid_argument("A1 does not match the space pair");
  std::unique_ptr<SparseLU> lu;
  try {
    lu = std::make_unique<SparseLU>(A1, policy);
  } catch (const SingularMatrix&) {
    return {};
  }
  // Inverse mode: the top eigenvalue of A1^{-1} G A1^{-H} G is 1/c^2.
  const auto& g = sp.gram_V;
  const auto r = top_eigenvalue(
      sp.size(), [&](const Vector& x) { return lu->solve(g * lu->solve_adjoint(g * x)); }, g, policy);
  if (!(r.value > 0.0)) return {};
  return {1.0 / std::sqrt(r.value), 1.0 / std::sqrt(r.value + r.residual), true};
}

NormResult form_norm(const ComplexSparseMatrix& F, const ComplexSparseMatrix& left_gram,
                     const ComplexSparseMatrix& right_gram, const NumericPolicy& policy) {
  if (F.cols() != left_gram.rows() || F.rows() != right_gram.rows())
    throw std::invalid_argument("form_norm: dimensions do not conform");
  const SparseLU left(left_gram, policy);
  const SparseLU right(right_gram, policy);
  const auto r = top_eigenvalue(
      F.cols(), [&](const Vector& x) { return left.solve(F.adjoint_times(right.solve(F * x))); }, left_gram, policy);
  const double value = std::sqrt(std::max(0.0, r.value));
  return {value, std::sqrt(std::max(0.0, r.value + r.residual)) * (1.0 + policy.bound_safety)};
}

FormSet make_form_set(ComplexSparseMatrix A1, ComplexSparseMatrix Cmat, const SpacePair& sp,
                      const NumericPolicy& policy, std::optional<double> coercivity) {
  if (A1.rows() != sp.size() || A1.cols() != sp.size() || Cmat.rows() != sp.size() || Cmat.cols() != sp.size())
    throw std::invalid_argument("form matrices do not match the space pair");
  FormSet fs;
  if (coercivity) {
    if (!(*coercivity > 0.0)) throw std::invalid_argument("coercivity constant must be positive");
    fs.c_t = *coercivity;
  } else {
    const auto inf = inf_sup_constant(A1, sp, policy);
    if (!inf.nondegenerate) throw WellPosednessFailure("a1 fails the inf-sup condition", INFINITY);
    fs.c_t = inf.lower / (1.0 + policy.bound_safety);
  }
  fs.C_t = form_norm(A1, sp.gram_V, sp.gram_V, policy).upper;
  fs.M_tm = form_norm(Cmat, sp.gram_H, sp.gram_V, policy).upper;
  fs.A1 = std::move(A1);
  fs.Cmat = std::move(Cmat);
  return fs;
}

double neumann_margin(const FormSet& fs, const SpacePair& sp) {
  if (!(fs.c_t > 0.0)) throw std::invalid_argument("neumann_margin requires c_t > 0");
  return sp.gamma * fs.M_tm / fs.c_t;
}

std::string to_string(CertificateKind kind) { return kind == CertificateKind::Neumann ? "neumann" : "pivoting"; }

OperatorBundle::OperatorBundle(FormSet fs, SpacePair sp, const NumericPolicy& policy)
    : fs_(std::move(fs)), sp_(std::move(sp)), policy_(policy) {
  if (!(fs_.c_t > 0.0)) throw WellPosednessFailure("c_t must be positive to build T_t", INFINITY);
  if (fs_.A1.rows() != sp_.size() || fs_.Cmat.rows() != sp_.size())
    throw std::invalid_argument("form matrices do not match the space pair");
  a1_lu_ = std::make_shared<const SparseLU>(fs_.A1, policy_);
  system_ = fs_.A1 + fs_.Cmat;
  certificate_.margin = neumann_margin(fs_, sp_);
  certificate_.kind = certificate_.margin < 1.0 ? CertificateKind::Neumann : CertificateKind::Pivoting;
  system_lu_ = std::make_shared<const SparseLU>(system_, policy_);
  certificate_.condition_estimate = system_lu_->condition_estimate();
  if (certificate_.kind == CertificateKind::Pivoting && !(certificate_.condition_estimate * policy_.pivot_tolerance < 1.0))
    throw SingularMatrix("system condition estimate " + std::to_string(certificate_.condition_estimate) +
                         " exceeds the pivoting certificate limit");
}

DenseMatrix OperatorBundle::dense_CV() const {
  const int n = size();
  if (n > policy_.dense_limit) throw std::invalid_argument("dense C^V requested above dense_limit");
  DenseMatrix cv(n, n);
  for (int j = 0; j < n; ++j) {
    Vector e = Vector::Zero(n);
    e[j] = 1.0;
    cv.col(j) = apply_CV(e);
  }
  return cv;
}

SolveReport OperatorBundle::solve_system(const Vector& phi) const {
  return solve_checked(*system_lu_, system_, phi, policy_);
}

double inverse_factor_norm(const ComplexSparseMatrix& A1, const SparseLU& lu, const SpacePair& sp,
                           const NumericPolicy& policy) {
  const int n = sp.size();
  if (A1.rows() != n || lu.size() != n) throw std::invalid_argument("inverse_factor_norm: size mismatch");
  const auto& g = sp.gram_V;
  if (n <= policy.dense_limit) {
    DenseMatrix x(n, n);
    for (int j = 0; j < n; ++j) {
      Vector e = Vector::Zero(n);
      e[j] = 1.0;
      x.col(j) = lu.solve(A1 * e);
    }
    return dense_gram_operator_norm(x, g);
  }
  const auto r = top_eigenvalue(
      n,
      [&](const Vector& v) {
        const Vector xv = lu.solve(A1 * v);
        return sp.riesz_V(A1.adjoint_times(lu.solve_adjoint(g * xv)));
      },
      g, policy);
  return std::sqrt(std::max(0.0, r.value + r.residual)) * (1.0 + policy.bound_safety);
}

double OperatorBundle::inverse_factor_norm() const {
  std::call_once(norm_cache_->once,
                 [this] { norm_cache_->value = varid::inverse_factor_norm(fs_.A1, *system_lu_, sp_, policy_); });
  return norm_cache_->value;
}

OperatorBundle build_operator_bundle(const FormSet& fs, const SpacePair& sp, const NumericPolicy& policy) {
  return OperatorBundle(fs, sp, policy);
}

VariationalSolution solve_variational(const OperatorBundle& bundle, const Vector& phi) {
  if (phi.size() != bundle.size()) throw std::invalid_argument("functional length does not match the system");
  VariationalSolution out;
  out.report = bundle.solve_system(phi);
  out.u = out.report.solution;
  if (bundle.size() <= bundle.policy().dense_limit) {
    const double bound =
        bundle.inverse_factor_norm() * bundle.spaces().norm_Vstar(phi) / bundle.forms().c_t;
    out.a_priori_bound = bound;
    out.bound_holds = bundle.spaces().norm_V(out.u) <= bound * (1.0 + 1e-8);
  }
  return out;
}

FactorizationReport factorization_check(const FormSet& fs, const SpacePair& sp, const NumericPolicy& policy) {
  const int n = sp.size();
  if (n > policy.dense_limit) throw std::invalid_argument("factorization_check is dense; size exceeds dense_limit");
  FactorizationReport rep;
  const DenseMatrix a1 = fs.A1.to_dense();
  const DenseMatrix c = fs.Cmat.to_dense();
  const DenseMatrix a = a1 + c;
  const Eigen::PartialPivLU<DenseMatrix> lu(a1);
  const DenseMatrix cv = lu.solve(c);
  const DenseMatrix factor = DenseMatrix::Identity(n, n) + cv;
  const double anorm = a.norm();
  const double defect = (a - a1 * factor).norm();
  rep.relative_defect = anorm > 0.0 ? defect / anorm : defect;

  const auto kernel = [&](const DenseMatrix& m) {
    Eigen::BDCSVD<DenseMatrix> svd(m, Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    const double cut = policy.kernel_rank_tolerance * (s.size() ? s[0] : 0.0);
    int rank = 0;
    while (rank < s.size() && s[rank] > cut) ++rank;
    return DenseMatrix(svd.matrixV().rightCols(n - rank));
  };
  const DenseMatrix q1 = kernel(a);
  const DenseMatrix q2 = kernel(factor);
  rep.kernel_dim_system = static_cast<int>(q1.cols());
  rep.kernel_dim_factor = static_cast<int>(q2.cols());
  rep.singular = rep.kernel_dim_system > 0 || rep.kernel_dim_factor > 0;
  if (rep.kernel_dim_system != rep.kernel_dim_factor) {
    rep.kernel_angle = 1.0;
    rep.note = "kernel dimensions differ";
  } else if (rep.kernel_dim_system > 0) {
    const DenseMatrix resid = q2 - q1 * (q1.adjoint() * q2);
    Eigen::JacobiSVD<DenseMatrix> svd(resid);
    rep.kernel_angle = svd.singularValues()[0];
  }
  return rep;
}

FactorizationReport factorization_check(const OperatorBundle& bundle, const NumericPolicy& policy) {
  return factorization_check(bundle.forms(), bundle.spaces(), policy);
}

nlohmann::json diagnostics_json(const OperatorBundle& bundle) {
  const auto& fs = bundle.forms();
  const auto& cert = bundle.certificate();
  return {{"gamma", bundle.spaces().gamma},
          {"c_t", fs.c_t},
          {"C_t", fs.C_t},
          {"M_tm", fs.M_tm},
          {"margin", cert.margin},
          {"condition_estimate", cert.condition_estimate},
          {"certificate", to_string(cert.kind)}};
}

}  // namespace varid
