#include "varid/randinst.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/QR>

#include "varid/random.hpp"

namespace varid {

InstanceTag parse_instance_tag(const std::string& name) {
  if (name == "coercive") return InstanceTag::Coercive;
  if (name == "inf-sup-only") return InstanceTag::InfSupOnly;
  if (name == "singular-system") return InstanceTag::SingularSystem;
  throw std::invalid_argument("unknown instance tag '" + name + "'");
}

std::string to_string(InstanceTag tag) {
  switch (tag) {
    case InstanceTag::Coercive: return "coercive";
    case InstanceTag::InfSupOnly: return "inf-sup-only";
    case InstanceTag::SingularSystem: return "singular-system";
  }
  return "?";
}

namespace {

DenseMatrix hermitian_part(const DenseMatrix& a) {
  DenseMatrix h = 0.5 * (a + a.adjoint());
  for (Eigen::Index i = 0; i < h.rows(); ++i) h(i, i) = h(i, i).real();
  return h;
}

DenseMatrix random_gram(Rng& rng, int n, double scale) {
  const DenseMatrix b = rng.complex_normal_matrix(n, n);
  return hermitian_part(scale * (b.adjoint() * b + n * DenseMatrix::Identity(n, n)));
}

DenseMatrix random_unitary(Rng& rng, int n) {
  const DenseMatrix x = rng.complex_normal_matrix(n, n);
  Eigen::HouseholderQR<DenseMatrix> qr(x);
  return qr.householderQ() * DenseMatrix::Identity(n, n);
}

double spectral_norm(const DenseMatrix& a) {
  Eigen::JacobiSVD<DenseMatrix> svd(a);
  return svd.singularValues()[0];
}

}  // namespace

RandomInstance gen_instance(int n, InstanceTag tag, std::uint64_t seed, const NumericPolicy& policy) {
  if (n < 2 || n > 64) throw std::invalid_argument("random instances need 2 <= n <= 64");
  Rng rng(seed * 0x9E3779B97F4A7C15ull + static_cast<std::uint64_t>(n) * 131 + static_cast<std::uint64_t>(tag));

  const DenseMatrix gv = random_gram(rng, n, 1.0);
  const DenseMatrix gh = random_gram(rng, n, rng.uniform(0.2, 2.0));
  const DenseMatrix lv = Eigen::LLT<DenseMatrix>(gv).matrixL();
  const DenseMatrix lh = Eigen::LLT<DenseMatrix>(gh).matrixL();

  RandomInstance inst;
  inst.n = n;
  inst.tag = tag;
  inst.seed = seed;
  inst.sigma_min = 1.0;

  DenseMatrix a1;
  const bool coercive = tag == InstanceTag::Coercive || (tag == InstanceTag::SingularSystem && seed % 2 == 0);
  if (coercive) {
    const DenseMatrix x = rng.complex_normal_matrix(n, n);
    const DenseMatrix skew = rng.uniform(0.0, 2.0) / std::sqrt(static_cast<double>(n)) * 0.5 * (x - x.adjoint());
    a1 = gv + lv * skew * lv.adjoint();
  } else {
    const double smin = rng.uniform(0.2, 1.0);
    const double smax = smin * rng.uniform(1.0, 5.0);
    Eigen::VectorXd sigma(n);
    for (int i = 0; i < n; ++i) sigma[i] = i == 0 ? smin : rng.uniform(smin, smax);
    const DenseMatrix u = random_unitary(rng, n), w = random_unitary(rng, n);
    a1 = lv * u * sigma.cast<cplx>().asDiagonal() * w * lv.adjoint();
    inst.sigma_min = smin;
  }

  DenseMatrix c;
  if (tag == InstanceTag::SingularSystem) {
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) d[i] = i == n - 1 ? 0.0 : rng.uniform(0.5, 2.0);
    const DenseMatrix y = random_unitary(rng, n), z = random_unitary(rng, n);
    const DenseMatrix p = lv * y * d.cast<cplx>().asDiagonal() * z * lv.adjoint();
    c = p - a1;
  } else {
    const DenseMatrix r = rng.complex_normal_matrix(n, n);
    const double s = inst.sigma_min * std::pow(10.0, rng.uniform(-1.3, 0.5));
    c = (s / spectral_norm(r)) * (lv * r * lh.adjoint());
  }

  inst.sp = make_space_pair(ComplexSparseMatrix::from_dense(gv, true), ComplexSparseMatrix::from_dense(gh, true), policy);
  inst.fs = make_form_set(ComplexSparseMatrix::from_dense(a1), ComplexSparseMatrix::from_dense(c), inst.sp, policy);
  return inst;
}

}  // namespace varid
