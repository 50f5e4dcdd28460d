#pragma once

#include <cstdint>
#include <string>

#include "varid/formcore.hpp"

namespace varid {

enum class InstanceTag { Coercive, InfSupOnly, SingularSystem };

InstanceTag parse_instance_tag(const std::string& name);
std::string to_string(InstanceTag tag);

struct RandomInstance {
  int n = 0;
  InstanceTag tag = InstanceTag::Coercive;
  std::uint64_t seed = 0;
  SpacePair sp;
  FormSet fs;
  double sigma_min = 0.0;  // prescribed inf-sup floor (inf-sup-only tag), 1 otherwise
};

/// Dense random instance, 2 <= n <= 64, built in Gram-weighted coordinates
/// G = L L^H:
///   coercive       A1 = G_V + L_V S L_V^H, S skew-Hermitian
///   inf-sup-only   A1 = L_V U diag(sigma) W L_V^H, U, W unitary, sigma >= sigma_min
///   singular       Cmat = -A1 + P with rank(P) = n - 1
/// Otherwise Cmat = s L_V R L_H^H with a log-uniform scale s, so Neumann
/// margins land on both sides of 1.
RandomInstance gen_instance(int n, InstanceTag tag, std::uint64_t seed, const NumericPolicy& policy = default_policy());

}  // namespace varid
