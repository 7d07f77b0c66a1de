#pragma once

/** @file schwarz.hpp
    @brief One- and two-level overlapping Schwarz preconditioners.

    With B_j = R_j B R_j^T factored once per subdomain:

      AS:         M^{-1} r = sum_j R_j^T B_j^{-1} R_j r
      RAS:        M^{-1} r = sum_j R_j^T D_j B_j^{-1} R_j r
      additive:   one-level part + Q_0 r,  Q_0 = R_0^T B_0^{-1} R_0
      deflation:  z_0 = Q_0 r,  M^{-1} r = M_1^{-1} (r - B z_0) + z_0
*/

#include <memory>
#include <string_view>
#include <vector>

#include "geneo/coarse_space.hpp"
#include "geneo/decomposition.hpp"
#include "geneo/factorization.hpp"
#include "geneo/sparse_matrix.hpp"

namespace geneo {

class Preconditioner {
public:
  virtual ~Preconditioner() = default;
  virtual Vector apply(const Vector &r) const = 0;
  virtual int size() const = 0;
};

class IdentityPreconditioner final : public Preconditioner {
public:
  explicit IdentityPreconditioner(int n) : n_(n) {}
  Vector apply(const Vector &r) const override { return r; }
  int size() const override { return n_; }

private:
  int n_;
};

/// Direct solve with a factorization of the whole matrix.
class ExactPreconditioner final : public Preconditioner {
public:
  explicit ExactPreconditioner(const SparseMatrix &b);
  Vector apply(const Vector &r) const override { return fact_.solve(r); }
  int size() const override { return fact_.size(); }

private:
  Factorization fact_;
};

enum class LocalVariant { AS, RAS };
enum class CoarseVariant { None, Additive, Deflation };

std::string_view to_string(LocalVariant v);
std::string_view to_string(CoarseVariant v);

struct PrecondConfig {
  LocalVariant local = LocalVariant::RAS;
  CoarseVariant coarse = CoarseVariant::Deflation;
  /// Required unless coarse == None.
  std::shared_ptr<const CoarseSpace> coarse_space;
};

class SchwarzPreconditioner final : public Preconditioner {
public:
  /// Throws SubdomainSingular(j) when a local matrix cannot be factored.
  SchwarzPreconditioner(const SparseMatrix &b, const Decomposition &d, PrecondConfig cfg);

  Vector apply(const Vector &r) const override;
  int size() const override { return d_.global_dofs; }

  /// Only the one-level part (AS or RAS sum).
  Vector apply_one_level(const Vector &r) const;
  /// Q_0 r; zero without a coarse space.
  Vector coarse_correction(const Vector &r) const;

  const PrecondConfig &config() const noexcept { return cfg_; }
  int coarse_size() const noexcept { return cfg_.coarse_space ? cfg_.coarse_space->dimension() : 0; }

private:
  SparseMatrix b_;
  Decomposition d_;
  PrecondConfig cfg_;
  std::vector<Factorization> local_;
};

std::unique_ptr<Preconditioner> build_preconditioner(const SparseMatrix &b, const Decomposition &d,
                                                     PrecondConfig cfg);

} // namespace geneo
