#include "geneo/schwarz.hpp"

#include <string>

#include "geneo/error.hpp"

namespace geneo {

std::string_view to_string(LocalVariant v) { return v == LocalVariant::AS ? "as" : "ras"; }

std::string_view to_string(CoarseVariant v)
{
  switch (v) {
  case CoarseVariant::None: return "none";
  case CoarseVariant::Additive: return "additive";
  case CoarseVariant::Deflation: return "deflation";
  }
  return "unknown";
}

ExactPreconditioner::ExactPreconditioner(const SparseMatrix &b) : fact_(Factorization::factorize(b, true, "global")) {}

SchwarzPreconditioner::SchwarzPreconditioner(const SparseMatrix &b, const Decomposition &d, PrecondConfig cfg)
    : b_(b), d_(d), cfg_(std::move(cfg))
{
  if (b.rows() != d.global_dofs || b.cols() != d.global_dofs)
    throw Error(ErrorCode::DimensionMismatch, "matrix of size " + std::to_string(b.rows()) +
                                                  " does not match a decomposition of " +
                                                  std::to_string(d.global_dofs) + " dofs");
  if (cfg_.coarse != CoarseVariant::None && !cfg_.coarse_space)
    throw Error(ErrorCode::InvalidArgument, "coarse variant requires a coarse space");
  if (cfg_.coarse == CoarseVariant::None)
    cfg_.coarse_space.reset();

  local_.reserve(static_cast<std::size_t>(d.count()));
  for (const auto &s : d_.subdomains) {
    const SparseMatrix bj = b_.submatrix(s.overlapping_dofs, s.overlapping_dofs);
    try {
      local_.push_back(Factorization::factorize(bj, true, "subdomain " + std::to_string(s.id)));
    }
    catch (const Error &e) {
      throw Error(ErrorCode::SubdomainSingular, "subdomain " + std::to_string(s.id) + ": " + e.what());
    }
  }
}

Vector SchwarzPreconditioner::apply_one_level(const Vector &r) const
{
  if (r.size() != d_.global_dofs)
    throw Error(ErrorCode::DimensionMismatch, "preconditioner input has wrong size");
  Vector z = Vector::Zero(r.size());
  // fixed subdomain order keeps the sum bit-reproducible
  for (int j = 0; j < d_.count(); ++j) {
    Vector local = local_[static_cast<std::size_t>(j)].solve(restrict_to(d_, j, r));
    if (cfg_.local == LocalVariant::RAS)
      local = apply_pou(d_, j, local);
    extend_add(d_, j, local, z);
  }
  return z;
}

Vector SchwarzPreconditioner::coarse_correction(const Vector &r) const
{
  if (!cfg_.coarse_space)
    return Vector::Zero(r.size());
  return cfg_.coarse_space->apply_correction(d_, r);
}

Vector SchwarzPreconditioner::apply(const Vector &r) const
{
  switch (cfg_.coarse) {
  case CoarseVariant::None: return apply_one_level(r);
  case CoarseVariant::Additive: return apply_one_level(r) + coarse_correction(r);
  case CoarseVariant::Deflation: {
    const Vector z0 = coarse_correction(r);
    return apply_one_level(r - b_ * z0) + z0;
  }
  }
  return r;
}

std::unique_ptr<Preconditioner> build_preconditioner(const SparseMatrix &b, const Decomposition &d,
                                                     PrecondConfig cfg)
{
  return std::make_unique<SchwarzPreconditioner>(b, d, std::move(cfg));
}

} // namespace geneo
