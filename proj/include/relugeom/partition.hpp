#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <vector>

#include "relugeom/core_geometry.hpp"

namespace relugeom {

/// Bit i-1 set <=> index i is a member (indices are 1-based).
using IndexMask = std::uint64_t;

/// Largest dimension for which exhaustive enumeration is attempted.
inline constexpr int kMaxEnumerationDim = 20;
/// Largest dimension representable by an IndexMask.
inline constexpr int kMaxMaskDim = 64;

IndexMask mask_from_indices(const std::vector<int>& one_based);
std::vector<int> indices_from_mask(IndexMask mask);
inline IndexMask full_mask(int d) {
  return d >= 64 ? ~IndexMask{0} : (IndexMask{1} << d) - 1;
}
inline int popcount(IndexMask m) { return __builtin_popcountll(m); }

/// A pairing (I+, I-) of disjoint index sets naming one sector.
class SectorIndex {
 public:
  SectorIndex() = default;
  /// Throws DimensionMismatch when the sets overlap.
  SectorIndex(IndexMask plus, IndexMask minus);
  static SectorIndex from_indices(const std::vector<int>& plus, const std::vector<int>& minus);

  IndexMask plus() const { return plus_; }
  IndexMask minus() const { return minus_; }
  int dimension() const { return popcount(plus_ | minus_); }

  friend bool operator==(const SectorIndex&, const SectorIndex&) = default;
  /// Graded lexicographic order: dimension, then plus mask, then minus mask.
  friend std::strong_ordering operator<=>(const SectorIndex& a, const SectorIndex& b);

 private:
  IndexMask plus_ = 0;
  IndexMask minus_ = 0;
};

struct DualCoordinates {
  Vector lambdas;
};

/// Expansion of x in the dual frame. Contracting frames expand the
/// row-span component of x.
DualCoordinates expand(const DualFrame& frame, const Vector& x);

/// Default band 1e-9 (1 + |lambda|_inf) inside which a coefficient counts as zero.
double default_zero_tol(const Vector& lambdas);

SectorIndex classify_coefficients(const Vector& lambdas, double zero_tol);
SectorIndex classify(const DualFrame& frame, const Vector& x,
                     std::optional<double> zero_tol = std::nullopt);

/// True when some coefficient lies within [zero_tol, 10 zero_tol) of zero,
/// i.e. the label could flip under a small perturbation.
bool near_sector_boundary(const Vector& lambdas, double zero_tol);

/// All 3^d sectors (or the C(d,k) 2^k sectors of dimension k), graded-lex.
/// Throws Overflow for d > 20.
std::vector<SectorIndex> enumerate_sectors(int d, std::optional<int> dim_filter = std::nullopt);

/// Number of sectors of dimension k for k = 0..d: C(d,k) 2^k.
std::vector<std::uint64_t> sector_count_table(int d);

/// The partial order: a.plus within b.plus and a.minus within b.minus.
bool leq(const SectorIndex& a, const SectorIndex& b);

/// All J with J <= s, graded-lex. The boundary is this list without s.
std::vector<SectorIndex> closure_members(const SectorIndex& s);
std::vector<SectorIndex> boundary_members(const SectorIndex& s);

}  // namespace relugeom
