#include "relugeom/partition.hpp"

#include <algorithm>
#include <string>

namespace relugeom {

IndexMask mask_from_indices(const std::vector<int>& one_based) {
  IndexMask m = 0;
  for (int i : one_based) {
    if (i < 1 || i > kMaxMaskDim) {
      throw GeometryError(ErrorCode::DimensionMismatch,
                          "index " + std::to_string(i) + " out of range 1.." +
                              std::to_string(kMaxMaskDim));
    }
    m |= IndexMask{1} << (i - 1);
  }
  return m;
}

std::vector<int> indices_from_mask(IndexMask mask) {
  std::vector<int> out;
  for (int i = 0; mask != 0; ++i, mask >>= 1) {
    if (mask & 1) out.push_back(i + 1);
  }
  return out;
}

SectorIndex::SectorIndex(IndexMask plus, IndexMask minus) : plus_(plus), minus_(minus) {
  if ((plus & minus) != 0) {
    throw GeometryError(ErrorCode::DimensionMismatch, "sector index sets overlap");
  }
}

SectorIndex SectorIndex::from_indices(const std::vector<int>& plus,
                                      const std::vector<int>& minus) {
  return SectorIndex(mask_from_indices(plus), mask_from_indices(minus));
}

std::strong_ordering operator<=>(const SectorIndex& a, const SectorIndex& b) {
  if (auto c = a.dimension() <=> b.dimension(); c != 0) return c;
  if (auto c = a.plus_ <=> b.plus_; c != 0) return c;
  return a.minus_ <=> b.minus_;
}

DualCoordinates expand(const DualFrame& frame, const Vector& x) {
  return DualCoordinates{frame.coordinates(x)};
}

double default_zero_tol(const Vector& lambdas) {
  const double inf = lambdas.size() ? lambdas.cwiseAbs().maxCoeff() : 0.0;
  return 1e-9 * (1.0 + inf);
}

SectorIndex classify_coefficients(const Vector& lambdas, double zero_tol) {
  if (lambdas.size() > kMaxMaskDim) {
    throw GeometryError(ErrorCode::Overflow, "too many coefficients for a sector index");
  }
  IndexMask plus = 0, minus = 0;
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    if (lambdas(i) > zero_tol) {
      plus |= IndexMask{1} << i;
    } else if (lambdas(i) < -zero_tol) {
      minus |= IndexMask{1} << i;
    }
  }
  return SectorIndex(plus, minus);
}

SectorIndex classify(const DualFrame& frame, const Vector& x, std::optional<double> zero_tol) {
  const Vector lambdas = frame.coordinates(x);
  return classify_coefficients(lambdas, zero_tol.value_or(default_zero_tol(lambdas)));
}

bool near_sector_boundary(const Vector& lambdas, double zero_tol) {
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    const double a = std::abs(lambdas(i));
    if (a > zero_tol && a < 10.0 * zero_tol) return true;
  }
  return false;
}

namespace {

void check_enumerable(int d) {
  if (d < 1) {
    throw GeometryError(ErrorCode::DimensionMismatch, "dimension must be at least 1");
  }
  if (d > kMaxEnumerationDim) {
    throw GeometryError(ErrorCode::Overflow,
                        "refusing to enumerate 3^" + std::to_string(d) + " sectors");
  }
}

}  // namespace

std::vector<SectorIndex> enumerate_sectors(int d, std::optional<int> dim_filter) {
  check_enumerable(d);
  if (dim_filter && (*dim_filter < 0 || *dim_filter > d)) {
    throw GeometryError(ErrorCode::DimensionMismatch, "dimension filter outside 0..d");
  }
  const IndexMask all = full_mask(d);
  std::vector<SectorIndex> out;
  // Each support set splits into plus/minus via its submasks.
  for (IndexMask support = 0; support <= all; ++support) {
    const int k = popcount(support);
    if (dim_filter && k != *dim_filter) continue;
    IndexMask plus = support;
    while (true) {
      out.emplace_back(plus, support & ~plus);
      if (plus == 0) break;
      plus = (plus - 1) & support;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::uint64_t> sector_count_table(int d) {
  check_enumerable(d);
  std::vector<std::uint64_t> table(d + 1);
  std::uint64_t binom = 1;
  for (int k = 0; k <= d; ++k) {
    table[k] = binom << k;
    binom = binom * (d - k) / (k + 1);
  }
  return table;
}

bool leq(const SectorIndex& a, const SectorIndex& b) {
  return (a.plus() & ~b.plus()) == 0 && (a.minus() & ~b.minus()) == 0;
}

std::vector<SectorIndex> closure_members(const SectorIndex& s) {
  if (s.dimension() > kMaxEnumerationDim) {
    throw GeometryError(ErrorCode::Overflow, "closure too large to enumerate");
  }
  std::vector<SectorIndex> out;
  IndexMask p = s.plus();
  while (true) {
    IndexMask n = s.minus();
    while (true) {
      out.emplace_back(p, n);
      if (n == 0) break;
      n = (n - 1) & s.minus();
    }
    if (p == 0) break;
    p = (p - 1) & s.plus();
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<SectorIndex> boundary_members(const SectorIndex& s) {
  auto out = closure_members(s);
  out.erase(std::remove(out.begin(), out.end(), s), out.end());
  return out;
}

}  // namespace relugeom
