// Geometry of the box {-N..N}^2, its outer boundary and the concentric cycle partition.
#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace arw {

struct Site {
  int x = 0;
  int y = 0;

  friend constexpr auto operator<=>(const Site&, const Site&) = default;
};

/// Neighbor directions in the fixed order +x, -x, +y, -y. Instruction decoding depends on it.
inline constexpr int kDirections = 4;
inline constexpr std::array<Site, kDirections> kOffsets{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};

constexpr int linf_norm(Site s) {
  const int ax = s.x < 0 ? -s.x : s.x;
  const int ay = s.y < 0 ? -s.y : s.y;
  return ax > ay ? ax : ay;
}

std::array<Site, kDirections> neighbors(Site s);

/// Index of the direction opposite to `d` (+x <-> -x, +y <-> -y).
constexpr int opposite(int d) { return d ^ 1; }

/// The box B_N together with dense indexings of its interior and of its outer boundary.
///
/// Interior sites are indexed row-major, `(y + N) * (2N + 1) + (x + N)`. Boundary sites are
/// indexed by their position in the lexicographically sorted boundary list. Both indexings are
/// stable, so per-site fields are flat arrays. The object is immutable once built.
class Box {
 public:
  explicit Box(int radius);

  int radius() const { return radius_; }
  int side() const { return 2 * radius_ + 1; }
  std::size_t size() const { return static_cast<std::size_t>(side()) * side(); }
  std::size_t boundary_size() const { return boundary_.size(); }

  bool contains(Site s) const { return linf_norm(s) <= radius_; }
  bool on_boundary(Site s) const;

  std::size_t index(Site s) const;
  Site site(std::size_t index) const;

  /// Dense index into boundary_sites(); the site must lie on the boundary.
  std::size_t boundary_index(Site s) const;
  const std::vector<Site>& boundary_sites() const { return boundary_; }

  /// Cycle index N - |s|_inf for interior sites, -1 on the boundary.
  int cycle_index(Site s) const;

  /// Neighbor of interior site `i` in direction `d`, encoded as the interior index when the
  /// neighbor is inside and as `-(boundary_index + 1)` when it lies on the boundary.
  std::int64_t step(std::size_t i, int d) const { return step_[i * kDirections + d]; }

  /// Interior indices in cycle-sweep order: C_0, C_1, ..., C_N, lexicographic within a cycle.
  const std::vector<std::size_t>& sweep_order() const { return sweep_order_; }
  /// Position of interior index `i` within sweep_order().
  std::size_t sweep_rank(std::size_t i) const { return sweep_rank_[i]; }

 private:
  int radius_;
  std::vector<Site> boundary_;
  std::vector<std::int64_t> step_;
  std::vector<std::size_t> sweep_order_;
  std::vector<std::size_t> sweep_rank_;
};

/// Lexicographically sorted outer boundary of the box.
std::vector<Site> boundary_sites(const Box& box);

/// The unique neighbor inside the box of a boundary site. Throws std::invalid_argument otherwise.
Site interior_neighbor(Site x, const Box& box);

/// A neighbor of `y` one cycle further out (on the boundary when `y` is in C_0); ties go to the
/// lexicographically smallest candidate. Throws std::invalid_argument when `y` is outside the box.
Site backward_neighbor(Site y, const Box& box);

}  // namespace arw
