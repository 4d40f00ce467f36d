#include "arw/lattice.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace arw {

std::array<Site, kDirections> neighbors(Site s) {
  std::array<Site, kDirections> out{};
  for (int d = 0; d < kDirections; ++d) out[d] = {s.x + kOffsets[d].x, s.y + kOffsets[d].y};
  return out;
}

Box::Box(int radius) : radius_(radius) {
  if (radius < 0) throw std::invalid_argument("box radius must be non-negative");

  const int r = radius_;
  boundary_.reserve(4 * static_cast<std::size_t>(side()));
  for (int t = -r; t <= r; ++t) {
    boundary_.push_back({-r - 1, t});
    boundary_.push_back({r + 1, t});
    boundary_.push_back({t, -r - 1});
    boundary_.push_back({t, r + 1});
  }
  std::sort(boundary_.begin(), boundary_.end());

  const std::size_t n = size();
  step_.resize(n * kDirections);
  for (std::size_t i = 0; i < n; ++i) {
    const Site s = site(i);
    for (int d = 0; d < kDirections; ++d) {
      const Site t{s.x + kOffsets[d].x, s.y + kOffsets[d].y};
      step_[i * kDirections + d] = contains(t) ? static_cast<std::int64_t>(index(t))
                                               : -static_cast<std::int64_t>(boundary_index(t)) - 1;
    }
  }

  sweep_order_.resize(n);
  std::iota(sweep_order_.begin(), sweep_order_.end(), std::size_t{0});
  std::sort(sweep_order_.begin(), sweep_order_.end(), [this](std::size_t a, std::size_t b) {
    const Site sa = site(a), sb = site(b);
    const int ca = cycle_index(sa), cb = cycle_index(sb);
    if (ca != cb) return ca < cb;
    return sa < sb;
  });
  sweep_rank_.resize(n);
  for (std::size_t k = 0; k < n; ++k) sweep_rank_[sweep_order_[k]] = k;
}

bool Box::on_boundary(Site s) const {
  if (linf_norm(s) != radius_ + 1) return false;
  // Diagonal corners touch the box only diagonally.
  const int ax = s.x < 0 ? -s.x : s.x;
  const int ay = s.y < 0 ? -s.y : s.y;
  return ax <= radius_ || ay <= radius_;
}

std::size_t Box::index(Site s) const {
  if (!contains(s)) {
    throw std::invalid_argument("site (" + std::to_string(s.x) + "," + std::to_string(s.y) +
                                ") is outside the box");
  }
  return static_cast<std::size_t>(s.y + radius_) * side() + static_cast<std::size_t>(s.x + radius_);
}

Site Box::site(std::size_t i) const {
  const int w = side();
  return {static_cast<int>(i % w) - radius_, static_cast<int>(i / w) - radius_};
}

std::size_t Box::boundary_index(Site s) const {
  const auto it = std::lower_bound(boundary_.begin(), boundary_.end(), s);
  if (it == boundary_.end() || *it != s) {
    throw std::invalid_argument("site (" + std::to_string(s.x) + "," + std::to_string(s.y) +
                                ") is not on the boundary");
  }
  return static_cast<std::size_t>(it - boundary_.begin());
}

int Box::cycle_index(Site s) const {
  if (contains(s)) return radius_ - linf_norm(s);
  if (on_boundary(s)) return -1;
  throw std::invalid_argument("site is neither inside the box nor on its boundary");
}

std::vector<Site> boundary_sites(const Box& box) { return box.boundary_sites(); }

Site interior_neighbor(Site x, const Box& box) {
  if (!box.on_boundary(x)) throw std::invalid_argument("interior_neighbor: site is not on the boundary");
  for (const Site y : neighbors(x)) {
    if (box.contains(y)) return y;
  }
  throw std::logic_error("boundary site without an interior neighbor");
}

Site backward_neighbor(Site y, const Box& box) {
  if (!box.contains(y)) throw std::invalid_argument("backward_neighbor: site is outside the box");
  const int target = box.cycle_index(y) - 1;
  bool found = false;
  Site best{};
  for (const Site z : neighbors(y)) {
    if (!box.contains(z) && !box.on_boundary(z)) continue;
    if (box.cycle_index(z) != target) continue;
    if (!found || z < best) best = z;
    found = true;
  }
  if (!found) throw std::logic_error("no backward neighbor");
  return best;
}

}  // namespace arw
