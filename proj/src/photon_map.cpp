#include "clearsim/photon_map.h"

#include <algorithm>
#include <bit>

namespace clearsim {

namespace {

// Size of the left subtree of a complete binary tree with n nodes.
size_t left_subtree_size(size_t n) {
  if (n <= 1) return 0;
  auto h = std::bit_width(n) - 1;  // levels below the root
  size_t half = size_t{1} << (h - 1);
  auto last = n - ((size_t{1} << h) - 1);
  return (half - 1) + std::min(last, half);
}

}  // namespace

photon_map::photon_map(std::vector<photon> photons) {
  photons_.resize(photons.size());
  axes_.resize(photons.size());
  if (!photons.empty()) build(photons, 0, photons.size(), 0);
}

void photon_map::build(std::vector<photon>& source, size_t begin, size_t end, size_t node) {
  auto box = bbox3{};
  for (auto i = begin; i < end; i++) box.expand(source[i].position);
  auto e = box.extent();
  auto axis = e.x >= e.y && e.x >= e.z ? 0 : (e.y >= e.z ? 1 : 2);
  auto mid = begin + left_subtree_size(end - begin);
  std::nth_element(source.begin() + begin, source.begin() + mid, source.begin() + end,
      [axis](const photon& a, const photon& b) {
        auto pa = a.position[axis], pb = b.position[axis];
        if (pa != pb) return pa < pb;
        // full order so the layout never depends on the input permutation
        for (int k = 0; k < 3; k++)
          if (a.position[k] != b.position[k]) return a.position[k] < b.position[k];
        return a.power.x < b.power.x;
      });
  photons_[node] = source[mid];
  axes_[node] = static_cast<uint8_t>(axis);
  if (mid > begin) build(source, begin, mid, 2 * node + 1);
  if (end > mid + 1) build(source, mid + 1, end, 2 * node + 2);
}

vec3 photon_map::total_power() const {
  auto total = vec3{};
  for (auto& p : photons_) total += p.power;
  return total;
}

}  // namespace clearsim
