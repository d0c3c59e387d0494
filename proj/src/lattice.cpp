// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#include "polymer/lattice.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace polymer {

Site::Site(int dim) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("Site: dimension out of range");
}

Site::Site(std::initializer_list<std::int32_t> coords) : Site(static_cast<int>(coords.size())) {
  std::copy(coords.begin(), coords.end(), x_.begin());
}

std::int64_t Site::norm2() const {
  std::int64_t s = 0;
  for (int i = 0; i < dim_; ++i) s += static_cast<std::int64_t>(x_[i]) * x_[i];
  return s;
}

std::size_t SiteHash::operator()(const Site& s) const {
  std::uint64_t h = static_cast<std::uint64_t>(s.dim());
  for (int i = 0; i < s.dim(); ++i)
    h = splitmix64(h ^ static_cast<std::uint32_t>(s[i]));
  return static_cast<std::size_t>(h);
}

SiteCodec::SiteCodec(int dim, std::int64_t radius) : dim_(dim), offset_(radius) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("SiteCodec: dimension out of range");
  if (radius < 0) throw std::invalid_argument("SiteCodec: negative radius");
  bits_ = std::max(1, static_cast<int>(std::bit_width(static_cast<std::uint64_t>(2 * radius))));
  packable_ = bits_ * dim <= 64;
  mask_ = bits_ >= 64 ? ~0ULL : ((1ULL << bits_) - 1);
}

std::uint64_t SiteCodec::pack(const Site& s) const { return pack(s.data()); }

Site SiteCodec::unpack(std::uint64_t key) const {
  Site s(dim_);
  for (int i = 0; i < dim_; ++i)
    s[i] = static_cast<std::int32_t>(static_cast<std::int64_t>((key >> (bits_ * i)) & mask_) -
                                     offset_);
  return s;
}

void apply_move(std::int32_t* pos, int move) {
  if (move == 0) return;
  const int axis = (move - 1) / 2;
  pos[axis] += (move % 2 == 1) ? 1 : -1;
}

Trajectory::Trajectory(int dim, std::vector<std::uint8_t> moves)
    : dim_(dim), moves_(std::move(moves)) {
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("Trajectory: dimension out of range");
  const std::int64_t n = size();
  coords_.assign(static_cast<std::size_t>(n * dim), 0);
  for (std::int64_t k = 1; k < n; ++k) {
    const int m = moves_[static_cast<std::size_t>(k - 1)];
    if (m >= move_count(dim)) throw std::invalid_argument("Trajectory: illegal move");
    std::copy_n(coords_.data() + (k - 1) * dim, dim, coords_.data() + k * dim);
    apply_move(coords_.data() + k * dim, m);
  }
}

Site Trajectory::position(std::int64_t k) const {
  if (k < 0 || k >= size()) throw std::out_of_range("Trajectory::position");
  Site s(dim_);
  for (int i = 0; i < dim_; ++i) s[i] = coords_[static_cast<std::size_t>(k * dim_ + i)];
  return s;
}

std::int32_t Trajectory::max_abs_coord() const {
  std::int32_t m = 0;
  for (auto c : coords_) m = std::max(m, std::abs(c));
  return m;
}

LocalTimeField::LocalTimeField(int dim, std::int64_t coord_radius)
    : dim_(dim), codec_(dim, coord_radius) {
  if (codec_.packable())
    counts_.emplace<Packed>();
  else
    counts_.emplace<Generic>();
}

std::int64_t LocalTimeField::add(const std::int32_t* coords, std::int64_t delta) {
  auto update = [delta](auto& m, const auto& key) -> std::int64_t {
    auto it = m.find(key);
    if (it == m.end()) {
      if (delta < 0) throw std::logic_error("LocalTimeField: negative count");
      if (delta > 0) m.emplace(key, delta);
      return delta;
    }
    const std::int64_t c = it->second + delta;
    if (c < 0) throw std::logic_error("LocalTimeField: negative count");
    if (c == 0) m.erase(it);
    else it->second = c;
    return c;
  };
  std::int64_t c = 0;
  if (auto* p = std::get_if<Packed>(&counts_)) {
    if (!codec_.contains(coords)) throw std::out_of_range("LocalTimeField: site beyond radius");
    c = update(*p, codec_.pack(coords));
  } else {
    Site s(dim_);
    for (int i = 0; i < dim_; ++i) s[i] = coords[i];
    c = update(std::get<Generic>(counts_), s);
  }
  total_ += delta;
  return c;
}

std::int64_t LocalTimeField::count(const Site& s) const {
  if (s.dim() != dim_) throw std::invalid_argument("LocalTimeField: dimension mismatch");
  if (const auto* p = std::get_if<Packed>(&counts_)) {
    if (!codec_.contains(s.data())) return 0;
    const auto it = p->find(codec_.pack(s));
    return it == p->end() ? 0 : it->second;
  }
  const auto& g = std::get<Generic>(counts_);
  const auto it = g.find(s);
  return it == g.end() ? 0 : it->second;
}

std::size_t LocalTimeField::size() const {
  return std::visit([](const auto& m) { return m.size(); }, counts_);
}

std::int64_t LocalTimeField::max_count() const {
  std::int64_t m = 0;
  for_each_count([&](std::int64_t c) { m = std::max(m, c); });
  return m;
}

void LocalTimeField::for_each(const std::function<void(const Site&, std::int64_t)>& f) const {
  if (const auto* p = std::get_if<Packed>(&counts_)) {
    for (const auto& [key, c] : *p) f(codec_.unpack(key), c);
  } else {
    for (const auto& [s, c] : std::get<Generic>(counts_)) f(s, c);
  }
}

bool operator==(const LocalTimeField& a, const LocalTimeField& b) {
  if (a.dim_ != b.dim_ || a.total_ != b.total_ || a.size() != b.size()) return false;
  bool equal = true;
  a.for_each([&](const Site& s, std::int64_t c) {
    if (equal && b.count(s) != c) equal = false;
  });
  return equal;
}

Trajectory sample_walk(std::int64_t n, int dim, Rng& rng) {
  if (n < 1) throw std::invalid_argument("sample_walk: n must be >= 1");
  if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("sample_walk: invalid dimension");
  std::vector<std::uint8_t> moves(static_cast<std::size_t>(n - 1));
  const auto k = static_cast<std::uint32_t>(move_count(dim));
  for (auto& m : moves) m = static_cast<std::uint8_t>(rng.below(k));
  return Trajectory(dim, std::move(moves));
}

LocalTimeField local_times(const Trajectory& traj) {
  LocalTimeField field(traj.dim(), std::max<std::int64_t>(traj.max_abs_coord(), 1));
  for (std::int64_t k = 0; k < traj.size(); ++k) field.add(traj.coords(k));
  return field;
}

double q_norm(const LocalTimeField& field, double q) {
  if (!(q > 1.0)) throw std::invalid_argument("q_norm: q must exceed 1");
  double s = 0.0;
  if (q == 2.0) {
    field.for_each_count([&](std::int64_t c) { s += static_cast<double>(c) * static_cast<double>(c); });
  } else {
    field.for_each_count([&](std::int64_t c) { s += std::pow(static_cast<double>(c), q); });
  }
  return s;
}

LevelCount level_counts(const LocalTimeField& field, double x, double y) {
  if (!(x >= 0.0 && x < y)) throw std::invalid_argument("level_counts: need 0 <= x < y");
  LevelCount lc;
  field.for_each_count([&](std::int64_t c) {
    const auto cd = static_cast<double>(c);
    if (cd > x && cd <= y) {
      ++lc.sites;
      lc.mass += c;
    }
  });
  return lc;
}

std::vector<std::int64_t> level_histogram(const LocalTimeField& field) {
  std::vector<std::int64_t> h(static_cast<std::size_t>(field.max_count()) + 1, 0);
  field.for_each_count([&](std::int64_t c) { ++h[static_cast<std::size_t>(c)]; });
  return h;
}

std::int64_t range_size(const LocalTimeField& field) {
  return static_cast<std::int64_t>(field.size());
}

}  // namespace polymer
