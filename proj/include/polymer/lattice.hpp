// Copyright 2026 The polymer-lab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <variant>
#include <vector>

#include "polymer/rng.hpp"

namespace polymer {

inline constexpr int kMaxDim = 8;

/// A point of Z^d, d <= kMaxDim.
class Site {
 public:
  Site() = default;
  explicit Site(int dim);
  Site(std::initializer_list<std::int32_t> coords);

  int dim() const { return dim_; }
  std::int32_t operator[](int i) const { return x_[static_cast<std::size_t>(i)]; }
  std::int32_t& operator[](int i) { return x_[static_cast<std::size_t>(i)]; }
  std::int64_t norm2() const;
  const std::int32_t* data() const { return x_.data(); }
  std::int32_t* data() { return x_.data(); }

  friend bool operator==(const Site& a, const Site& b) = default;

 private:
  std::array<std::int32_t, kMaxDim> x_{};
  std::int32_t dim_ = 0;
};

struct SiteHash {
  std::size_t operator()(const Site& s) const;
};

struct PackedHash {
  std::size_t operator()(std::uint64_t k) const { return static_cast<std::size_t>(splitmix64(k)); }
};

/// Offset encoding of sites with |coord| <= radius into one 64-bit word.
class SiteCodec {
 public:
  SiteCodec() = default;
  SiteCodec(int dim, std::int64_t radius);

  /// True when dim * bits fits in 64 bits.
  bool packable() const { return packable_; }
  int dim() const { return dim_; }
  std::int64_t radius() const { return offset_; }
  bool contains(const std::int32_t* coords) const {
    for (int i = 0; i < dim_; ++i)
      if (coords[i] > offset_ || coords[i] < -offset_) return false;
    return true;
  }
  std::uint64_t pack(const std::int32_t* coords) const {
    std::uint64_t key = 0;
    for (int i = 0; i < dim_; ++i)
      key |= static_cast<std::uint64_t>(coords[i] + offset_) << (bits_ * i);
    return key;
  }
  std::uint64_t pack(const Site& s) const;
  Site unpack(std::uint64_t key) const;

 private:
  int dim_ = 0;
  int bits_ = 0;
  std::int64_t offset_ = 0;
  std::uint64_t mask_ = 0;
  bool packable_ = false;
};

/// Move encoding: 0 = stay, 2i+1 = +e_i, 2i+2 = -e_i.
inline int move_count(int dim) { return 2 * dim + 1; }
void apply_move(std::int32_t* pos, int move);

/// Walk path S(0..n-1) started at the origin, stored as moves and positions.
class Trajectory {
 public:
  Trajectory() = default;
  /// Builds from n-1 moves; throws on an illegal move code.
  Trajectory(int dim, std::vector<std::uint8_t> moves);

  int dim() const { return dim_; }
  /// Number of positions n.
  std::int64_t size() const { return static_cast<std::int64_t>(moves_.size()) + 1; }
  const std::vector<std::uint8_t>& moves() const { return moves_; }
  Site position(std::int64_t k) const;
  const std::int32_t* coords(std::int64_t k) const {
    return coords_.data() + k * dim_;
  }
  std::int32_t max_abs_coord() const;

 private:
  int dim_ = 0;
  std::vector<std::uint8_t> moves_;
  std::vector<std::int32_t> coords_;
};

/// Sparse site -> visit count map with total n.
class LocalTimeField {
 public:
  LocalTimeField(int dim, std::int64_t coord_radius);

  /// Adds delta visits and returns the updated count; throws when a count
  /// would become negative or, for packed keys, when the site is out of range.
  std::int64_t add(const std::int32_t* coords, std::int64_t delta = 1);
  std::int64_t add(const Site& s, std::int64_t delta = 1) { return add(s.data(), delta); }
  std::int64_t count(const Site& s) const;
  std::int64_t total() const { return total_; }
  std::size_t size() const;
  int dim() const { return dim_; }
  std::int64_t max_count() const;

  /// Calls f(count) for every visited site.
  template <class F>
  void for_each_count(F&& f) const {
    std::visit([&](const auto& m) {
      for (const auto& kv : m) f(kv.second);
    }, counts_);
  }
  /// Calls f(site, count) for every visited site.
  void for_each(const std::function<void(const Site&, std::int64_t)>& f) const;

  friend bool operator==(const LocalTimeField& a, const LocalTimeField& b);

 private:
  using Packed = std::unordered_map<std::uint64_t, std::int64_t, PackedHash>;
  using Generic = std::unordered_map<Site, std::int64_t, SiteHash>;

  int dim_;
  SiteCodec codec_;
  std::variant<Packed, Generic> counts_;
  std::int64_t total_ = 0;
};

Trajectory sample_walk(std::int64_t n, int dim, Rng& rng);
LocalTimeField local_times(const Trajectory& traj);

/// Sum over visited sites of l(z)^q; q <= 1 rejected.
double q_norm(const LocalTimeField& field, double q);

struct LevelCount {
  std::int64_t sites = 0;
  std::int64_t mass = 0;
};

/// Sites with x < l(z) <= y and their occupation mass.
LevelCount level_counts(const LocalTimeField& field, double x,
                        double y = std::numeric_limits<double>::infinity());

/// Histogram h[k] = |{z : l(z) = k}| for k = 0..max.
std::vector<std::int64_t> level_histogram(const LocalTimeField& field);

std::int64_t range_size(const LocalTimeField& field);

}  // namespace polymer
