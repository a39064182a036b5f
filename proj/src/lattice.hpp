#pragma once

#include <span>
#include <vector>

#include "common.hpp"

namespace blochlab {

// Mode-count budget for lattice construction, overridable through the
// BLOCHLAB_MODE_BUDGET environment variable (checked once) or set_mode_budget().
long long mode_budget();
void set_mode_budget(long long budget);

// Dense integer box {m in Z^d : max_i |m_i| <= radius} with mixed-radix
// indexing, axis 0 most significant. Shared by Lattice and by the extended
// boxes used for convolution.
struct ModeBox {
  int dim = 0;
  int radius = 0;

  long long size() const;
  long long index_of(std::span<const int> m) const;  // -1 when outside
  void mode_of(long long index, std::span<int> out) const;
  bool contains(std::span<const int> m) const;
};

// Truncated Fourier lattice: modes {m in Z^d : max_i |m_i| <= N} with a fixed
// deterministic ordering (axis 0 most significant, components from -N to N).
class Lattice {
 public:
  Lattice(int dim, int cutoff);

  int dim() const { return box_.dim; }
  int cutoff() const { return box_.radius; }
  long long size() const { return size_; }

  long long index_of(std::span<const int> m) const { return box_.index_of(m); }
  void mode_of(long long index, std::span<int> out) const { box_.mode_of(index, out); }
  std::vector<int> mode(long long index) const;
  bool contains(std::span<const int> m) const { return box_.contains(m); }

  double mode_norm_sq(long long index) const;  // Euclidean |m|^2

  bool operator==(const Lattice& other) const {
    return box_.dim == other.box_.dim && box_.radius == other.box_.radius;
  }

 private:
  ModeBox box_;
  long long size_ = 0;
};

}  // namespace blochlab
