#include "lattice.hpp"

#include <atomic>
#include <cstdlib>

namespace blochlab {

namespace {

constexpr long long kDefaultBudget = 2'000'000;

std::atomic<long long>& budget_storage() {
  static std::atomic<long long> budget = [] {
    if (const char* env = std::getenv("BLOCHLAB_MODE_BUDGET")) {
      char* end = nullptr;
      long long v = std::strtoll(env, &end, 10);
      if (end != env && v > 0) return v;
    }
    return kDefaultBudget;
  }();
  return budget;
}

}  // namespace

long long mode_budget() { return budget_storage().load(); }
void set_mode_budget(long long budget) { budget_storage().store(budget); }

long long ModeBox::size() const {
  long long s = 1;
  const long long side = 2LL * radius + 1;
  for (int i = 0; i < dim; ++i) s *= side;
  return s;
}

long long ModeBox::index_of(std::span<const int> m) const {
  const long long side = 2LL * radius + 1;
  long long idx = 0;
  for (int i = 0; i < dim; ++i) {
    if (m[i] < -radius || m[i] > radius) return -1;
    idx = idx * side + (m[i] + radius);
  }
  return idx;
}

void ModeBox::mode_of(long long index, std::span<int> out) const {
  const long long side = 2LL * radius + 1;
  for (int i = dim - 1; i >= 0; --i) {
    out[i] = static_cast<int>(index % side) - radius;
    index /= side;
  }
}

bool ModeBox::contains(std::span<const int> m) const {
  for (int i = 0; i < dim; ++i)
    if (m[i] < -radius || m[i] > radius) return false;
  return true;
}

Lattice::Lattice(int dim, int cutoff) {
  if (dim < 1) fail(errc::invalid_argument, "lattice dimension must be >= 1, got " + std::to_string(dim));
  if (cutoff < 1) fail(errc::invalid_argument, "lattice cutoff must be >= 1, got " + std::to_string(cutoff));
  const long long budget = mode_budget();
  const long long side = 2LL * cutoff + 1;
  long long s = 1;
  for (int i = 0; i < dim; ++i) {
    if (s > budget / side + 1) {
      fail(errc::budget, "mode budget exceeded for (d=" + std::to_string(dim) + ", N=" + std::to_string(cutoff) +
                             "): (2N+1)^d > " + std::to_string(budget));
    }
    s *= side;
  }
  if (s > budget) {
    fail(errc::budget, "mode budget exceeded for (d=" + std::to_string(dim) + ", N=" + std::to_string(cutoff) +
                           "): " + std::to_string(s) + " modes > " + std::to_string(budget));
  }
  box_ = ModeBox{dim, cutoff};
  size_ = s;
}

std::vector<int> Lattice::mode(long long index) const {
  std::vector<int> m(static_cast<std::size_t>(dim()));
  box_.mode_of(index, m);
  return m;
}

double Lattice::mode_norm_sq(long long index) const {
  const long long side = 2LL * box_.radius + 1;
  double s = 0;
  for (int i = box_.dim - 1; i >= 0; --i) {
    const double c = static_cast<double>(index % side) - box_.radius;
    s += c * c;
    index /= side;
  }
  return s;
}

}  // namespace blochlab
