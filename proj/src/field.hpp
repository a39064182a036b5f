#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lattice.hpp"

namespace blochlab {

enum class FieldRank { scalar, vector, matrix };

std::string to_string(FieldRank rank);

// Truncated Fourier representation of a periodic scalar / d-vector / q x q
// matrix function on the torus. Coefficients are stored densely over the
// lattice box, component-major. Immutable by convention once built.
class PeriodicField {
 public:
  static PeriodicField scalar(const Lattice& lattice);
  static PeriodicField vector_valued(const Lattice& lattice);
  static PeriodicField matrix_valued(const Lattice& lattice, int q);

  const Lattice& lattice() const { return lattice_; }
  FieldRank rank() const { return rank_; }
  int matrix_size() const { return q_; }
  int components() const { return components_; }

  cplx coeff(int comp, long long index) const { return data_[offset(comp, index)]; }
  void set_coeff(int comp, long long index, cplx value) { data_[offset(comp, index)] = value; }

  // Mode-addressed access; reads return 0 for modes outside the lattice,
  // writes reject them.
  cplx coeff_at(int comp, std::span<const int> m) const;
  void set_coeff_at(int comp, std::span<const int> m, cplx value);

  std::span<const cplx> component(int comp) const;

  bool real_flagged() const { return real_flagged_; }
  bool mean_zero_flagged() const { return mean_zero_; }
  std::optional<double> smoothness() const { return smoothness_; }

  // Flag setters verify the corresponding coefficient invariant
  // (conjugate symmetry for real, zero mean coefficient for mean-zero).
  void set_real_flagged(bool value);
  void set_mean_zero_flagged(bool value);
  void set_smoothness(std::optional<double> s) { smoothness_ = s; }

  double max_abs() const;
  // largest sup-norm |m| carrying a nonzero coefficient; 0 for the zero field
  int support_radius() const;
  bool is_zero() const;

  // Verifies conjugate symmetry coeff(-m) == conj(coeff(m)) up to rel_tol.
  bool conjugate_symmetric(double rel_tol = 1e-12) const;

 private:
  PeriodicField(const Lattice& lattice, FieldRank rank, int q);
  std::size_t offset(int comp, long long index) const {
    return static_cast<std::size_t>(comp) * static_cast<std::size_t>(lattice_.size()) +
           static_cast<std::size_t>(index);
  }

  Lattice lattice_;
  FieldRank rank_;
  int q_;
  int components_;
  bool real_flagged_ = false;
  bool mean_zero_ = false;
  std::optional<double> smoothness_;
  std::vector<cplx> data_;
};

// Fourier-side product u*v. Result modes outside the lattice box are dropped;
// their l2 weight is returned as truncation_loss.
// Rank rules: scalar*scalar -> scalar, scalar*X -> X, vector*vector -> scalar
// (dot product), matrix*matrix -> matrix product.
struct ConvolveResult {
  PeriodicField field;
  double truncation_loss;
};
ConvolveResult convolve(const PeriodicField& u, const PeriodicField& v);

// Dot-product convolution square of a vector field on a doubled box
// (radius 2N): exact for band-N inputs. Used by the operator assembly.
// Coefficients returned in ModeBox{d, 2N} ordering.
std::vector<cplx> convolve_square_extended(const PeriodicField& a);

struct SobolevReport {
  double exponent;
  double value;
};
// (sum_m (1+|m|^2)^s |u(m)|^2)^{1/2}, summed over all components.
SobolevReport sobolev_norm(const PeriodicField& u, double s);

double l2_norm(const PeriodicField& u);

// Diagonal multiplier (rho^2+|m|^2)^{1/2} (Euclidean |m|), forward or inverse.
PeriodicField apply_lambda(const PeriodicField& u, double rho, bool inverse = false);

// Gradient of a scalar field: (grad chi)_j(m) = 2 pi i m_j chi(m).
PeriodicField gradient(const PeriodicField& chi);

PeriodicField operator+(const PeriodicField& a, const PeriodicField& b);
PeriodicField operator-(const PeriodicField& a, const PeriodicField& b);
PeriodicField operator*(cplx scale, const PeriodicField& a);

// Field literal format: one header line
//   field rank=<scalar|vector|matrix> [q=<int>] real=<0|1> meanzero=<0|1> [s=<float>]
// followed by one line per stored nonzero mode: d integers then re/im pairs,
// one pair per component. Floats printed with 17 significant digits.
std::string format_field_literal(const PeriodicField& f);
PeriodicField parse_field_literal(const Lattice& lattice, std::string_view text);

}  // namespace blochlab
