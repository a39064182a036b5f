#pragma once

#include <json.hpp>
#include <string>

#include "field.hpp"

namespace blochlab {

// Built-in potentials:
//   cos           amp * cos(2 pi x_axis)            params: amp, axis
//   mathieu       2 c * cos(2 pi x_1)               params: c
//   gauss-decay   random field, coeff ~ exp(-|m|^2/w), seeded   params: w, amp
//   single-mode-A vector potential amp * p cos(2 pi q.x)        params: amp, freq, polarization
//   zero          the zero field
// All presets produce real-flagged, mean-zero fields.
PeriodicField preset_field(const std::string& name, const nlohmann::json& params, const Lattice& lattice,
                           FieldRank rank, std::uint64_t seed);

}  // namespace blochlab
