#pragma once

#include <string>

#include "json.hpp"

#include "greenlab/maps.hpp"

namespace greenlab {

/// Map file schema:
/// {
///   "space": "P1" | "P2" | "P1xP1",
///   "components": [ [ {"exponents": [e0, ...],        // one per homogeneous var
///                      "coeff_re_num": 1, "coeff_re_den": 1,
///                      "coeff_im_num": 0, "coeff_im_den": 1}, ... ], ... ]
/// }
/// Components are validated for homogeneity/dominance and gcd-reduced on load.
RationalMap map_from_json(const nlohmann::json& j);
RationalMap load_map(const std::string& path);  // UsageError on parse/validation failure

nlohmann::json map_to_json(const RationalMap& f);

/// FNV-1a over the canonical (gcd-reduced, term-sorted) form; 16 hex chars.
/// Used in report file names: {experiment}-{maphash}-{seed}.{json,csv}.
std::string map_hash(const RationalMap& f);

}  // namespace greenlab
