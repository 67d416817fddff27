#pragma once

#include <iosfwd>
#include <string>

#include "casad/ssa.hpp"

namespace casad {

/// Versioned binary model container. Layout (little-endian throughout):
///   magic "CASADMDL" + version byte 0x01
///   u64 N, u64 L, u64 r
///   u8 rule kind (0 explicit, 1 energy) + f64 energy fraction
///   f64 total_energy, f64 training_score_max
///   f64 eigenvalues[r], f64 centroid[r], f64 basis[L*r] (row-major L x r)
void save_model(const SsaModel& model, const std::string& path);
void save_model(const SsaModel& model, std::ostream& out);

SsaModel load_model(const std::string& path);
SsaModel load_model(std::istream& in);

}  // namespace casad
