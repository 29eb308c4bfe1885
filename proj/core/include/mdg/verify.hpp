#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace mdg {

struct VerifyReport {
  std::string format;   // MDSQ, MDFL, MDAF, MDTP, MDNN, PPM, PGM, WAV
  std::string summary;  // human-readable dimensions
};

/// Identify an artifact by its magic, decode it fully and check its
/// invariants. Throws ParseError describing the first violation.
VerifyReport verify_artifact(std::span<const std::uint8_t> bytes);
VerifyReport verify_file(const std::string& path);

}  // namespace mdg
