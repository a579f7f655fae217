#pragma once

// File formats: system, certificate, SMIB parameter and verdict JSON, plus
// fixed-precision CSV formatting. Parse failures throw InvalidInput.

#include <cstdint>
#include <string>
#include <vector>

#include "passmat/interconnect.hpp"
#include "passmat/lti.hpp"
#include "passmat/passivity.hpp"
#include "passmat/smib.hpp"

namespace passmat::io {

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// {"A": [[...]], "B": [[...]], "C": [[...]], "D": [[...]]}; n = 0 allowed
/// with empty A, B, C.
StateSpace parse_system(const std::string& json_text);
std::string system_to_json(const StateSpace& sys);

/// {"phi", "xi", "kind", "provenance", "storage"}; storage may be null.
PassivityCertificate parse_certificate(const std::string& json_text);
std::string certificate_to_json(const PassivityCertificate& cert);

/// Accepts a bare nested array or an object with key "K".
Matrix parse_matrix(const std::string& json_text);

/// Missing fields keep their defaults; unknown fields are rejected.
SmibParams parse_smib_params(const std::string& json_text);
std::string smib_params_to_json(const SmibParams& p);

std::string verdict_to_json(const InterconnectionVerdict& v);

/// printf("%.12g"), locale independent; "inf", "-inf", "nan" for non-finite.
std::string fmt(double v);
std::string csv_row(const std::vector<std::string>& cells);

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::uint64_t fnv1a(const std::string& bytes);
std::string hex64(std::uint64_t h);

}  // namespace passmat::io
