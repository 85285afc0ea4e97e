#pragma once

#include "rkhskit/operators.hpp"

#include <string>

namespace rkhs {
namespace io {

/// {"kernel": name, "params": [...], "maps": [name, ...]} with optional
/// fitted-state block used by regressor round-trips.
std::string kernel_spec_to_json(const KernelSpec& spec, bool with_state = false);
KernelSpec kernel_spec_from_json(const std::string& text);

/// Versioned JSON with spec (state included), sites, theta, epsilon. Decimals
/// carry 17 significant digits, so load(save(r)) is bit-exact.
std::string regressor_to_json(const Regressor& reg);
Regressor regressor_from_json(const std::string& text);

Matrix read_csv(const std::string& path, bool header = false);
void write_csv(const std::string& path, const Matrix& m,
               const std::vector<std::string>& header = {});
std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

/// Format a double with 17 significant digits, locale independent.
std::string format_double(double v);

} // namespace io
} // namespace rkhs
