#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pinn::text {

/// 17 significant digits: parses back to the same double.
std::string format_double(double x);

/// Whole-token parse; throws DataError on trailing garbage or empty input.
double parse_double(std::string_view token);
long long parse_int(std::string_view token);

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

// Line-oriented checkpoint blocks shared by the network and trainer files.

/// "tensor <name> <rows> <cols>" followed by rows of space-separated values.
void write_tensor(std::ostream& out, const std::string& name, std::span<const double> values, long rows, long cols);
void read_tensor(std::istream& in, const std::string& name, std::span<double> dest, long rows, long cols);
/// Next non-blank line; DataError naming `what` at end of stream.
std::string next_line(std::istream& in, const char* what);
/// Reads "<key> <value>" and returns the value token.
std::string expect_key(std::istream& in, const std::string& key);

}  // namespace pinn::text
