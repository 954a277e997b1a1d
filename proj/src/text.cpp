#include "pinn/text.hpp"

#include "pinn/error.hpp"

#include <array>
#include <istream>
#include <ostream>
#include <string>
#include <charconv>
#include <system_error>

namespace pinn::text {

std::string format_double(double x)
{
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

std::string_view trim(std::string_view s)
{
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_double(std::string_view token)
{
    token = trim(token);
    if (!token.empty() && token.front() == '+') {
        token.remove_prefix(1);
    }
    double x = 0.0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), x);
    if (token.empty() || res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
        throw DataError("not a number: '" + std::string(token) + "'");
    }
    return x;
}

long long parse_int(std::string_view token)
{
    token = trim(token);
    long long x = 0;
    const auto res = std::from_chars(token.data(), token.data() + token.size(), x);
    if (token.empty() || res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
        throw DataError("not an integer: '" + std::string(token) + "'");
    }
    return x;
}

std::vector<std::string_view> split(std::string_view line, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

void write_tensor(std::ostream& out, const std::string& name, std::span<const double> values, long rows, long cols)
{
    out << "tensor " << name << ' ' << rows << ' ' << cols << '\n';
    for (long r = 0; r < rows; ++r) {
        for (long c = 0; c < cols; ++c) {
            out << (c == 0 ? "" : " ") << format_double(values[static_cast<std::size_t>(r * cols + c)]);
        }
        out << '\n';
    }
}

std::string next_line(std::istream& in, const char* what)
{
    std::string line;
    while (std::getline(in, line)) {
        if (!trim(line).empty()) {
            return line;
        }
    }
    throw DataError(std::string("checkpoint truncated while reading ") + what);
}

std::string expect_key(std::istream& in, const std::string& key)
{
    const std::string line = next_line(in, key.c_str());
    const auto tokens = split(trim(line), ' ');
    if (tokens.size() != 2 || tokens[0] != key) {
        throw DataError("checkpoint: expected '" + key + " <value>', got '" + line + "'");
    }
    return std::string(tokens[1]);
}

void read_tensor(std::istream& in, const std::string& name, std::span<double> dest, long rows, long cols)
{
    const std::string header = next_line(in, name.c_str());
    const auto tokens = split(trim(header), ' ');
    if (tokens.size() != 4 || tokens[0] != "tensor" || tokens[1] != name || parse_int(tokens[2]) != rows ||
        parse_int(tokens[3]) != cols) {
        throw DataError("checkpoint: expected tensor " + name + " " + std::to_string(rows) + "x" +
                        std::to_string(cols) + ", got '" + header + "'");
    }
    for (long r = 0; r < rows; ++r) {
        const std::string line = next_line(in, name.c_str());
        const auto cells = split(trim(line), ' ');
        if (static_cast<long>(cells.size()) != cols) {
            throw DataError("checkpoint: tensor " + name + " row " + std::to_string(r) + " has wrong length");
        }
        for (long c = 0; c < cols; ++c) {
            dest[static_cast<std::size_t>(r * cols + c)] = parse_double(cells[static_cast<std::size_t>(c)]);
        }
    }
}

}  // namespace pinn::text
