#include "corkit/units.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace corkit {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// Splits "1.15um" into the numeric part and the unit suffix.
void split_number_unit(std::string_view tok, std::string& num, std::string& unit) {
    tok = trim(tok);
    size_t i = 0;
    while (i < tok.size()) {
        char c = tok[i];
        bool numeric = (c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.';
        bool exponent = (c == 'e' || c == 'E') && i + 1 < tok.size() &&
                        (std::isdigit(static_cast<unsigned char>(tok[i + 1])) ||
                         tok[i + 1] == '+' || tok[i + 1] == '-');
        if (!numeric && !exponent) break;
        ++i;
    }
    num = std::string(tok.substr(0, i));
    unit = std::string(trim(tok.substr(i)));
}

double unit_scale(const std::string& unit, bool length, std::string_view context) {
    if (length) {
        if (unit == "nm") return 1e-9;
        if (unit == "um" || unit == "µm" || unit == "μm") return 1e-6;
        if (unit == "mm") return 1e-3;
        if (unit == "m") return 1.0;
        throw std::invalid_argument("unknown length unit '" + unit + "' in '" +
                                    std::string(context) + "'");
    }
    if (unit == "Hz" || unit == "hz") return 1.0;
    if (unit == "kHz" || unit == "khz") return 1e3;
    if (unit == "MHz" || unit == "mhz") return 1e6;
    if (unit == "GHz" || unit == "ghz") return 1e9;
    throw std::invalid_argument("unknown frequency unit '" + unit + "' in '" +
                                std::string(context) + "'");
}

double parse_number(const std::string& num, std::string_view context) {
    try {
        size_t used = 0;
        double v = std::stod(num, &used);
        if (used != num.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("cannot parse number from '" + std::string(context) + "'");
    }
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    size_t pos = 0;
    while (true) {
        size_t next = s.find(sep, pos);
        if (next == std::string_view::npos) {
            out.push_back(s.substr(pos));
            break;
        }
        out.push_back(s.substr(pos, next - pos));
        pos = next + 1;
    }
    return out;
}

std::vector<double> parse_list(std::string_view text, bool length) {
    std::string_view s = trim(text);
    if (s.empty()) throw std::invalid_argument("empty value list");

    char sep = s.find(':') != std::string_view::npos ? ':' : ',';
    auto parts = split(s, sep);
    bool is_range = (sep == ':');
    if (is_range && parts.size() != 3)
        throw std::invalid_argument("range must be start:stop:step, got '" + std::string(text) + "'");

    // A suffix on the last token supplies the unit for any token without one.
    std::string last_num, last_unit;
    split_number_unit(parts.back(), last_num, last_unit);
    double default_scale = last_unit.empty() ? 1.0 : unit_scale(last_unit, length, text);

    std::vector<double> vals;
    for (auto p : parts) {
        std::string num, unit;
        split_number_unit(p, num, unit);
        double scale = unit.empty() ? default_scale : unit_scale(unit, length, text);
        vals.push_back(parse_number(num, p) * scale);
    }

    if (!is_range) return vals;

    double start = vals[0], stop = vals[1], step = vals[2];
    if (step <= 0) throw std::invalid_argument("range step must be positive");
    if (stop < start) throw std::invalid_argument("range stop must be >= start");
    std::vector<double> out;
    int n = static_cast<int>(std::floor((stop - start) / step + 0.5));
    for (int i = 0; i <= n; ++i) {
        double v = start + i * step;
        if (v > stop + 0.5 * step) break;
        out.push_back(v);
    }
    return out;
}

double parse_single(std::string_view text, bool length) {
    std::string num, unit;
    split_number_unit(text, num, unit);
    double v = parse_number(num, text);
    return unit.empty() ? v : v * unit_scale(unit, length, text);
}

}  // namespace

double parse_length(std::string_view text) { return parse_single(text, true); }

double parse_frequency(std::string_view text) { return parse_single(text, false); }

std::vector<double> parse_length_list(std::string_view text) { return parse_list(text, true); }

std::vector<double> parse_frequency_list(std::string_view text) { return parse_list(text, false); }

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace corkit
