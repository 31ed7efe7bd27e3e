#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace corkit {

// Parses a length with an optional suffix (nm, um/µm, mm, m). A bare number
// is taken as meters.
double parse_length(std::string_view text);

// Parses a frequency with an optional suffix (Hz, kHz, MHz, GHz). A bare
// number is taken as Hz.
double parse_frequency(std::string_view text);

// Parses either a single value, a comma list "a,b,c", or a range
// "start:stop:step". A unit suffix on the last token applies to every value
// that has none of its own. Ranges are inclusive of the endpoint up to half
// a step of rounding slack.
std::vector<double> parse_length_list(std::string_view text);
std::vector<double> parse_frequency_list(std::string_view text);

// Shortest round-trip formatting used by every CSV/JSON writer so that
// identical runs produce byte-identical files.
std::string format_double(double v);

}  // namespace corkit
