#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace corkit {

// One value from a block entry: either a scalar token (number, word, quoted
// string) or a bracketed matrix of numbers with rows split by line breaks.
struct TextValue {
    std::string scalar;
    std::vector<std::vector<double>> rows;
    int line = 0;

    bool is_matrix() const { return !rows.empty(); }
    double as_number(std::string_view key) const;
    bool as_bool(std::string_view key) const;
};

// A `kind name { key = value ... }` block. Duplicate keys are rejected at
// parse time, so entries is a plain map.
struct TextBlock {
    std::string kind;
    std::string name;
    int line = 0;
    std::map<std::string, TextValue> entries;

    const TextValue* find(std::string_view key) const;
};

// Parses blocks from text. `source` names the origin in diagnostics
// ("file.mat:12: ..."). Comments run from '#' to end of line.
std::vector<TextBlock> parse_blocks(std::string_view text, std::string_view source);

std::vector<TextBlock> parse_blocks_file(const std::string& path);

}  // namespace corkit
