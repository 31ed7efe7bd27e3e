#include "corkit/structext.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace corkit {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

[[noreturn]] void fail(std::string_view source, int line, const std::string& msg) {
    std::ostringstream os;
    os << source << ":" << line << ": " << msg;
    throw std::invalid_argument(os.str());
}

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-' ||
           c == '+';
}

// Pulls one whitespace-delimited word off the front of s.
std::string take_word(std::string_view& s) {
    s = trim(s);
    size_t i = 0;
    while (i < s.size() && is_word_char(s[i])) ++i;
    std::string w(s.substr(0, i));
    s.remove_prefix(i);
    return w;
}

std::vector<double> parse_row(std::string_view text, std::string_view source, int line) {
    std::vector<double> row;
    std::istringstream is{std::string(text)};
    std::string tok;
    while (is >> tok) {
        try {
            size_t used = 0;
            row.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            fail(source, line, "expected a number in matrix row, got '" + tok + "'");
        }
    }
    return row;
}

}  // namespace

double TextValue::as_number(std::string_view key) const {
    if (is_matrix()) throw std::invalid_argument(std::string(key) + ": expected a scalar, got a matrix");
    try {
        size_t used = 0;
        double v = std::stod(scalar, &used);
        if (used != scalar.size()) throw std::invalid_argument("");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string(key) + ": expected a number, got '" + scalar + "'");
    }
}

bool TextValue::as_bool(std::string_view key) const {
    if (scalar == "true" || scalar == "yes" || scalar == "1") return true;
    if (scalar == "false" || scalar == "no" || scalar == "0") return false;
    throw std::invalid_argument(std::string(key) + ": expected true/false, got '" + scalar + "'");
}

const TextValue* TextBlock::find(std::string_view key) const {
    auto it = entries.find(std::string(key));
    return it == entries.end() ? nullptr : &it->second;
}

std::vector<TextBlock> parse_blocks(std::string_view text, std::string_view source) {
    std::vector<TextBlock> blocks;
    TextBlock* open = nullptr;

    // Matrix continuation state: set while inside `key = [ ... ]`.
    std::string matrix_key;
    TextValue matrix_value;

    std::istringstream input{std::string(text)};
    std::string raw;
    int lineno = 0;
    while (std::getline(input, raw)) {
        ++lineno;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        if (!matrix_key.empty()) {
            bool closing = false;
            if (line.back() == ']') {
                closing = true;
                line = trim(line.substr(0, line.size() - 1));
            }
            if (!line.empty()) matrix_value.rows.push_back(parse_row(line, source, lineno));
            if (closing) {
                if (matrix_value.rows.empty())
                    fail(source, lineno, "empty matrix for '" + matrix_key + "'");
                open->entries.emplace(matrix_key, matrix_value);
                matrix_key.clear();
                matrix_value = {};
            }
            continue;
        }

        if (!open) {
            std::string_view rest = line;
            std::string kind = take_word(rest);
            std::string name = take_word(rest);
            rest = trim(rest);
            if (kind.empty() || name.empty() || rest != "{")
                fail(source, lineno, "expected 'kind name {', got '" + std::string(line) + "'");
            blocks.push_back({kind, name, lineno, {}});
            open = &blocks.back();
            continue;
        }

        if (line == "}") {
            open = nullptr;
            continue;
        }

        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            fail(source, lineno, "expected 'key = value' or '}', got '" + std::string(line) + "'");
        std::string key{trim(line.substr(0, eq))};
        std::string_view value = trim(line.substr(eq + 1));
        if (key.empty()) fail(source, lineno, "missing key before '='");
        if (open->entries.count(key)) fail(source, lineno, "duplicate key '" + key + "'");

        if (!value.empty() && value.front() == '[') {
            value = trim(value.substr(1));
            matrix_value = {};
            matrix_value.line = lineno;
            bool closing = false;
            if (!value.empty() && value.back() == ']') {
                closing = true;
                value = trim(value.substr(0, value.size() - 1));
            }
            if (!value.empty()) matrix_value.rows.push_back(parse_row(value, source, lineno));
            if (closing) {
                if (matrix_value.rows.empty()) fail(source, lineno, "empty matrix for '" + key + "'");
                open->entries.emplace(key, matrix_value);
            } else {
                matrix_key = key;
            }
            continue;
        }

        if (value.empty()) fail(source, lineno, "missing value for '" + key + "'");
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        TextValue tv;
        tv.scalar = std::string(value);
        tv.line = lineno;
        open->entries.emplace(key, tv);
    }

    if (!matrix_key.empty()) fail(source, lineno, "unterminated matrix for '" + matrix_key + "'");
    if (open) fail(source, lineno, "unterminated block '" + open->name + "'");
    return blocks;
}

std::vector<TextBlock> parse_blocks_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_blocks(buf.str(), path);
}

}  // namespace corkit
