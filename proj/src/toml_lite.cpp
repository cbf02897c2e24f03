// SPDX-License-Identifier: Apache-2.0
#include "nleq/toml_lite.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

namespace nleq::toml {

using nlohmann::json;

namespace {

struct Cursor {
    std::string_view text;
    std::size_t at = 0;
    std::size_t line = 1;
    std::string origin;

    bool eof() const { return at >= text.size(); }
    char peek() const { return text[at]; }
    char take() {
        const char c = text[at++];
        if (c == '\n') ++line;
        return c;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw std::runtime_error(origin + ":" + std::to_string(line) + ": " + msg);
    }

    void skip_inline_ws() {
        while (!eof() && (peek() == ' ' || peek() == '\t')) take();
    }

    void skip_ws_and_comments(bool cross_lines) {
        while (!eof()) {
            const char c = peek();
            if (c == ' ' || c == '\t') {
                take();
            } else if (c == '#') {
                while (!eof() && peek() != '\n') take();
            } else if (cross_lines && (c == '\n' || c == '\r')) {
                take();
            } else {
                break;
            }
        }
    }

    void expect_line_end() {
        skip_inline_ws();
        if (eof()) return;
        if (peek() == '#') {
            while (!eof() && peek() != '\n') take();
        }
        if (eof()) return;
        if (peek() == '\r') take();
        if (eof()) return;
        if (peek() != '\n') fail("unexpected trailing characters");
        take();
    }
};

bool is_bare_key_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string parse_basic_string(Cursor& cur) {
    cur.take();  // opening quote
    std::string out;
    while (true) {
        if (cur.eof()) cur.fail("unterminated string");
        const char c = cur.take();
        if (c == '"') break;
        if (c == '\n') cur.fail("newline inside string");
        if (c == '\\') {
            if (cur.eof()) cur.fail("dangling escape");
            const char e = cur.take();
            switch (e) {
                case '"': out.push_back('"'); break;
                case '\\': out.push_back('\\'); break;
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case 'r': out.push_back('\r'); break;
                default: cur.fail(std::string("unsupported escape \\") + e);
            }
        } else {
            out.push_back(c);
        }
    }
    return out;
}

std::string parse_key(Cursor& cur) {
    if (!cur.eof() && cur.peek() == '"') return parse_basic_string(cur);
    std::string key;
    while (!cur.eof() && is_bare_key_char(cur.peek())) key.push_back(cur.take());
    if (key.empty()) cur.fail("expected a key");
    return key;
}

std::vector<std::string> parse_key_path(Cursor& cur) {
    std::vector<std::string> path;
    while (true) {
        cur.skip_inline_ws();
        path.push_back(parse_key(cur));
        cur.skip_inline_ws();
        if (!cur.eof() && cur.peek() == '.') {
            cur.take();
            continue;
        }
        break;
    }
    return path;
}

json parse_value(Cursor& cur);

json parse_array(Cursor& cur) {
    cur.take();  // '['
    json arr = json::array();
    while (true) {
        cur.skip_ws_and_comments(true);
        if (cur.eof()) cur.fail("unterminated array");
        if (cur.peek() == ']') {
            cur.take();
            break;
        }
        arr.push_back(parse_value(cur));
        cur.skip_ws_and_comments(true);
        if (cur.eof()) cur.fail("unterminated array");
        if (cur.peek() == ',') {
            cur.take();
        } else if (cur.peek() != ']') {
            cur.fail("expected ',' or ']' in array");
        }
    }
    return arr;
}

json parse_value(Cursor& cur) {
    cur.skip_inline_ws();
    if (cur.eof()) cur.fail("expected a value");
    const char c = cur.peek();
    if (c == '"') return parse_basic_string(cur);
    if (c == '[') return parse_array(cur);

    std::string token;
    while (!cur.eof()) {
        const char t = cur.peek();
        if (t == '\n' || t == '\r' || t == ',' || t == ']' || t == '#' || t == ' ' || t == '\t')
            break;
        token.push_back(cur.take());
    }
    if (token == "true") return true;
    if (token == "false") return false;
    if (token.empty()) cur.fail("expected a value");

    // TOML permits underscores in numbers
    std::string digits;
    for (char d : token)
        if (d != '_') digits.push_back(d);
    char* end = nullptr;
    if (digits.find_first_of(".eE") == std::string::npos) {
        const long long v = std::strtoll(digits.c_str(), &end, 10);
        if (end && *end == '\0') return v;
    }
    const double v = std::strtod(digits.c_str(), &end);
    if (!end || *end != '\0') cur.fail("cannot parse value '" + token + "'");
    return v;
}

// Resolve a dotted header path, descending through the latest element of any
// array of tables on the way.
json* navigate(json& root, const std::vector<std::string>& path, bool array_of_tables,
               Cursor& cur) {
    json* node = &root;
    for (std::size_t i = 0; i < path.size(); ++i) {
        const bool last = i + 1 == path.size();
        json& slot = (*node)[path[i]];
        if (last && array_of_tables) {
            if (slot.is_null()) slot = json::array();
            if (!slot.is_array()) cur.fail("'" + path[i] + "' is not an array of tables");
            slot.push_back(json::object());
            node = &slot.back();
        } else {
            if (slot.is_null()) slot = json::object();
            if (slot.is_array()) {
                if (slot.empty()) cur.fail("'" + path[i] + "' has no elements");
                node = &slot.back();
            } else if (slot.is_object()) {
                node = &slot;
            } else {
                cur.fail("'" + path[i] + "' is not a table");
            }
        }
    }
    return node;
}

}  // namespace

json parse(std::string_view text, const std::string& origin) {
    Cursor cur{text, 0, 1, origin};
    json root = json::object();
    json* table = &root;

    while (true) {
        cur.skip_ws_and_comments(true);
        if (cur.eof()) break;
        const char c = cur.peek();
        if (c == '[') {
            cur.take();
            bool array_of_tables = false;
            if (!cur.eof() && cur.peek() == '[') {
                cur.take();
                array_of_tables = true;
            }
            const auto path = parse_key_path(cur);
            if (cur.eof() || cur.take() != ']') cur.fail("expected ']' after table name");
            if (array_of_tables && (cur.eof() || cur.take() != ']'))
                cur.fail("expected ']]' after array-of-tables name");
            cur.expect_line_end();
            table = navigate(root, path, array_of_tables, cur);
        } else {
            const std::string key = parse_key(cur);
            cur.skip_inline_ws();
            if (cur.eof() || cur.take() != '=') cur.fail("expected '=' after key '" + key + "'");
            (*table)[key] = parse_value(cur);
            cur.expect_line_end();
        }
    }
    return root;
}

json parse_file(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    const std::string text = ss.str();
    return parse(text, path.string());
}

}  // namespace nleq::toml
