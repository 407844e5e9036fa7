#pragma once
// Minimal TOML reader covering what run configs actually use: [table]
// headers, `key = value` pairs, strings, integers, floats, booleans, and
// flat homogeneous arrays, with `#` comments. Anything outside that subset
// is rejected with a line-numbered error; there is no silent fallback. A
// full TOML implementation was deliberately not pulled in: configs are part
// of the reproducibility contract and must fail loudly on typos.

#include <cctype>
#include <charconv>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "common.hpp"

namespace ggl::toml {

struct Value;
using Array = std::vector<Value>;

struct Value {
    std::variant<std::string, long long, double, bool, Array> v;
    int line = 0;

    bool is_string() const { return std::holds_alternative<std::string>(v); }
    bool is_int() const { return std::holds_alternative<long long>(v); }
    bool is_float() const { return std::holds_alternative<double>(v); }
    bool is_bool() const { return std::holds_alternative<bool>(v); }
    bool is_array() const { return std::holds_alternative<Array>(v); }

    // numeric accessor: integers promote to double
    double as_double() const {
        if (is_int()) return static_cast<double>(std::get<long long>(v));
        return std::get<double>(v);
    }
};

// Keys are full dotted paths ("problem.epsilon"); insertion order preserved
// is not needed, lookups are by exact path.
using Table = std::map<std::string, Value>;

namespace detail {

[[noreturn]] inline void fail(int line, const std::string& msg) {
    throw validation_error("config line " + std::to_string(line) + ": " + msg);
}

inline std::string_view strip(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

inline bool bare_key_ok(std::string_view k) {
    if (k.empty()) return false;
    for (char c : k)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
    return true;
}

// cuts a trailing comment that is not inside a string literal
inline std::string_view cut_comment(std::string_view s, int line) {
    bool in_str = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (in_str) {
            if (c == '\\') {
                ++i;
            } else if (c == '"') {
                in_str = false;
            }
        } else if (c == '"') {
            in_str = true;
        } else if (c == '#') {
            return s.substr(0, i);
        }
    }
    if (in_str) fail(line, "unterminated string");
    return s;
}

inline std::string parse_string(std::string_view s, std::size_t& i, int line) {
    // s[i] == '"'
    ++i;
    std::string out;
    while (i < s.size()) {
        char c = s[i++];
        if (c == '"') return out;
        if (c == '\\') {
            if (i >= s.size()) fail(line, "dangling escape in string");
            char e = s[i++];
            switch (e) {
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                case 'r': out += '\r'; break;
                default: fail(line, std::string("unsupported escape \\") + e);
            }
        } else {
            out += c;
        }
    }
    fail(line, "unterminated string");
}

Value parse_value(std::string_view s, std::size_t& i, int line);

inline Value parse_scalar_token(std::string_view tok, int line) {
    Value val;
    val.line = line;
    if (tok == "true") {
        val.v = true;
        return val;
    }
    if (tok == "false") {
        val.v = false;
        return val;
    }
    // integer first, then float; full-token match required
    {
        long long n = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), n);
        if (ec == std::errc() && p == tok.data() + tok.size()) {
            val.v = n;
            return val;
        }
    }
    {
        double d = 0.0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), d);
        if (ec == std::errc() && p == tok.data() + tok.size()) {
            val.v = d;
            return val;
        }
    }
    fail(line, "cannot parse value '" + std::string(tok) + "'");
}

inline Value parse_array(std::string_view s, std::size_t& i, int line) {
    // s[i] == '['
    ++i;
    Array arr;
    bool expect_value = true;
    while (true) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        if (i >= s.size()) fail(line, "unterminated array");
        if (s[i] == ']') {
            if (expect_value && !arr.empty()) fail(line, "trailing comma in array");
            ++i;
            break;
        }
        if (!expect_value) {
            if (s[i] != ',') fail(line, "expected ',' or ']' in array");
            ++i;
            expect_value = true;
            continue;
        }
        arr.push_back(parse_value(s, i, line));
        expect_value = false;
    }
    if (!arr.empty()) {
        for (const Value& e : arr) {
            bool num_head = arr.front().is_int() || arr.front().is_float();
            bool num_elem = e.is_int() || e.is_float();
            if (num_head != num_elem || (!num_head && e.v.index() != arr.front().v.index()))
                fail(line, "arrays must be homogeneous");
        }
    }
    Value val;
    val.line = line;
    val.v = std::move(arr);
    return val;
}

inline Value parse_value(std::string_view s, std::size_t& i, int line) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    if (i >= s.size()) fail(line, "missing value");
    if (s[i] == '"') {
        Value val;
        val.line = line;
        val.v = parse_string(s, i, line);
        return val;
    }
    if (s[i] == '[') return parse_array(s, i, line);
    std::size_t start = i;
    while (i < s.size() && s[i] != ',' && s[i] != ']' && s[i] != ' ' && s[i] != '\t') ++i;
    return parse_scalar_token(s.substr(start, i - start), line);
}

}  // namespace detail

inline Table parse(const std::string& text) {
    Table out;
    std::string prefix;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view raw(text.data() + pos, (eol == std::string::npos ? text.size() : eol) - pos);
        pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        std::string_view s = detail::strip(detail::cut_comment(raw, line_no));
        if (s.empty()) continue;

        if (s.front() == '[') {
            if (s.back() != ']') detail::fail(line_no, "malformed table header");
            std::string_view name = detail::strip(s.substr(1, s.size() - 2));
            for (std::string_view part = name; !part.empty();) {
                std::size_t dot = part.find('.');
                std::string_view head = part.substr(0, dot);
                if (!detail::bare_key_ok(head)) detail::fail(line_no, "bad table name '" + std::string(name) + "'");
                part = dot == std::string_view::npos ? std::string_view{} : part.substr(dot + 1);
            }
            prefix = std::string(name) + ".";
            continue;
        }

        std::size_t eq = std::string_view::npos;
        bool in_str = false;
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (in_str) {
                if (s[i] == '\\')
                    ++i;
                else if (s[i] == '"')
                    in_str = false;
            } else if (s[i] == '"') {
                in_str = true;
            } else if (s[i] == '=') {
                eq = i;
                break;
            }
        }
        if (eq == std::string_view::npos) detail::fail(line_no, "expected key = value");
        std::string_view key = detail::strip(s.substr(0, eq));
        if (!detail::bare_key_ok(key))
            detail::fail(line_no, "bad key '" + std::string(key) + "' (bare keys only)");

        std::string_view rest = s.substr(eq + 1);
        std::size_t i = 0;
        Value val = detail::parse_value(rest, i, line_no);
        while (i < rest.size() && (rest[i] == ' ' || rest[i] == '\t')) ++i;
        if (i < rest.size()) detail::fail(line_no, "trailing characters after value");

        std::string full = prefix + std::string(key);
        if (out.count(full)) detail::fail(line_no, "duplicate key '" + full + "'");
        out.emplace(std::move(full), std::move(val));
    }
    return out;
}

}  // namespace ggl::toml
