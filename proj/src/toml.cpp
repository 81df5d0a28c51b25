#include "ragwatt/toml.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "ragwatt/errors.hpp"

namespace ragwatt::toml {

using nlohmann::json;

namespace {

struct Parser {
    std::string_view text;
    size_t pos = 0;
    size_t line = 1;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ConfigError("TOML line " + std::to_string(line) + ": " + msg);
    }

    bool eof() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }

    char get() {
        char c = text[pos++];
        if (c == '\n') ++line;
        return c;
    }

    void skip_ws(bool cross_lines) {
        while (!eof()) {
            char c = peek();
            if (c == ' ' || c == '\t' || c == '\r') {
                ++pos;
            } else if (c == '#') {
                while (!eof() && peek() != '\n') ++pos;
            } else if (c == '\n' && cross_lines) {
                get();
            } else {
                break;
            }
        }
    }

    void expect_line_end() {
        skip_ws(false);
        if (eof()) return;
        if (peek() != '\n') fail("unexpected trailing characters");
        get();
    }

    std::string parse_basic_string() {
        std::string out;
        get();  // opening quote
        while (true) {
            if (eof()) fail("unterminated string");
            char c = get();
            if (c == '"') break;
            if (c == '\n') fail("newline in basic string");
            if (c == '\\') {
                if (eof()) fail("unterminated escape");
                char e = get();
                switch (e) {
                    case 'n': out.push_back('\n'); break;
                    case 't': out.push_back('\t'); break;
                    case 'r': out.push_back('\r'); break;
                    case '"': out.push_back('"'); break;
                    case '\\': out.push_back('\\'); break;
                    default: fail(std::string("unsupported escape \\") + e);
                }
            } else {
                out.push_back(c);
            }
        }
        return out;
    }

    std::string parse_literal_string() {
        std::string out;
        get();  // opening quote
        while (true) {
            if (eof()) fail("unterminated string");
            char c = get();
            if (c == '\'') break;
            if (c == '\n') fail("newline in literal string");
            out.push_back(c);
        }
        return out;
    }

    static bool is_bare_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
    }

    std::string parse_key_segment() {
        skip_ws(false);
        if (eof()) fail("expected key");
        if (peek() == '"') return parse_basic_string();
        if (peek() == '\'') return parse_literal_string();
        std::string out;
        while (!eof() && is_bare_char(peek())) out.push_back(get());
        if (out.empty()) fail("expected key");
        return out;
    }

    std::vector<std::string> parse_dotted_key() {
        std::vector<std::string> segments{parse_key_segment()};
        skip_ws(false);
        while (!eof() && peek() == '.') {
            get();
            segments.push_back(parse_key_segment());
            skip_ws(false);
        }
        return segments;
    }

    json parse_scalar() {
        std::string token;
        while (!eof()) {
            char c = peek();
            if (c == ',' || c == ']' || c == '\n' || c == '#' || c == ' ' || c == '\t' || c == '\r') break;
            token.push_back(get());
        }
        if (token.empty()) fail("expected a value");
        if (token == "true") return true;
        if (token == "false") return false;

        std::string digits;
        for (char c : token)
            if (c != '_') digits.push_back(c);
        const bool maybe_float = digits.find_first_of(".eE") != std::string::npos;
        try {
            size_t used = 0;
            if (!maybe_float) {
                long long v = std::stoll(digits, &used);
                if (used == digits.size()) return v;
            }
            double d = std::stod(digits, &used);
            if (used == digits.size()) return d;
        } catch (...) {
        }
        fail("cannot parse value '" + token + "'");
    }

    json parse_value() {
        skip_ws(false);
        if (eof()) fail("expected a value");
        char c = peek();
        if (c == '"') return parse_basic_string();
        if (c == '\'') return parse_literal_string();
        if (c == '[') {
            get();
            json arr = json::array();
            skip_ws(true);
            if (!eof() && peek() == ']') {
                get();
                return arr;
            }
            while (true) {
                skip_ws(true);
                arr.push_back(parse_value());
                skip_ws(true);
                if (eof()) fail("unterminated array");
                char d = get();
                if (d == ']') break;
                if (d != ',') fail("expected ',' or ']' in array");
                skip_ws(true);
                if (!eof() && peek() == ']') {  // trailing comma
                    get();
                    break;
                }
            }
            return arr;
        }
        if (c == '{') fail("inline tables are not supported");
        return parse_scalar();
    }
};

json* descend(json& root, const std::vector<std::string>& path, Parser& p) {
    json* node = &root;
    for (const auto& seg : path) {
        if (node->is_array()) node = &node->back();
        if (!node->is_object()) p.fail("key path crosses a non-table value at '" + seg + "'");
        json& next = (*node)[seg];
        if (next.is_null()) next = json::object();
        node = &next;
    }
    if (node->is_array()) node = &node->back();
    return node;
}

}  // namespace

json parse(std::string_view text) {
    json root = json::object();
    Parser p{text};
    json* current = &root;

    while (true) {
        p.skip_ws(true);
        if (p.eof()) break;

        if (p.peek() == '[') {
            p.get();
            const bool array_of_tables = !p.eof() && p.peek() == '[';
            if (array_of_tables) p.get();
            auto path = p.parse_dotted_key();
            p.skip_ws(false);
            if (p.eof() || p.get() != ']') p.fail("expected ']' to close table header");
            if (array_of_tables && (p.eof() || p.get() != ']')) p.fail("expected ']]' to close header");

            if (array_of_tables) {
                std::vector<std::string> parent(path.begin(), path.end() - 1);
                json* holder = descend(root, parent, p);
                json& arr = (*holder)[path.back()];
                if (arr.is_null()) arr = json::array();
                if (!arr.is_array()) p.fail("'" + path.back() + "' is not an array of tables");
                arr.push_back(json::object());
                current = &arr.back();
            } else {
                current = descend(root, path, p);
                if (!current->is_object()) p.fail("table header redefines a value");
            }
            p.expect_line_end();
            continue;
        }

        auto key_path = p.parse_dotted_key();
        p.skip_ws(false);
        if (p.eof() || p.get() != '=') p.fail("expected '=' after key");
        json value = p.parse_value();
        p.expect_line_end();

        std::vector<std::string> parent(key_path.begin(), key_path.end() - 1);
        json* holder = descend(*current, parent, p);
        if (holder->contains(key_path.back())) p.fail("duplicate key '" + key_path.back() + "'");
        (*holder)[key_path.back()] = std::move(value);
    }
    return root;
}

json parse_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

}  // namespace ragwatt::toml
