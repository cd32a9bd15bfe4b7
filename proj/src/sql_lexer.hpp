#pragma once

// Internal SQL token stream shared by the query analyzer and the DDL parser.

#include <algorithm>
#include <cctype>
#include <string>
#include <vector>

namespace requery::lex {

enum class TokKind { word, number, string, punct, end };

struct Token {
    TokKind kind = TokKind::end;
    std::string text;  // unquoted for quoted identifiers
    std::string upper; // uppercased text for keyword checks (words only)
    bool quoted = false;
};

struct ParseFail {
    std::string message;
};

inline std::string lower_copy(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

inline std::string upper_copy(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return s;
}

// Throws ParseFail on unterminated strings, quotes or block comments.
inline std::vector<Token> tokenize(const std::string& s) {
    std::vector<Token> toks;
    auto push = [&](TokKind kind, std::string text, bool quoted = false) {
        Token t;
        t.kind = kind;
        t.text = std::move(text);
        if (kind == TokKind::word) t.upper = upper_copy(t.text);
        t.quoted = quoted;
        toks.push_back(std::move(t));
    };

    std::size_t i = 0;
    const std::size_t n = s.size();
    while (i < n) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (c == '-' && i + 1 < n && s[i + 1] == '-') {
            while (i < n && s[i] != '\n') ++i;
            continue;
        }
        if (c == '/' && i + 1 < n && s[i + 1] == '*') {
            i += 2;
            while (i + 1 < n && !(s[i] == '*' && s[i + 1] == '/')) ++i;
            if (i + 1 >= n) throw ParseFail{"unterminated block comment"};
            i += 2;
            continue;
        }
        if (c == '\'') {
            std::string text;
            ++i;
            while (true) {
                if (i >= n) throw ParseFail{"unterminated string literal"};
                if (s[i] == '\'') {
                    if (i + 1 < n && s[i + 1] == '\'') {
                        text += '\'';
                        i += 2;
                        continue;
                    }
                    ++i;
                    break;
                }
                text += s[i++];
            }
            push(TokKind::string, text);
            continue;
        }
        if (c == '"' || c == '`' || c == '[') {
            char close = c == '[' ? ']' : c;
            std::string text;
            ++i;
            while (i < n && s[i] != close) text += s[i++];
            if (i >= n) throw ParseFail{std::string("unterminated quoted identifier: ") + c};
            ++i;
            push(TokKind::word, text, /*quoted=*/true);
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string text;
            while (i < n && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_' ||
                             s[i] == '$')) {
                text += s[i++];
            }
            push(TokKind::word, text);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < n && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
            std::string text;
            bool seen_e = false;
            while (i < n) {
                char d = s[i];
                if (std::isdigit(static_cast<unsigned char>(d)) || d == '.') {
                    text += d;
                    ++i;
                } else if ((d == 'e' || d == 'E') && !seen_e && i + 1 < n &&
                           (std::isdigit(static_cast<unsigned char>(s[i + 1])) || s[i + 1] == '+' ||
                            s[i + 1] == '-')) {
                    seen_e = true;
                    text += d;
                    ++i;
                    if (s[i] == '+' || s[i] == '-') text += s[i++];
                } else {
                    break;
                }
            }
            push(TokKind::number, text);
            continue;
        }
        static const char* two[] = {"<=", ">=", "<>", "!=", "||", "=="};
        bool matched = false;
        for (const char* op : two) {
            if (c == op[0] && i + 1 < n && s[i + 1] == op[1]) {
                push(TokKind::punct, op);
                i += 2;
                matched = true;
                break;
            }
        }
        if (matched) continue;
        push(TokKind::punct, std::string(1, c));
        ++i;
    }
    push(TokKind::end, "");
    return toks;
}

} // namespace requery::lex
