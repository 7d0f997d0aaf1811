#include "cpg/query.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <map>

namespace cpg {

std::string_view to_string(NodeProperty p) { return p == NodeProperty::Content ? "content" : "context"; }

std::string_view to_string(QueryErrc e) {
    switch (e) {
        case QueryErrc::SyntaxError: return "SyntaxError";
        case QueryErrc::UnboundVariable: return "UnboundVariable";
        case QueryErrc::UnknownLabel: return "UnknownLabel";
        case QueryErrc::UnknownProperty: return "UnknownProperty";
        case QueryErrc::BoundsError: return "BoundsError";
        case QueryErrc::ResultLimitExceeded: return "ResultLimitExceeded";
    }
    return "?";
}

QueryError::QueryError(QueryErrc code, std::size_t position, std::string message, std::vector<std::string> expected)
    : std::runtime_error(std::string(to_string(code)) + " at offset " + std::to_string(position) + ": " + message),
      code_(code),
      position_(position),
      message_(std::move(message)),
      expected_(std::move(expected)) {}

std::string ReturnItem::column_name() const {
    switch (kind) {
        case Kind::Variable: return variable;
        case Kind::Nodes: return "nodes(" + variable + ")";
        case Kind::Property: return variable + "." + std::string(to_string(property));
    }
    return variable;
}

namespace {

enum class Tok {
    Ident, Int, String,
    LParen, RParen, LBracket, RBracket,
    Colon, Comma, Dot, DotDot, Star, Dash, Arrow, Eq, Semicolon,
    End,
};

struct Token {
    Tok kind;
    std::string text;  // identifier / unescaped string / digits
    std::size_t pos;
};

std::string describe(Tok t) {
    switch (t) {
        case Tok::Ident: return "identifier";
        case Tok::Int: return "integer";
        case Tok::String: return "string literal";
        case Tok::LParen: return "'('";
        case Tok::RParen: return "')'";
        case Tok::LBracket: return "'['";
        case Tok::RBracket: return "']'";
        case Tok::Colon: return "':'";
        case Tok::Comma: return "','";
        case Tok::Dot: return "'.'";
        case Tok::DotDot: return "'..'";
        case Tok::Star: return "'*'";
        case Tok::Dash: return "'-'";
        case Tok::Arrow: return "'->'";
        case Tok::Eq: return "'='";
        case Tok::Semicolon: return "';'";
        case Tok::End: return "end of input";
    }
    return "?";
}

[[noreturn]] void syntax(std::size_t pos, std::string msg, std::vector<std::string> expected = {}) {
    throw QueryError(QueryErrc::SyntaxError, pos, std::move(msg), std::move(expected));
}

std::vector<Token> lex(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        auto c = static_cast<unsigned char>(s[i]);
        if (std::isspace(c)) {
            ++i;
            continue;
        }
        std::size_t start = i;
        if (std::isalpha(c) || c == '_') {
            while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_')) ++i;
            out.push_back({Tok::Ident, std::string(s.substr(start, i - start)), start});
            continue;
        }
        if (std::isdigit(c)) {
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            out.push_back({Tok::Int, std::string(s.substr(start, i - start)), start});
            continue;
        }
        if (c == '"' || c == '\'') {
            char quote = static_cast<char>(c);
            std::string text;
            ++i;
            for (;;) {
                if (i >= s.size()) syntax(start, "unterminated string literal", {std::string("closing ") + quote});
                char ch = s[i];
                if (ch == '\\' && i + 1 < s.size() && (s[i + 1] == quote || s[i + 1] == '\\')) {
                    text.push_back(s[i + 1]);
                    i += 2;
                    continue;
                }
                ++i;
                if (ch == quote) break;
                text.push_back(ch);
            }
            out.push_back({Tok::String, std::move(text), start});
            continue;
        }
        auto two = s.substr(i, 2);
        if (two == "->") {
            out.push_back({Tok::Arrow, "->", start});
            i += 2;
            continue;
        }
        if (two == "..") {
            out.push_back({Tok::DotDot, "..", start});
            i += 2;
            continue;
        }
        Tok t;
        switch (c) {
            case '(': t = Tok::LParen; break;
            case ')': t = Tok::RParen; break;
            case '[': t = Tok::LBracket; break;
            case ']': t = Tok::RBracket; break;
            case ':': t = Tok::Colon; break;
            case ',': t = Tok::Comma; break;
            case '.': t = Tok::Dot; break;
            case '*': t = Tok::Star; break;
            case '-': t = Tok::Dash; break;
            case '=': t = Tok::Eq; break;
            case ';': t = Tok::Semicolon; break;
            default: syntax(start, "unexpected character '" + std::string(1, static_cast<char>(c)) + "'");
        }
        out.push_back({t, std::string(1, static_cast<char>(c)), start});
        ++i;
    }
    out.push_back({Tok::End, "", s.size()});
    return out;
}

bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(a[i])) != std::tolower(static_cast<unsigned char>(b[i]))) return false;
    return true;
}

constexpr std::string_view kKeywords[] = {"MATCH", "WHERE", "WITH", "RETURN", "AND", "CONTAINS"};

bool is_keyword(std::string_view s) {
    for (auto k : kKeywords)
        if (iequals(s, k)) return true;
    return false;
}

enum class VarKind { Node, Path };

class Parser {
public:
    Parser(std::string_view text, const ParseOptions& opts) : toks_(lex(text)), opts_(opts) {}

    QueryAst parse() {
        QueryAst ast;
        expect_keyword("MATCH");
        ast.clauses.emplace_back(match_clause());
        for (;;) {
            if (at_keyword("MATCH")) {
                advance();
                ast.clauses.emplace_back(match_clause());
            } else if (at_keyword("WHERE")) {
                advance();
                ast.clauses.emplace_back(where_clause());
            } else if (at_keyword("WITH")) {
                advance();
                ast.clauses.emplace_back(with_clause());
            } else if (at_keyword("RETURN")) {
                advance();
                ast.returns = return_clause();
                break;
            } else {
                syntax(peek().pos, "expected a clause", {"MATCH", "WHERE", "WITH", "RETURN"});
            }
        }
        if (peek().kind == Tok::Semicolon) advance();
        if (peek().kind != Tok::End) syntax(peek().pos, "unexpected input after RETURN clause", {"','", "';'", "end of input"});
        return ast;
    }

private:
    const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
    const Token& advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    bool at_keyword(std::string_view kw) const { return peek().kind == Tok::Ident && iequals(peek().text, kw); }

    void expect_keyword(std::string_view kw) {
        if (!at_keyword(kw)) syntax(peek().pos, "expected " + std::string(kw), {std::string(kw)});
        advance();
    }

    const Token& expect(Tok kind) {
        if (peek().kind != kind) syntax(peek().pos, "expected " + describe(kind) + ", found " + describe(peek().kind), {describe(kind)});
        return advance();
    }

    // identifier that is not a clause keyword
    const Token& expect_ident() {
        const auto& t = peek();
        if (t.kind != Tok::Ident || is_keyword(t.text)) syntax(t.pos, "expected identifier", {"identifier"});
        return advance();
    }

    void declare(const Token& name, VarKind kind) {
        auto it = scope_.find(name.text);
        if (it == scope_.end()) {
            scope_.emplace(name.text, kind);
            return;
        }
        if (kind == VarKind::Path || it->second == VarKind::Path)
            syntax(name.pos, "variable '" + name.text + "' is already declared");
    }

    void require(const Token& name, std::optional<VarKind> kind) {
        auto it = scope_.find(name.text);
        if (it == scope_.end()) throw QueryError(QueryErrc::UnboundVariable, name.pos, "variable '" + name.text + "' is not bound");
        if (kind && it->second != *kind)
            throw QueryError(QueryErrc::UnboundVariable, name.pos,
                             "variable '" + name.text + "' is not a " + (*kind == VarKind::Node ? "node" : "path") + " variable");
    }

    MatchClause match_clause() {
        MatchClause m;
        m.patterns.push_back(pattern());
        while (peek().kind == Tok::Comma) {
            advance();
            m.patterns.push_back(pattern());
        }
        return m;
    }

    PathPattern pattern() {
        PathPattern p;
        std::optional<Token> path_var;
        if (peek().kind == Tok::Ident) {
            path_var = expect_ident();
            expect(Tok::Eq);
            p.path_variable = path_var->text;
        }
        p.nodes.push_back(node_pattern());
        while (peek().kind == Tok::Dash) {
            p.hops.push_back(hop());
            p.nodes.push_back(node_pattern());
        }
        if (path_var) {
            if (p.hops.empty()) syntax(peek().pos, "a path variable needs at least one hop", {"'-'"});
            declare(*path_var, VarKind::Path);
        }
        return p;
    }

    NodePattern node_pattern() {
        NodePattern n;
        expect(Tok::LParen);
        if (peek().kind == Tok::Ident) {
            const auto& v = expect_ident();
            declare(v, VarKind::Node);
            n.variable = v.text;
        }
        if (peek().kind == Tok::Colon) {
            advance();
            const auto& label = expect(Tok::Ident);
            n.label = parse_category_query_label(label.text);
            if (!n.label)
                throw QueryError(QueryErrc::UnknownLabel, label.pos, "unknown label '" + label.text + "'",
                                 {"Disease_Condition", "Treatment_Option", "Evaluation"});
        }
        if (peek().kind != Tok::RParen)
            syntax(peek().pos, "expected ')' to close node pattern",
                   n.label || n.variable ? std::vector<std::string>{"':'", "')'"} : std::vector<std::string>{"identifier", "':'", "')'"});
        advance();
        return n;
    }

    int bound_int() {
        const auto& t = expect(Tok::Int);
        if (t.text.size() > 9) throw QueryError(QueryErrc::BoundsError, t.pos, "hop bound too large");
        return std::stoi(t.text);
    }

    Hop hop() {
        expect(Tok::Dash);
        expect(Tok::LBracket);
        Hop h;
        if (peek().kind == Tok::Star) {
            std::size_t star = advance().pos;
            int lo = bound_int();
            expect(Tok::DotDot);
            int hi = bound_int();
            if (lo < 1) throw QueryError(QueryErrc::BoundsError, star, "minimum hop count must be at least 1");
            if (hi < lo) throw QueryError(QueryErrc::BoundsError, star, "maximum hop count is below the minimum");
            if (hi > opts_.hop_cap)
                throw QueryError(QueryErrc::BoundsError, star,
                                 "maximum hop count exceeds the cap of " + std::to_string(opts_.hop_cap));
            h.bounds = HopBounds{lo, hi};
        }
        if (peek().kind != Tok::RBracket)
            syntax(peek().pos, "expected ']'", h.bounds ? std::vector<std::string>{"']'"} : std::vector<std::string>{"'*'", "']'"});
        advance();
        expect(Tok::Arrow);
        return h;
    }

    NodeProperty property(const Token& name) {
        if (name.text == "content") return NodeProperty::Content;
        if (name.text == "context") return NodeProperty::Context;
        throw QueryError(QueryErrc::UnknownProperty, name.pos, "unknown property '" + name.text + "'", {"content", "context"});
    }

    bool at_call(std::string_view fn) const {
        return peek().kind == Tok::Ident && iequals(peek().text, fn) && peek(1).kind == Tok::LParen;
    }

    WhereClause where_clause() {
        WhereClause w;
        w.filters.push_back(filter());
        while (at_keyword("AND")) {
            advance();
            w.filters.push_back(filter());
        }
        return w;
    }

    ContainsFilter filter() {
        ContainsFilter f;
        bool folded_subject = false;
        if (at_call("toLower")) {
            advance();
            advance();
            folded_subject = true;
        }
        const auto& var = expect_ident();
        require(var, VarKind::Node);
        expect(Tok::Dot);
        f.variable = var.text;
        f.property = property(expect(Tok::Ident));
        if (folded_subject) expect(Tok::RParen);

        expect_keyword("CONTAINS");

        bool folded_needle = false;
        if (at_call("toLower")) {
            advance();
            advance();
            folded_needle = true;
        }
        const auto& lit = expect(Tok::String);
        if (lit.text.empty()) syntax(lit.pos, "CONTAINS needle must be non-empty");
        f.needle = lit.text;
        if (folded_needle) expect(Tok::RParen);
        f.case_folded = folded_subject || folded_needle;
        return f;
    }

    WithClause with_clause() {
        WithClause w;
        std::vector<const Token*> names;
        do {
            if (!names.empty()) advance();
            const auto& v = expect_ident();
            require(v, std::nullopt);
            names.push_back(&v);
            w.variables.push_back(v.text);
        } while (peek().kind == Tok::Comma);
        std::map<std::string, VarKind> kept;
        for (const auto* n : names) kept.emplace(n->text, scope_.at(n->text));
        scope_ = std::move(kept);
        return w;
    }

    std::vector<ReturnItem> return_clause() {
        std::vector<ReturnItem> items;
        do {
            if (!items.empty()) advance();
            ReturnItem item;
            if (at_call("nodes")) {
                advance();
                advance();
                const auto& v = expect_ident();
                require(v, VarKind::Path);
                expect(Tok::RParen);
                item.kind = ReturnItem::Kind::Nodes;
                item.variable = v.text;
            } else {
                const auto& v = expect_ident();
                item.variable = v.text;
                if (peek().kind == Tok::Dot) {
                    advance();
                    require(v, VarKind::Node);
                    item.kind = ReturnItem::Kind::Property;
                    item.property = property(expect(Tok::Ident));
                } else {
                    require(v, std::nullopt);
                }
            }
            items.push_back(std::move(item));
        } while (peek().kind == Tok::Comma);
        return items;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    ParseOptions opts_;
    std::map<std::string, VarKind> scope_;
};

}  // namespace

QueryAst parse_query(std::string_view text, const ParseOptions& options) {
    return Parser(text, options).parse();
}

namespace {

std::string quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void render_node(std::string& out, const NodePattern& n) {
    out += '(';
    if (n.variable) out += *n.variable;
    if (n.label) {
        out += ':';
        out += category_query_label(*n.label);
    }
    out += ')';
}

}  // namespace

std::string render_query(const QueryAst& ast) {
    std::string out;
    for (const auto& clause : ast.clauses) {
        if (const auto* m = std::get_if<MatchClause>(&clause)) {
            out += "MATCH ";
            for (std::size_t i = 0; i < m->patterns.size(); ++i) {
                const auto& p = m->patterns[i];
                if (i) out += ", ";
                if (p.path_variable) out += *p.path_variable + " = ";
                render_node(out, p.nodes[0]);
                for (std::size_t h = 0; h < p.hops.size(); ++h) {
                    out += "-[";
                    if (const auto& b = p.hops[h].bounds) out += "*" + std::to_string(b->min) + ".." + std::to_string(b->max);
                    out += "]->";
                    render_node(out, p.nodes[h + 1]);
                }
            }
        } else if (const auto* w = std::get_if<WhereClause>(&clause)) {
            out += "WHERE ";
            for (std::size_t i = 0; i < w->filters.size(); ++i) {
                const auto& f = w->filters[i];
                if (i) out += " AND ";
                std::string subject = f.variable + "." + std::string(to_string(f.property));
                out += f.case_folded ? "toLower(" + subject + ")" : subject;
                out += " CONTAINS ";
                out += quote(f.needle);
            }
        } else if (const auto* with = std::get_if<WithClause>(&clause)) {
            out += "WITH ";
            for (std::size_t i = 0; i < with->variables.size(); ++i) out += (i ? ", " : "") + with->variables[i];
        }
        out += '\n';
    }
    out += "RETURN ";
    for (std::size_t i = 0; i < ast.returns.size(); ++i) out += (i ? ", " : "") + ast.returns[i].column_name();
    out += '\n';
    return out;
}

QueryAst with_upper_bounds(const QueryAst& ast, int max) {
    QueryAst out = ast;
    for (auto& clause : out.clauses)
        if (auto* m = std::get_if<MatchClause>(&clause))
            for (auto& p : m->patterns)
                for (auto& h : p.hops)
                    if (h.bounds) h.bounds->max = std::max(h.bounds->max, max);
    return out;
}

}  // namespace cpg
