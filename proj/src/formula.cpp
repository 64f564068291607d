#include "inkscore/formula.hpp"

#include <algorithm>
#include <cctype>

namespace inkscore {

std::string Term::name() const {
    std::string out;
    for (std::size_t i = 0; i < factors.size(); ++i) {
        if (i) out += ':';
        out += factors[i];
    }
    return out;
}

bool Term::same_factors(const Term& other) const {
    if (factors.size() != other.factors.size()) return false;
    std::vector<std::string> a = factors, b = other.factors;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
}

namespace {

struct Token {
    enum class Kind { ident, tilde, plus, colon, star, lparen, rparen, pipe, end };
    Kind kind;
    std::string text;
    std::size_t pos;
};

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

std::vector<Token> tokenize(const std::string& s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t pos = i;
        switch (c) {
            case '~': out.push_back({Token::Kind::tilde, "~", pos}); ++i; continue;
            case '+': out.push_back({Token::Kind::plus, "+", pos}); ++i; continue;
            case ':': out.push_back({Token::Kind::colon, ":", pos}); ++i; continue;
            case '*': out.push_back({Token::Kind::star, "*", pos}); ++i; continue;
            case '(': out.push_back({Token::Kind::lparen, "(", pos}); ++i; continue;
            case ')': out.push_back({Token::Kind::rparen, ")", pos}); ++i; continue;
            case '|': out.push_back({Token::Kind::pipe, "|", pos}); ++i; continue;
            default: break;
        }
        if (!ident_char(c))
            throw ValidationError("formula: unexpected character '" +
                                  std::string(1, c) + "' at position " +
                                  std::to_string(pos));
        std::size_t j = i;
        while (j < s.size() && ident_char(s[j])) ++j;
        out.push_back({Token::Kind::ident, s.substr(i, j - i), pos});
        i = j;
    }
    out.push_back({Token::Kind::end, "", s.size()});
    return out;
}

// What a sub-expression denotes: a list of terms, possibly plus a bare
// intercept '1'. Random intercepts are collected on the parser itself.
struct TermSet {
    std::vector<Term> terms;
    bool bare_one = false;
};

class Parser {
public:
    explicit Parser(const std::string& s) : tokens_(tokenize(s)) {}

    ModelSpec run() {
        ModelSpec spec;
        spec.response = expect_ident("response variable");
        expect(Token::Kind::tilde, "'~'");
        TermSet rhs = parse_sum();
        expect(Token::Kind::end, "end of formula");
        if (rhs.terms.empty() && !rhs.bare_one && !random_)
            throw ValidationError("formula: right-hand side is empty");

        for (Term& t : rhs.terms) {
            const bool dup = std::any_of(
                spec.fixed_terms.begin(), spec.fixed_terms.end(),
                [&](const Term& kept) { return kept.same_factors(t); });
            if (!dup) spec.fixed_terms.push_back(std::move(t));
        }
        // Main effects come first, interactions after, each in the order
        // they were formed.
        std::stable_partition(spec.fixed_terms.begin(), spec.fixed_terms.end(),
                              [](const Term& t) { return t.factors.size() == 1; });
        spec.random_intercept = random_;
        return spec;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        const std::size_t i = idx_ + ahead;
        return i < tokens_.size() ? tokens_[i] : tokens_.back();
    }
    const Token& take() { return tokens_[idx_++]; }

    [[noreturn]] void fail(const std::string& wanted) const {
        const Token& t = peek();
        const std::string got =
            t.kind == Token::Kind::end ? "end of formula" : "'" + t.text + "'";
        throw ValidationError("formula: expected " + wanted + " but found " +
                              got + " at position " + std::to_string(t.pos));
    }

    void expect(Token::Kind kind, const std::string& wanted) {
        if (peek().kind != kind) fail(wanted);
        take();
    }

    std::string expect_ident(const std::string& wanted) {
        if (peek().kind != Token::Kind::ident) fail(wanted);
        return take().text;
    }

    TermSet parse_sum() {
        TermSet acc = parse_product();
        while (peek().kind == Token::Kind::plus) {
            take();
            TermSet next = parse_product();
            acc.terms.insert(acc.terms.end(), next.terms.begin(), next.terms.end());
            acc.bare_one = acc.bare_one || next.bare_one;
        }
        return acc;
    }

    TermSet parse_product() {
        const std::size_t pos = peek().pos;
        TermSet acc = parse_interaction();
        while (peek().kind == Token::Kind::star) {
            take();
            TermSet rhs = parse_interaction();
            require_crossable(acc, rhs, "*", pos);
            TermSet expanded;
            expanded.terms = acc.terms;
            expanded.terms.insert(expanded.terms.end(), rhs.terms.begin(),
                                  rhs.terms.end());
            for (const Term& a : acc.terms)
                for (const Term& b : rhs.terms)
                    expanded.terms.push_back(cross(a, b));
            acc = std::move(expanded);
        }
        return acc;
    }

    TermSet parse_interaction() {
        const std::size_t pos = peek().pos;
        TermSet acc = parse_atom();
        while (peek().kind == Token::Kind::colon) {
            take();
            TermSet rhs = parse_atom();
            require_crossable(acc, rhs, ":", pos);
            TermSet crossed;
            for (const Term& a : acc.terms)
                for (const Term& b : rhs.terms)
                    crossed.terms.push_back(cross(a, b));
            acc = std::move(crossed);
        }
        return acc;
    }

    TermSet parse_atom() {
        const Token& t = peek();
        if (t.kind == Token::Kind::ident) {
            take();
            if (t.text == "1") return TermSet{{}, true};
            return TermSet{{Term{{t.text}}}, false};
        }
        if (t.kind == Token::Kind::lparen) {
            // '(1|group)' is a random intercept; anything else is grouping.
            if (peek(1).kind == Token::Kind::ident && peek(1).text == "1" &&
                peek(2).kind == Token::Kind::pipe) {
                const std::size_t pos = t.pos;
                take();  // (
                take();  // 1
                take();  // |
                const std::string group = expect_ident("grouping variable");
                expect(Token::Kind::rparen, "')'");
                if (random_)
                    throw ValidationError(
                        "formula: only one random intercept supported (second at position " +
                        std::to_string(pos) + ")");
                random_ = group;
                return TermSet{};
            }
            take();
            TermSet inner = parse_sum();
            expect(Token::Kind::rparen, "')'");
            return inner;
        }
        fail("a variable, '1', or '('");
    }

    static Term cross(const Term& a, const Term& b) {
        Term out = a;
        for (const std::string& f : b.factors)
            if (std::find(out.factors.begin(), out.factors.end(), f) ==
                out.factors.end())
                out.factors.push_back(f);
        return out;
    }

    void require_crossable(const TermSet& lhs, const TermSet& rhs,
                           const std::string& op, std::size_t pos) const {
        if (lhs.bare_one || rhs.bare_one)
            throw ValidationError("formula: '1' cannot participate in '" + op +
                                  "' (near position " + std::to_string(pos) + ")");
        if (lhs.terms.empty() || rhs.terms.empty())
            throw ValidationError("formula: a random intercept cannot participate in '" +
                                  op + "' (near position " + std::to_string(pos) + ")");
    }

    std::vector<Token> tokens_;
    std::size_t idx_ = 0;
    std::optional<std::string> random_;
};

} // namespace

ModelSpec parse_formula(const std::string& formula) {
    return Parser(formula).run();
}

std::string render_formula(const ModelSpec& spec) {
    std::string out = spec.response + " ~ ";
    if (spec.fixed_terms.empty()) {
        out += "1";
    } else {
        for (std::size_t i = 0; i < spec.fixed_terms.size(); ++i) {
            if (i) out += " + ";
            out += spec.fixed_terms[i].name();
        }
    }
    if (spec.random_intercept) out += " + (1|" + *spec.random_intercept + ")";
    return out;
}

} // namespace inkscore
