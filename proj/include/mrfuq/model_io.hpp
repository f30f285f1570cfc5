#pragma once

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "factor_model.hpp"

namespace mrfuq {

// Text model format (whitespace separated, '#' starts a comment):
//
//   mrf 1
//   nodes <N>
//   cardinalities <k_0> ... <k_{N-1}>
//   edges <E>
//   <i> <j>                      (E lines, 0-based ids)
//   factors <F>
//   clique <ids...>              (F blocks, one per maximal clique)
//   weight <w>
//   table <v_0> ... <v_{T-1}>    (one line; mixed radix, lowest clique node fastest)

namespace detail {

struct Token {
    std::string text;
    std::size_t line = 0;
    std::size_t col = 0;
};

class Tokenizer {
public:
    explicit Tokenizer(const std::string& s) {
        std::size_t line = 1, col = 1;
        std::size_t i = 0;
        while (i < s.size()) {
            char c = s[i];
            if (c == '#') {
                while (i < s.size() && s[i] != '\n') ++i;
                continue;
            }
            if (c == '\n') {
                ++line;
                col = 1;
                ++i;
                lines_.push_back(toks_.size());
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\r') {
                ++i;
                ++col;
                continue;
            }
            Token t{"", line, col};
            while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r' && s[i] != '\n' &&
                   s[i] != '#') {
                t.text += s[i++];
                ++col;
            }
            toks_.push_back(std::move(t));
        }
        end_line_ = line;
        end_col_ = col;
    }

    bool done() const { return pos_ >= toks_.size(); }

    const Token& next(const char* what) {
        if (done()) throw ParseError(std::string("unexpected end of input, expected ") + what,
                                     end_line_, end_col_);
        return toks_[pos_++];
    }

    const Token* peek() const { return done() ? nullptr : &toks_[pos_]; }

    void keyword(const char* kw) {
        const Token& t = next(kw);
        if (t.text != kw)
            throw ParseError("expected '" + std::string(kw) + "', found '" + t.text + "'", t.line,
                             t.col);
    }

    std::size_t count(const char* what) {
        const Token& t = next(what);
        std::size_t v = 0;
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || p != t.text.data() + t.text.size())
            throw ParseError(std::string("expected non-negative integer for ") + what + ", found '" +
                                 t.text + "'",
                             t.line, t.col);
        return v;
    }

    double real(const char* what) {
        const Token& t = next(what);
        double v = 0;
        auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || p != t.text.data() + t.text.size() || !std::isfinite(v))
            throw ParseError(std::string("expected finite real for ") + what + ", found '" +
                                 t.text + "'",
                             t.line, t.col);
        return v;
    }

    // Tokens remaining on the line of the previous token.
    std::vector<const Token*> rest_of_line() {
        std::vector<const Token*> out;
        if (pos_ == 0) return out;
        std::size_t line = toks_[pos_ - 1].line;
        while (!done() && toks_[pos_].line == line) out.push_back(&toks_[pos_++]);
        return out;
    }

    const Token& last() const { return toks_[pos_ - 1]; }

private:
    std::vector<Token> toks_;
    std::vector<std::size_t> lines_;
    std::size_t pos_ = 0;
    std::size_t end_line_ = 1, end_col_ = 1;
};

inline std::string fmt_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    // shortest form that round-trips
    for (int p = 1; p <= 17; ++p) {
        char b2[32];
        std::snprintf(b2, sizeof b2, "%.*g", p, v);
        if (std::strtod(b2, nullptr) == v) return b2;
    }
    return buf;
}

} // namespace detail

inline LogLinearModel parse_model(const std::string& text) {
    detail::Tokenizer tk(text);
    tk.keyword("mrf");
    {
        const auto& t = tk.next("format version");
        if (t.text != "1") throw ParseError("unsupported format version '" + t.text + "'", t.line, t.col);
    }
    tk.keyword("nodes");
    std::size_t n = tk.count("node count");
    if (n == 0) throw ParseError("node count must be positive", tk.last().line, tk.last().col);
    tk.keyword("cardinalities");
    std::vector<std::size_t> card(n);
    for (auto& c : card) {
        c = tk.count("cardinality");
        if (c < 2) throw ParseError("cardinality must be at least 2", tk.last().line, tk.last().col);
    }
    tk.keyword("edges");
    std::size_t e = tk.count("edge count");
    UndirectedGraph g(n);
    for (std::size_t k = 0; k < e; ++k) {
        std::size_t a = tk.count("edge endpoint");
        auto at = tk.last();
        std::size_t b = tk.count("edge endpoint");
        if (a >= n || b >= n) throw ParseError("edge endpoint out of range", at.line, at.col);
        if (a == b) throw ParseError("self-loop", at.line, at.col);
        if (g.adjacent(a, b)) throw ParseError("duplicate edge", at.line, at.col);
        g.add_edge(a, b);
    }
    tk.keyword("factors");
    std::size_t nf = tk.count("factor count");
    std::vector<Factor> fs;
    for (std::size_t k = 0; k < nf; ++k) {
        tk.keyword("clique");
        auto head = tk.last();
        Factor f;
        for (const auto* t : tk.rest_of_line()) {
            std::size_t v = 0;
            auto [p, ec] = std::from_chars(t->text.data(), t->text.data() + t->text.size(), v);
            if (ec != std::errc() || p != t->text.data() + t->text.size() || v >= n)
                throw ParseError("bad clique node id '" + t->text + "'", t->line, t->col);
            f.clique.push_back(v);
        }
        if (f.clique.empty()) throw ParseError("empty clique", head.line, head.col);
        for (std::size_t i = 1; i < f.clique.size(); ++i)
            if (f.clique[i] <= f.clique[i - 1])
                throw ParseError("clique ids must be strictly ascending", head.line, head.col);
        if (!g.is_clique(f.clique)) throw ParseError("node set is not a clique", head.line, head.col);
        tk.keyword("weight");
        f.weight = tk.real("weight");
        tk.keyword("table");
        auto tt = tk.last();
        std::size_t size = 1;
        for (NodeId v : f.clique) size *= card[v];
        auto entries = tk.rest_of_line();
        if (entries.size() != size)
            throw ParseError("table has " + std::to_string(entries.size()) + " entries, expected " +
                                 std::to_string(size),
                             tt.line, tt.col);
        for (const auto* t : entries) {
            double v = 0;
            auto [p, ec] = std::from_chars(t->text.data(), t->text.data() + t->text.size(), v);
            if (ec != std::errc() || p != t->text.data() + t->text.size() || !std::isfinite(v))
                throw ParseError("expected finite real table entry, found '" + t->text + "'",
                                 t->line, t->col);
            f.feature.push_back(v);
        }
        fs.push_back(std::move(f));
    }
    if (const auto* p = tk.peek()) throw ParseError("trailing content '" + p->text + "'", p->line, p->col);
    try {
        return LogLinearModel(std::move(g), std::move(card), std::move(fs));
    } catch (const InputError& ex) {
        throw ParseError(ex.what(), tk.last().line, tk.last().col);
    }
}

inline std::string serialize_model(const LogLinearModel& m) {
    std::ostringstream os;
    os << "mrf 1\n";
    os << "nodes " << m.node_count() << "\n";
    os << "cardinalities";
    for (auto c : m.cardinalities()) os << ' ' << c;
    os << "\n";
    auto es = m.graph().edges();
    os << "edges " << es.size() << "\n";
    for (auto [a, b] : es) os << a << ' ' << b << "\n";
    os << "factors " << m.factors().size() << "\n";
    for (const auto& f : m.factors()) {
        os << "clique";
        for (auto v : f.clique) os << ' ' << v;
        os << "\nweight " << detail::fmt_real(f.weight) << "\ntable";
        for (double v : f.feature) os << ' ' << detail::fmt_real(v);
        os << "\n";
    }
    return os.str();
}

inline LogLinearModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open model file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_model(ss.str());
    } catch (const ParseError& e) {
        throw ParseError(std::string(e.what()).substr(std::string(e.what()).find(": ") + 2) +
                             " (in " + path + ")",
                         e.line, e.col);
    }
}

} // namespace mrfuq
