#include "spook/lang.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <sstream>

namespace spook {

namespace {

enum class Tok { Word, Number, Punct, End };

struct Token {
    Tok kind = Tok::End;
    std::string text;
    double number = 0;
    SourceLocation loc;
};

bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::vector<Token> lex(std::string_view src, const std::string& file) {
    std::vector<Token> out;
    int line = 1, col = 1;
    size_t i = 0;
    auto advance = [&](size_t n) {
        for (size_t k = 0; k < n; ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            advance(1);
            continue;
        }
        if (c == '#') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        Token t;
        t.loc = {file, line, col};
        if (std::isdigit(static_cast<unsigned char>(c))) {
            double v = 0;
            auto [ptr, ec] = std::from_chars(src.data() + i, src.data() + src.size(), v);
            size_t n = static_cast<size_t>(ptr - (src.data() + i));
            bool glued = i + n < src.size() && word_char(src[i + n]);
            if (ec == std::errc() && !glued) {
                t.kind = Tok::Number;
                t.text = std::string(src.substr(i, n));
                t.number = v;
                advance(n);
                out.push_back(std::move(t));
                continue;
            }
        }
        if (word_char(c)) {
            size_t j = i;
            while (j < src.size() && word_char(src[j])) ++j;
            t.kind = Tok::Word;
            t.text = std::string(src.substr(i, j - i));
            advance(j - i);
            out.push_back(std::move(t));
            continue;
        }
        if (c == '=' && i + 1 < src.size() && src[i + 1] == '=') {
            t.kind = Tok::Punct;
            t.text = "==";
            advance(2);
            out.push_back(std::move(t));
            continue;
        }
        static const std::string_view puncts = "{}[](),.:=|";
        if (puncts.find(c) != std::string_view::npos) {
            t.kind = Tok::Punct;
            t.text = std::string(1, c);
            advance(1);
            out.push_back(std::move(t));
            continue;
        }
        throw Error(ErrorCode::SyntaxError, std::string("unexpected character '") + c + "'", t.loc);
    }
    Token end;
    end.kind = Tok::End;
    end.loc = {file, line, col};
    out.push_back(end);
    return out;
}

class Parser {
public:
    Parser(std::string_view src, const std::string& file) : toks_(lex(src, file)) {}

    KnowledgeBase document() {
        KnowledgeBase kb;
        while (!at_end()) {
            const Token& t = peek();
            if (is_word("class")) {
                auto cls = class_decl();
                if (kb.classes.count(cls.name) || kb.instances.count(cls.name)) {
                    throw Error(ErrorCode::DuplicateName, "'" + cls.name + "' is already defined", cls.loc);
                }
                kb.classes.emplace(cls.name, std::move(cls));
            } else if (is_word("instance")) {
                auto inst = instance_decl();
                if (kb.classes.count(inst.name) || kb.instances.count(inst.name)) {
                    throw Error(ErrorCode::DuplicateName, "'" + inst.name + "' is already defined", inst.loc);
                }
                kb.instances.emplace(inst.name, std::move(inst));
            } else if (is_word("assert")) {
                auto a = assert_stmt();
                auto key = std::make_pair(a.instance, a.attribute);
                if (kb.assertions.count(key)) {
                    throw Error(ErrorCode::DuplicateName, "'" + a.instance + "." + a.attribute + "' is asserted twice", a.loc);
                }
                kb.assertions.emplace(key, std::move(a));
            } else {
                throw Error(ErrorCode::SyntaxError, "expected 'class', 'instance' or 'assert', found " + describe(t), t.loc);
            }
        }
        check_references(kb);
        return kb;
    }

    QueryExpr query() {
        QueryExpr q;
        if (is_word("query")) next();
        do {
            q.targets.push_back(chain_ref());
        } while (accept(","));
        if (accept("|")) {
            do {
                q.evidence.push_back(observation());
            } while (accept(","));
        }
        expect_end();
        return q;
    }

    Observation lone_observation() {
        auto o = observation();
        expect_end();
        return o;
    }

private:
    const Token& peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    bool at_end() const { return peek().kind == Tok::End; }
    const Token& next() {
        const Token& t = peek();
        if (pos_ < toks_.size() - 1) ++pos_;
        return t;
    }
    bool is_word(std::string_view w) const { return peek().kind == Tok::Word && peek().text == w; }
    bool is_punct(std::string_view p) const { return peek().kind == Tok::Punct && peek().text == p; }

    static std::string describe(const Token& t) {
        switch (t.kind) {
            case Tok::End: return "end of input";
            case Tok::Word: return "'" + t.text + "'";
            case Tok::Number: return "number '" + t.text + "'";
            case Tok::Punct: return "'" + t.text + "'";
        }
        return "?";
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorCode::SyntaxError, "expected " + what + ", found " + describe(peek()), peek().loc);
    }

    bool accept(std::string_view p) {
        if (!is_punct(p)) return false;
        next();
        return true;
    }
    void expect(std::string_view p) {
        if (!accept(p)) fail("'" + std::string(p) + "'");
    }
    void keyword(std::string_view w) {
        if (!is_word(w)) fail("'" + std::string(w) + "'");
        next();
    }
    void expect_end() {
        if (!at_end()) fail("end of input");
    }

    std::string name() {
        if (peek().kind != Tok::Word) fail("a name");
        return next().text;
    }

    std::string symbol() {
        if (peek().kind != Tok::Word && peek().kind != Tok::Number) fail("a value");
        return next().text;
    }

    int integer() {
        if (peek().kind != Tok::Number) fail("an integer");
        const Token& t = peek();
        int v = 0;
        auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
        if (ec != std::errc() || ptr != t.text.data() + t.text.size()) fail("an integer");
        next();
        return v;
    }

    AttributeChain chain() {
        AttributeChain c;
        c.segments.push_back(name());
        while (is_punct(".") && peek(1).kind == Tok::Word) {
            next();
            c.segments.push_back(name());
        }
        return c;
    }

    ChainRef chain_ref() {
        ChainRef r;
        r.instance = name();
        expect(".");
        r.chain = chain();
        return r;
    }

    Observation observation() {
        Observation o;
        o.target = chain_ref();
        expect("=");
        o.value = symbol();
        return o;
    }

    std::vector<AttributeChain> parents_opt() {
        std::vector<AttributeChain> out;
        if (!is_word("parents")) return out;
        next();
        expect("(");
        if (!is_punct(")")) {
            do {
                out.push_back(chain());
            } while (accept(","));
        }
        expect(")");
        return out;
    }

    Cpt cpd() {
        keyword("cpd");
        Cpt c;
        expect("[");
        do {
            std::vector<double> row;
            expect("[");
            do {
                if (peek().kind != Tok::Number) fail("a probability");
                row.push_back(next().number);
            } while (accept(","));
            expect("]");
            c.rows.push_back(std::move(row));
        } while (accept(","));
        expect("]");
        return c;
    }

    AttributeDecl attr_decl() {
        AttributeDecl d;
        d.loc = peek().loc;
        if (peek().kind != Tok::Word) fail("an attribute declaration");
        std::string kind = next().text;
        d.name = name();
        if (kind == "simple") {
            SimpleAttr s;
            expect("{");
            do {
                s.range.push_back(symbol());
            } while (accept(","));
            expect("}");
            s.parents = parents_opt();
            s.cpd = cpd();
            d.body = std::move(s);
        } else if (kind == "complex") {
            ComplexAttr c;
            expect(":");
            c.type = name();
            if (is_word("multi")) {
                next();
                c.multi = true;
                expect("(");
                c.bound = integer();
                expect(")");
            }
            if (is_word("inverse")) {
                next();
                c.inverse = name();
            }
            d.body = std::move(c);
        } else if (kind == "quantifier") {
            QuantifierAttr q;
            expect("=");
            keyword("count");
            expect("(");
            auto full = chain();
            if (full.size() < 2) {
                throw Error(ErrorCode::SyntaxError, "quantifier chain needs the counted attribute and a chain on its fillers", d.loc);
            }
            q.over = full.head();
            q.chain = full.tail();
            expect("==");
            q.value = symbol();
            expect(")");
            d.body = std::move(q);
        } else if (kind == "number") {
            NumberAttr n;
            keyword("over");
            n.over = name();
            n.parents = parents_opt();
            n.cpd = cpd();
            d.body = std::move(n);
        } else if (kind == "reference") {
            ReferenceAttr r;
            keyword("over");
            r.over = name();
            expect("{");
            do {
                ReferenceEntry e;
                if (is_word("class")) e.kind = ReferenceEntry::Kind::Class;
                else if (is_word("instance")) e.kind = ReferenceEntry::Kind::Instance;
                else fail("'class' or 'instance'");
                next();
                e.name = name();
                r.entries.push_back(std::move(e));
            } while (accept(","));
            expect("}");
            r.parents = parents_opt();
            r.cpd = cpd();
            d.body = std::move(r);
        } else {
            throw Error(ErrorCode::SyntaxError,
                        "unknown attribute kind '" + kind + "' (expected simple, complex, quantifier, number or reference)", d.loc);
        }
        return d;
    }

    std::map<std::string, AttributeDecl> attr_block() {
        std::map<std::string, AttributeDecl> out;
        expect("{");
        while (!is_punct("}")) {
            if (at_end()) fail("'}'");
            auto d = attr_decl();
            if (out.count(d.name)) throw Error(ErrorCode::DuplicateName, "attribute '" + d.name + "' is declared twice", d.loc);
            out.emplace(d.name, std::move(d));
        }
        expect("}");
        return out;
    }

    ClassModel class_decl() {
        ClassModel c;
        c.loc = peek().loc;
        keyword("class");
        c.name = name();
        if (is_word("extends")) {
            next();
            c.superclass = name();
        }
        c.attributes = attr_block();
        return c;
    }

    InstanceModel instance_decl() {
        InstanceModel i;
        i.loc = peek().loc;
        keyword("instance");
        i.name = name();
        expect(":");
        i.class_name = name();
        if (is_punct("{")) i.overrides = attr_block();
        return i;
    }

    AttributeAssertion assert_stmt() {
        AttributeAssertion a;
        a.loc = peek().loc;
        keyword("assert");
        a.instance = name();
        expect(".");
        a.attribute = name();
        expect("=");
        if (accept("{")) {
            std::vector<std::string> list;
            if (!is_punct("}")) {
                do {
                    list.push_back(name());
                } while (accept(","));
            }
            expect("}");
            a.value = std::move(list);
        } else {
            a.value = symbol();
        }
        return a;
    }

    static void check_references(const KnowledgeBase& kb) {
        for (const auto& [name, c] : kb.classes) {
            if (c.superclass && !kb.is_class(*c.superclass)) {
                throw Error(ErrorCode::UnknownReference, "class '" + name + "' extends unknown class '" + *c.superclass + "'", c.loc);
            }
            for (const auto& [an, d] : c.attributes) {
                if (auto* cx = d.complex(); cx && !kb.is_class(cx->type)) {
                    throw Error(ErrorCode::UnknownReference, "attribute '" + an + "' has unknown type '" + cx->type + "'", d.loc);
                }
                if (auto* r = d.reference()) {
                    for (const auto& e : r->entries) {
                        bool ok = e.kind == ReferenceEntry::Kind::Class ? kb.is_class(e.name) : kb.is_instance(e.name);
                        if (!ok) throw Error(ErrorCode::UnknownReference, "reference entry '" + e.name + "' is not defined", d.loc);
                    }
                }
            }
        }
        for (const auto& [name, i] : kb.instances) {
            if (!kb.is_class(i.class_name)) {
                throw Error(ErrorCode::UnknownReference, "instance '" + name + "' has unknown class '" + i.class_name + "'", i.loc);
            }
        }
        for (const auto& [key, a] : kb.assertions) {
            if (!kb.is_instance(a.instance)) {
                throw Error(ErrorCode::UnknownReference, "assertion on unknown instance '" + a.instance + "'", a.loc);
            }
        }
    }

    std::vector<Token> toks_;
    size_t pos_ = 0;
};

std::string join(const std::vector<std::string>& items, const char* sep = ", ") {
    std::string out;
    for (size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

std::string chains(const std::vector<AttributeChain>& cs) {
    std::vector<std::string> parts;
    for (const auto& c : cs) parts.push_back(c.str());
    return join(parts);
}

void write_cpd(std::ostream& os, const Cpt& cpt, const std::string& indent) {
    os << indent << "cpd [";
    for (size_t r = 0; r < cpt.rows.size(); ++r) {
        if (r) os << ",\n" << indent << "     ";
        os << "[";
        for (size_t k = 0; k < cpt.rows[r].size(); ++k) {
            if (k) os << ", ";
            os << format_number(cpt.rows[r][k]);
        }
        os << "]";
    }
    os << "]\n";
}

void write_attr(std::ostream& os, const AttributeDecl& d) {
    const std::string ind = "  ";
    const std::string more = "    ";
    auto parents = [&](const std::vector<AttributeChain>& ps) {
        if (!ps.empty()) os << more << "parents(" << chains(ps) << ")\n";
    };
    switch (d.kind()) {
        case AttrKind::Simple: {
            const auto& s = *d.simple();
            os << ind << "simple " << d.name << " {" << join(s.range) << "}\n";
            parents(s.parents);
            write_cpd(os, s.cpd, more);
            break;
        }
        case AttrKind::Complex: {
            const auto& c = *d.complex();
            os << ind << "complex " << d.name << " : " << c.type;
            if (c.multi) os << " multi(" << c.bound << ")";
            if (c.inverse) os << " inverse " << *c.inverse;
            os << "\n";
            break;
        }
        case AttrKind::Quantifier: {
            const auto& q = *d.quantifier();
            os << ind << "quantifier " << d.name << " = count(" << q.over << "." << q.chain.str() << " == " << q.value << ")\n";
            break;
        }
        case AttrKind::Number: {
            const auto& n = *d.number();
            os << ind << "number " << d.name << " over " << n.over << "\n";
            parents(n.parents);
            write_cpd(os, n.cpd, more);
            break;
        }
        case AttrKind::Reference: {
            const auto& r = *d.reference();
            std::vector<std::string> entries;
            for (const auto& e : r.entries)
                entries.push_back((e.kind == ReferenceEntry::Kind::Class ? "class " : "instance ") + e.name);
            os << ind << "reference " << d.name << " over " << r.over << " {" << join(entries) << "}\n";
            parents(r.parents);
            write_cpd(os, r.cpd, more);
            break;
        }
    }
}

}  // namespace

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, ptr);
    if (s.find_first_of(".e") == std::string::npos && s.find("inf") == std::string::npos && s.find("nan") == std::string::npos) {
        s += ".0";
    }
    return s;
}

KnowledgeBase parse_kb(const SourceKB& source) { return parse_kb(source.text, source.provenance); }

KnowledgeBase parse_kb(std::string_view text, const std::string& provenance) {
    return Parser(text, provenance).document();
}

std::string serialize_kb(const KnowledgeBase& kb) {
    std::ostringstream os;
    bool first = true;
    auto gap = [&] {
        if (!first) os << "\n";
        first = false;
    };
    for (const auto& [name, c] : kb.classes) {
        gap();
        os << "class " << name;
        if (c.superclass) os << " extends " << *c.superclass;
        os << " {\n";
        for (const auto& [an, d] : c.attributes) write_attr(os, d);
        os << "}\n";
    }
    for (const auto& [name, i] : kb.instances) {
        gap();
        os << "instance " << name << " : " << i.class_name;
        if (!i.overrides.empty()) {
            os << " {\n";
            for (const auto& [an, d] : i.overrides) write_attr(os, d);
            os << "}";
        }
        os << "\n";
    }
    if (!kb.assertions.empty()) {
        gap();
        for (const auto& [key, a] : kb.assertions) {
            os << "assert " << a.instance << "." << a.attribute << " = ";
            if (auto* one = std::get_if<std::string>(&a.value)) os << *one;
            else os << "{" << join(std::get<std::vector<std::string>>(a.value)) << "}";
            os << "\n";
        }
    }
    return os.str();
}

QueryExpr parse_query_syntax(std::string_view text) { return Parser(text, "<query>").query(); }

Observation parse_observation(std::string_view text) { return Parser(text, "<observation>").lone_observation(); }

void check_query(const QueryExpr& q, const KbIndex& kb) {
    auto check_ref = [&](const ChainRef& r) {
        if (!kb.is_instance(r.instance)) throw Error(ErrorCode::UnknownInstance, "unknown instance '" + r.instance + "'");
        return kb.chain_range(r.instance, r.chain);
    };
    if (q.targets.empty()) throw Error(ErrorCode::SyntaxError, "query has no targets");
    for (const auto& t : q.targets) check_ref(t);
    for (const auto& e : q.evidence) {
        auto range = check_ref(e.target);
        if (std::find(range.begin(), range.end(), e.value) == range.end()) {
            throw Error(ErrorCode::BadValue, "'" + e.value + "' is not a value of " + e.target.str() + " {" + join(range) + "}");
        }
    }
}

QueryExpr parse_query(std::string_view text, const KbIndex& kb) {
    auto q = parse_query_syntax(text);
    check_query(q, kb);
    return q;
}

}  // namespace spook
