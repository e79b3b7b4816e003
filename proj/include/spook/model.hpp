#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "spook/error.hpp"

namespace spook {

/// Dotted path A1.A2...Ak of attribute names.
struct AttributeChain {
    std::vector<std::string> segments;

    AttributeChain() = default;
    explicit AttributeChain(std::vector<std::string> segs) : segments(std::move(segs)) {}

    /// Splits "a.b.c"; throws NonSimpleChain on an empty segment.
    static AttributeChain parse(std::string_view dotted);

    std::string str() const;
    bool empty() const { return segments.empty(); }
    size_t size() const { return segments.size(); }
    const std::string& head() const { return segments.front(); }
    const std::string& leaf() const { return segments.back(); }
    AttributeChain tail() const;  // all but the head
    AttributeChain prepend(const std::string& head) const;

    auto operator<=>(const AttributeChain&) const = default;
    bool operator==(const AttributeChain&) const = default;
};

/// Dense row-stochastic table. Rows enumerate parent configurations with the
/// last parent varying fastest; each row is a distribution over the range.
struct Cpt {
    std::vector<std::vector<double>> rows;
    bool operator==(const Cpt&) const = default;
};

enum class AttrKind { Simple, Complex, Quantifier, Number, Reference };
std::string_view to_string(AttrKind kind);

struct SimpleAttr {
    std::vector<std::string> range;
    std::vector<AttributeChain> parents;
    Cpt cpd;
    bool operator==(const SimpleAttr&) const = default;
};

struct ComplexAttr {
    std::string type;
    bool multi = false;
    int bound = 1;  // static upper bound on the number of fillers when multi
    std::optional<std::string> inverse;
    bool operator==(const ComplexAttr&) const = default;
};

/// #(over.chain = value)
struct QuantifierAttr {
    std::string over;
    AttributeChain chain;
    std::string value;
    bool operator==(const QuantifierAttr&) const = default;
};

/// #over, ranging over 0..bound(over)
struct NumberAttr {
    std::string over;
    std::vector<AttributeChain> parents;
    Cpt cpd;
    bool operator==(const NumberAttr&) const = default;
};

struct ReferenceEntry {
    enum class Kind { Class, Instance };
    Kind kind = Kind::Class;
    std::string name;
    bool operator==(const ReferenceEntry&) const = default;
};

/// R(over): which object fills the single-valued attribute `over`.
struct ReferenceAttr {
    std::string over;
    std::vector<ReferenceEntry> entries;
    std::vector<AttributeChain> parents;
    Cpt cpd;
    bool operator==(const ReferenceAttr&) const = default;
};

struct AttributeDecl {
    std::string name;
    std::variant<SimpleAttr, ComplexAttr, QuantifierAttr, NumberAttr, ReferenceAttr> body;
    SourceLocation loc;  // not part of equality

    AttrKind kind() const { return static_cast<AttrKind>(body.index()); }
    bool is_value() const { return kind() != AttrKind::Complex; }

    const SimpleAttr* simple() const { return std::get_if<SimpleAttr>(&body); }
    const ComplexAttr* complex() const { return std::get_if<ComplexAttr>(&body); }
    const QuantifierAttr* quantifier() const { return std::get_if<QuantifierAttr>(&body); }
    const NumberAttr* number() const { return std::get_if<NumberAttr>(&body); }
    const ReferenceAttr* reference() const { return std::get_if<ReferenceAttr>(&body); }

    /// Parent chains of attributes carrying a CPD; empty otherwise.
    const std::vector<AttributeChain>& parents() const;
    const Cpt* cpd() const;

    bool operator==(const AttributeDecl& o) const { return name == o.name && body == o.body; }
};

struct ClassModel {
    std::string name;
    std::optional<std::string> superclass;
    std::map<std::string, AttributeDecl> attributes;
    SourceLocation loc;

    bool operator==(const ClassModel& o) const {
        return name == o.name && superclass == o.superclass && attributes == o.attributes;
    }
};

struct InstanceModel {
    std::string name;
    std::string class_name;
    std::map<std::string, AttributeDecl> overrides;
    SourceLocation loc;

    bool operator==(const InstanceModel& o) const {
        return name == o.name && class_name == o.class_name && overrides == o.overrides;
    }
};

/// A single token (simple value, integer count, instance name) or a set of
/// instance names for a multi-valued complex attribute.
using AssertedValue = std::variant<std::string, std::vector<std::string>>;

struct AttributeAssertion {
    std::string instance;
    std::string attribute;
    AssertedValue value;
    SourceLocation loc;

    bool operator==(const AttributeAssertion& o) const {
        return instance == o.instance && attribute == o.attribute && value == o.value;
    }
};

struct KnowledgeBase {
    std::map<std::string, ClassModel> classes;
    std::map<std::string, InstanceModel> instances;
    std::map<std::pair<std::string, std::string>, AttributeAssertion> assertions;

    bool is_class(const std::string& name) const { return classes.count(name) != 0; }
    bool is_instance(const std::string& name) const { return instances.count(name) != 0; }

    /// Class of an instance, or the name itself for a class.
    const std::string& class_of(const std::string& object) const;

    /// True when `sub` equals `super` or inherits from it (classes only).
    bool is_subclass(const std::string& sub, const std::string& super) const;

    /// Superclass chain starting with `cls` itself. Throws InvalidKB on cycles.
    std::vector<std::string> lineage(const std::string& cls) const;

    const AttributeAssertion* assertion(const std::string& instance,
                                        const std::string& attribute) const;

    bool operator==(const KnowledgeBase& o) const {
        return classes == o.classes && instances == o.instances && assertions == o.assertions;
    }
};

/// Observation of a simple chain on a named instance.
struct ChainRef {
    std::string instance;
    AttributeChain chain;

    std::string str() const { return instance + "." + chain.str(); }
    auto operator<=>(const ChainRef&) const = default;
    bool operator==(const ChainRef&) const = default;
};

struct Observation {
    ChainRef target;
    std::string value;
    bool operator==(const Observation&) const = default;
};

/// I.sigma | I1.sigma1 = v1, ...
struct QueryExpr {
    std::vector<ChainRef> targets;
    std::vector<Observation> evidence;
};

/// Labels "0".."n" used for number and quantifier ranges.
std::vector<std::string> count_range(int n);

}  // namespace spook
