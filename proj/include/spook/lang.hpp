#pragma once

#include <string>
#include <string_view>

#include "spook/kb_index.hpp"
#include "spook/model.hpp"

namespace spook {

struct SourceKB {
    std::string text;
    std::string provenance;  // file path or "<repl>"
};

/// Parses a `.spook` document. Throws SyntaxError, DuplicateName or
/// UnknownReference, always with a location.
KnowledgeBase parse_kb(const SourceKB& source);
KnowledgeBase parse_kb(std::string_view text, const std::string& provenance = "<input>");

/// Canonical text: names sorted, shortest round-trip numbers.
std::string serialize_kb(const KnowledgeBase& kb);

/// Query text without name resolution:
///   [query] I.chain, ... [| I.chain = v, ...]
QueryExpr parse_query_syntax(std::string_view text);

/// Parses and checks names, chains and evidence values against `kb`.
QueryExpr parse_query(std::string_view text, const KbIndex& kb);

/// Checks an already-built query against `kb`.
void check_query(const QueryExpr& query, const KbIndex& kb);

/// I.chain = v
Observation parse_observation(std::string_view text);

std::string format_number(double v);

}  // namespace spook
