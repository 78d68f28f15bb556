#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "unlinking/polynomial.hpp"

namespace unlinking {

/// Parses the polynomial expression grammar
///
///   expression  := ['+'|'-'] term (('+'|'-') term)*
///   term        := factor ('*' factor)*
///   factor      := coefficient | variable ('^' positive-integer)?
///   coefficient := integer ('/' positive-integer)?
///   variable    := 'x' positive-integer
///
/// with insignificant whitespace. A single leading sign is accepted so that
/// serialized negative leading terms round-trip. Variables are 1-based and must
/// not exceed `arity`. Throws ParseError with the byte offset of the problem.
Polynomial parse_expression(std::string_view text, std::size_t arity);

/// Inverse of parse_expression: terms in graded-lex order, "0" for the zero polynomial.
std::string to_expression(const Polynomial& p);

/// {"n": <int>, "terms": [{"c": "<p/q>", "e": [<ints>]}]}, terms in graded-lex order.
nlohmann::ordered_json to_json(const Polynomial& p);

/// Throws FormatError on schema violations, ParseError on bad coefficient strings.
Polynomial polynomial_from_json(const nlohmann::json& j);

/// Text document: first non-blank line "n=<int>", remaining lines form one expression.
Polynomial parse_poly_document(std::string_view text);

/// Reads a polynomial from disk, JSON if the extension is ".json" and the text document otherwise.
Polynomial read_polynomial_file(const std::filesystem::path& path);

}  // namespace unlinking
