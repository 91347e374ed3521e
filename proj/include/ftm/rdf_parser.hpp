#pragma once

#include <functional>
#include <istream>
#include <string>

#include "ftm/graph.hpp"

namespace ftm {

using TripleSink = std::function<void(Triple&&)>;

/// Strict W3C N-Triples. Reads line by line; the input is never held in memory as a whole.
/// Throws ParseError with the 1-based line and byte offset of the offending character.
void parse_ntriples(std::istream& in, const TripleSink& sink);

/// W3C Turtle: @prefix/@base (and SPARQL-style PREFIX/BASE), prefixed names, `a`, predicate and
/// object lists, blank-node property lists, collections (expanded to rdf:first/rdf:rest), long
/// strings and numeric/boolean shorthand literals. Relative IRIs are resolved against `base`.
void parse_turtle(std::istream& in, const TripleSink& sink, std::string base = {});

/// Decodes a \uXXXX or \UXXXXXXXX code point into UTF-8.
void append_utf8(std::string& out, char32_t code_point);

}  // namespace ftm
