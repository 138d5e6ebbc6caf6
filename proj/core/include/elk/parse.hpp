#ifndef ELK_PARSE_HPP
#define ELK_PARSE_HPP

#include "elk/ast.hpp"

#include <string>

namespace elk {

/// Parses kernel source text. Throws elk::Error with the offending source
/// position on syntax errors, undeclared identifiers, or bad array lengths.
/// `while` loops are desugared into if + do-while; static memory-op sites
/// are numbered in program order on the desugared tree.
Kernel parse(const std::string &source);

} // namespace elk

#endif
