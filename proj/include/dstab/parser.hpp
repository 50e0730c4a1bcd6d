#pragma once

#include <memory>
#include <string>
#include <vector>

#include "dstab/formula.hpp"
#include "dstab/hybrid.hpp"
#include "dstab/ode.hpp"

namespace dstab {

struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, int line, int col)
        : std::runtime_error(msg + " at line " + std::to_string(line) +
                             ", column " + std::to_string(col)),
          line(line),
          col(col) {}
    int line, col;
};

struct ParsedFile {
    std::vector<std::shared_ptr<const OdeSystem>> systems;
    std::vector<std::shared_ptr<const HybridAutomaton>> automata;
    std::vector<FormulaPtr> sentences;
};

TermPtr parse_term(const std::string& text);
FormulaPtr parse_formula(const std::string& text);

// "p in [0.5,2], q in [-1,1]" -> Box
Box parse_box(const std::string& text);

// Parses a description file: system/automaton/sentence blocks, `#` comments.
// A file that starts with none of the block keywords is read as one bare
// sentence formula.
ParsedFile parse_file(const std::string& text);

}  // namespace dstab
