#pragma once

#include <stdexcept>
#include <string>

namespace hotype {

// Error identifiers exposed through the CLI (printed verbatim on stderr).
enum class errc {
    diagonal_not_one,
    divisibility_violated,
    star_on_zero_cell,
    coefficient_not_allowed,
    unknown_spec,
    entry_out_of_grid,
    entry_in_zero_cell,
    spec_mismatch,
    pattern_violated,
    not_invertible,
    parse_error,
    illegal_adjacency,
    infinity_inside_word,
    invalid_word,
    not_tabulated,
    out_of_window,
    search_bound_exceeded,
    budget_exceeded,
};

inline const char* errc_name(errc c) {
    switch (c) {
    case errc::diagonal_not_one: return "DiagonalNotOne";
    case errc::divisibility_violated: return "DivisibilityViolated";
    case errc::star_on_zero_cell: return "StarOnZeroCell";
    case errc::coefficient_not_allowed: return "CoefficientNotAllowed";
    case errc::unknown_spec: return "UnknownSpec";
    case errc::entry_out_of_grid: return "EntryOutOfGrid";
    case errc::entry_in_zero_cell: return "EntryInZeroCell";
    case errc::spec_mismatch: return "SpecMismatch";
    case errc::pattern_violated: return "PatternViolated";
    case errc::not_invertible: return "NotInvertible";
    case errc::parse_error: return "ParseError";
    case errc::illegal_adjacency: return "IllegalAdjacency";
    case errc::infinity_inside_word: return "InfinityInsideWord";
    case errc::invalid_word: return "InvalidWord";
    case errc::not_tabulated: return "NotTabulated";
    case errc::out_of_window: return "OutOfWindow";
    case errc::search_bound_exceeded: return "SearchBoundExceeded";
    case errc::budget_exceeded: return "BudgetExceeded";
    }
    return "UnknownError";
}

class domain_error : public std::runtime_error {
public:
    domain_error(errc code, const std::string& detail)
        : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

} // namespace hotype
