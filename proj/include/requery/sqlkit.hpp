#pragma once

#include <string>
#include <vector>

namespace requery {

struct JoinEdge {
    std::string left_table;
    std::string left_column;
    std::string right_table;
    std::string right_column;

    bool operator==(const JoinEdge&) const = default;
};

struct QueryAnalysis {
    std::vector<std::string> referenced_tables; // deduplicated, in first-appearance order
    std::vector<JoinEdge> join_edges;           // equality predicates between two distinct table occurrences
    bool parse_ok = false;
    std::string parse_error;

    bool references(const std::string& table) const;
};

// Extract the tables and column-equality join predicates of a SELECT
// statement. Aliases are resolved to the table names as written; predicates
// against literals or expressions contribute no edges. Never throws: invalid
// SQL yields parse_ok=false and a message.
QueryAnalysis analyze_query(const std::string& sql);

// Split an identifier on underscores and lower->upper transitions, lowercase
// the result. Digits stay attached to the preceding token.
std::vector<std::string> tokenize_name(const std::string& name);

// Ratcliff/Obershelp ratio: 2*M / (len(a)+len(b)) where M is the total size
// of recursively matched longest common blocks. No junk heuristics. The
// documented asymmetry applies, so callers pass (candidate, reference).
// Two empty strings compare as 1.0.
double structural_similarity(const std::string& candidate, const std::string& reference);

} // namespace requery
