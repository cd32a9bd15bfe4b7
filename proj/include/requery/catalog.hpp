#pragma once

#include <filesystem>
#include <string>
#include <unordered_map>
#include <vector>

namespace requery {

struct ColumnDef {
    std::string name;
    std::string sql_type; // declared type string, kept verbatim
    bool is_primary_key = false;
};

struct ForeignKey {
    std::string from_table; // prefixed
    std::string from_column;
    std::string to_table; // prefixed
    std::string to_column;
};

struct TableSchema {
    std::string prefixed_name; // "<db_id>_<base_name>"
    std::string db_id;
    std::string base_name;
    std::vector<ColumnDef> columns;
    std::vector<ForeignKey> foreign_keys;

    const ColumnDef* find_column(const std::string& name) const;
};

// Immutable after load; lookups are pure and safe to share across threads.
class Catalog {
public:
    Catalog() = default;

    const TableSchema* find(const std::string& prefixed_name) const;
    bool contains(const std::string& prefixed_name) const { return find(prefixed_name) != nullptr; }

    // Load order: files sorted by name, statements in file order.
    const std::vector<std::string>& table_names() const { return ordered_names_; }
    std::size_t table_count() const { return ordered_names_.size(); }
    std::size_t db_count() const { return db_count_; }

    const std::vector<std::string>& warnings() const { return warnings_; }

    // Re-emit one table as a CREATE TABLE statement (base names, FKs included).
    std::string emit_ddl(const TableSchema& table) const;

    friend Catalog load_catalog(const std::filesystem::path& ddl_dir);

private:
    void add_table(TableSchema table, const std::string& source_location);

    std::vector<std::string> ordered_names_;
    std::unordered_map<std::string, TableSchema> tables_;       // keyed by prefixed name
    std::unordered_map<std::string, std::string> lower_index_;  // lowercase -> prefixed name
    std::unordered_map<std::string, std::string> origins_;      // prefixed name -> source location
    std::size_t db_count_ = 0;
    std::vector<std::string> warnings_;
};

// Parse every CREATE TABLE in every .sql file under ddl_dir. The file stem
// becomes the db_id and tables are exposed as "<db_id>_<base_name>".
// Non-DDL statements (INSERT, PRAGMA, ...) are skipped. Foreign keys whose
// target table does not exist are dropped with a warning.
Catalog load_catalog(const std::filesystem::path& ddl_dir);

// One block per table:
//   <prefixed_name>: <col1> <type1>, <col2> <type2>
//   Foreign keys: <from_col> references <to_table>(<to_col>); ...
// FK line only when the table has foreign keys; blocks joined by blank lines.
std::string serialize_for_prompt(const Catalog& catalog, const std::vector<std::string>& names);

} // namespace requery
