#include "requery/catalog.hpp"

#include "requery/errors.hpp"
#include "sql_lexer.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <unordered_set>

namespace requery {

namespace {

using lex::ParseFail;
using lex::Token;
using lex::TokKind;

struct PendingForeignKey {
    std::vector<std::string> from_columns;
    std::string target_table; // base name as written
    std::vector<std::string> to_columns; // may be empty: resolve to target PK
};

struct ParsedTable {
    std::string base_name;
    std::vector<ColumnDef> columns;
    std::vector<PendingForeignKey> fks;
};

const std::unordered_set<std::string> kColumnConstraintStarts = {
    "PRIMARY", "NOT",    "NULL",        "UNIQUE",     "CHECK",          "DEFAULT",
    "COLLATE", "REFERENCES", "CONSTRAINT", "AUTOINCREMENT", "AUTO_INCREMENT", "GENERATED",
    "ON"};

class TableDefParser {
public:
    TableDefParser(const std::vector<Token>& toks, std::size_t begin, std::size_t end)
        : toks_(toks), pos_(begin), end_(end) {}

    // Parses one CREATE TABLE statement; returns nullopt when the statement
    // is not a CREATE TABLE at all (views, indexes, inserts are skipped).
    std::optional<ParsedTable> parse() {
        if (!at_word("CREATE")) return std::nullopt;
        advance();
        if (at_word("TEMP") || at_word("TEMPORARY")) advance();
        if (!at_word("TABLE")) return std::nullopt;
        advance();
        if (at_word("IF")) { // IF NOT EXISTS
            advance();
            expect_word("NOT");
            expect_word("EXISTS");
        }
        ParsedTable table;
        table.base_name = expect_name("table name");
        while (at_punct(".")) { // schema-qualified: keep the last component
            advance();
            table.base_name = expect_name("table name");
        }
        expect_punct("(");
        parse_defs(table);
        expect_punct(")");
        // trailing table options (WITHOUT ROWID, ENGINE=..., ...) are ignored
        while (pos_ < end_) advance();

        if (table.columns.empty()) throw ParseFail{"table has no columns"};
        std::unordered_set<std::string> seen;
        for (const ColumnDef& col : table.columns) {
            if (col.name.empty()) throw ParseFail{"empty column name"};
            if (!seen.insert(lex::lower_copy(col.name)).second)
                throw ParseFail{"duplicate column name: " + col.name};
        }
        return table;
    }

private:
    const Token& cur() const { return toks_[std::min(pos_, end_)]; }
    void advance() { ++pos_; }
    bool done() const { return pos_ >= end_; }

    bool at_word(const char* upper) const {
        return !done() && cur().kind == TokKind::word && !cur().quoted && cur().upper == upper;
    }
    bool at_punct(const char* p) const {
        return !done() && cur().kind == TokKind::punct && cur().text == p;
    }
    void expect_word(const char* upper) {
        if (!at_word(upper)) throw ParseFail{std::string("expected ") + upper};
        advance();
    }
    void expect_punct(const char* p) {
        if (!at_punct(p))
            throw ParseFail{std::string("expected '") + p + "' near '" + (done() ? "<end>" : cur().text) + "'"};
        advance();
    }
    std::string expect_name(const char* what) {
        if (done() || cur().kind != TokKind::word)
            throw ParseFail{std::string("expected ") + what};
        std::string name = cur().text;
        advance();
        return name;
    }

    void skip_balanced_parens() {
        expect_punct("(");
        int depth = 1;
        while (depth > 0) {
            if (done()) throw ParseFail{"unbalanced parenthesis"};
            if (at_punct("(")) ++depth;
            if (at_punct(")")) --depth;
            advance();
        }
    }

    std::vector<std::string> parse_name_list() {
        expect_punct("(");
        std::vector<std::string> names;
        while (true) {
            names.push_back(expect_name("column name"));
            if (at_word("ASC") || at_word("DESC")) advance();
            if (at_punct(",")) {
                advance();
                continue;
            }
            break;
        }
        expect_punct(")");
        return names;
    }

    const Token& peek(std::size_t ahead) const { return toks_[std::min(pos_ + ahead, end_)]; }

    // MySQL-style inline index: KEY [name] (cols), INDEX name (cols), ...
    // A column that happens to be called "key" is followed by a type or a
    // separator instead of a parenthesized column list.
    bool at_index_def() const {
        if (!(at_word("KEY") || at_word("INDEX") || at_word("FULLTEXT") || at_word("SPATIAL")))
            return false;
        const Token& next = peek(1);
        if (next.kind == TokKind::punct && next.text == "(") return true;
        const Token& after = peek(2);
        return next.kind == TokKind::word && after.kind == TokKind::punct && after.text == "(";
    }

    void parse_defs(ParsedTable& table) {
        while (true) {
            if (at_word("PRIMARY") || at_word("FOREIGN") || at_word("UNIQUE") || at_word("CHECK") ||
                at_word("CONSTRAINT")) {
                parse_table_constraint(table);
            } else if (at_index_def()) {
                advance();
                if (!done() && cur().kind == TokKind::word) advance(); // index name
                skip_balanced_parens();
            } else {
                parse_column_def(table);
            }
            if (at_punct(",")) {
                advance();
                continue;
            }
            break;
        }
    }

    void parse_table_constraint(ParsedTable& table) {
        if (at_word("CONSTRAINT")) {
            advance();
            expect_name("constraint name");
        }
        if (at_word("PRIMARY")) {
            advance();
            expect_word("KEY");
            for (const std::string& col : parse_name_list()) {
                for (ColumnDef& c : table.columns)
                    if (lex::lower_copy(c.name) == lex::lower_copy(col)) c.is_primary_key = true;
            }
            skip_conflict_clause();
            return;
        }
        if (at_word("FOREIGN")) {
            advance();
            expect_word("KEY");
            PendingForeignKey fk;
            fk.from_columns = parse_name_list();
            expect_word("REFERENCES");
            fk.target_table = expect_name("referenced table");
            while (at_punct(".")) {
                advance();
                fk.target_table = expect_name("referenced table");
            }
            if (at_punct("(")) fk.to_columns = parse_name_list();
            skip_fk_actions();
            table.fks.push_back(std::move(fk));
            return;
        }
        if (at_word("UNIQUE")) {
            advance();
            if (at_word("KEY") || at_word("INDEX")) advance();
            if (!done() && cur().kind == TokKind::word) advance(); // optional index name
            parse_name_list();
            skip_conflict_clause();
            return;
        }
        if (at_word("CHECK")) {
            advance();
            skip_balanced_parens();
            return;
        }
        throw ParseFail{"unrecognized table constraint near '" + cur().text + "'"};
    }

    void parse_column_def(ParsedTable& table) {
        ColumnDef col;
        if (done() || cur().kind != TokKind::word)
            throw ParseFail{"expected column name near '" + (done() ? "<end>" : cur().text) + "'"};
        col.name = cur().text;
        advance();
        col.sql_type = parse_type();

        while (!done() && !at_punct(",") && !at_punct(")")) {
            if (at_word("PRIMARY")) {
                advance();
                expect_word("KEY");
                if (at_word("ASC") || at_word("DESC")) advance();
                skip_conflict_clause();
                if (at_word("AUTOINCREMENT") || at_word("AUTO_INCREMENT")) advance();
                col.is_primary_key = true;
                continue;
            }
            if (at_word("NOT")) {
                advance();
                expect_word("NULL");
                skip_conflict_clause();
                continue;
            }
            if (at_word("NULL")) {
                advance();
                continue;
            }
            if (at_word("UNIQUE")) {
                advance();
                skip_conflict_clause();
                continue;
            }
            if (at_word("COLLATE")) {
                advance();
                expect_name("collation");
                continue;
            }
            if (at_word("DEFAULT")) {
                advance();
                parse_default_value();
                continue;
            }
            if (at_word("CHECK")) {
                advance();
                skip_balanced_parens();
                continue;
            }
            if (at_word("REFERENCES")) {
                advance();
                PendingForeignKey fk;
                fk.from_columns.push_back(col.name);
                fk.target_table = expect_name("referenced table");
                while (at_punct(".")) {
                    advance();
                    fk.target_table = expect_name("referenced table");
                }
                if (at_punct("(")) fk.to_columns = parse_name_list();
                skip_fk_actions();
                table.fks.push_back(std::move(fk));
                continue;
            }
            if (at_word("AUTOINCREMENT") || at_word("AUTO_INCREMENT")) {
                advance();
                continue;
            }
            if (at_word("GENERATED")) { // GENERATED ALWAYS AS (expr) [STORED|VIRTUAL]
                advance();
                expect_word("ALWAYS");
                expect_word("AS");
                skip_balanced_parens();
                if (at_word("STORED") || at_word("VIRTUAL")) advance();
                continue;
            }
            if (at_word("CONSTRAINT")) {
                advance();
                expect_name("constraint name");
                continue;
            }
            if (at_word("ON")) { // MySQL-style ON UPDATE CURRENT_TIMESTAMP
                advance();
                if (!done() && cur().kind == TokKind::word) advance();
                if (!done() && cur().kind == TokKind::word) advance();
                continue;
            }
            throw ParseFail{"unrecognized column constraint near '" + cur().text + "'"};
        }
        table.columns.push_back(std::move(col));
    }

    // Declared type: words and paren groups up to a constraint keyword, ','
    // or ')'. Rebuilt with canonical spacing ("numeric(10,2)", "unsigned big int").
    std::string parse_type() {
        std::string type;
        while (!done() && !at_punct(",") && !at_punct(")")) {
            if (cur().kind == TokKind::word && !cur().quoted &&
                kColumnConstraintStarts.count(cur().upper))
                break;
            if (at_punct("(")) {
                type += "(";
                advance();
                int depth = 1;
                bool first = true;
                while (depth > 0) {
                    if (done()) throw ParseFail{"unbalanced parenthesis in type"};
                    if (at_punct("(")) {
                        ++depth;
                        type += "(";
                    } else if (at_punct(")")) {
                        --depth;
                        if (depth > 0) type += ")";
                    } else if (at_punct(",")) {
                        type += ",";
                        first = true;
                        advance();
                        continue;
                    } else {
                        if (!first && type.back() != '(' && type.back() != ',') type += " ";
                        type += cur().text;
                        first = false;
                    }
                    advance();
                }
                type += ")";
                continue;
            }
            if (cur().kind != TokKind::word && cur().kind != TokKind::number)
                throw ParseFail{"unexpected token in column type: '" + cur().text + "'"};
            if (!type.empty() && type.back() != '(') type += " ";
            type += cur().text;
            advance();
        }
        return type;
    }

    void parse_default_value() {
        if (at_punct("(")) {
            skip_balanced_parens();
            return;
        }
        if (at_punct("-") || at_punct("+")) advance();
        if (done()) throw ParseFail{"missing DEFAULT value"};
        advance(); // literal, NULL, CURRENT_TIMESTAMP, ...
    }

    void skip_conflict_clause() {
        if (at_word("ON")) {
            advance();
            expect_word("CONFLICT");
            if (!done() && cur().kind == TokKind::word) advance();
        }
    }

    void skip_fk_actions() {
        // ON DELETE/UPDATE <action>, MATCH <type>, DEFERRABLE ...
        while (!done()) {
            if (at_word("ON")) {
                advance();
                if (!done() && cur().kind == TokKind::word) advance(); // DELETE | UPDATE
                // action: NO ACTION | SET NULL | SET DEFAULT | CASCADE | RESTRICT
                if (at_word("NO") || at_word("SET")) {
                    advance();
                    if (!done() && cur().kind == TokKind::word) advance();
                } else if (!done() && cur().kind == TokKind::word) {
                    advance();
                }
                continue;
            }
            if (at_word("MATCH")) {
                advance();
                if (!done() && cur().kind == TokKind::word) advance();
                continue;
            }
            if (at_word("NOT") || at_word("DEFERRABLE") || at_word("INITIALLY") ||
                at_word("DEFERRED") || at_word("IMMEDIATE")) {
                advance();
                continue;
            }
            break;
        }
    }

    const std::vector<Token>& toks_;
    std::size_t pos_;
    std::size_t end_;
};

std::string statement_excerpt(const std::vector<Token>& toks, std::size_t begin, std::size_t end) {
    std::string text;
    for (std::size_t i = begin; i < end && text.size() < 200; ++i) {
        if (!text.empty()) text += " ";
        if (toks[i].kind == TokKind::string)
            text += "'" + toks[i].text + "'";
        else
            text += toks[i].text;
    }
    if (text.size() >= 200) text += " ...";
    return text;
}

std::string quote_ident(const std::string& name) {
    std::string quoted = "\"";
    for (char c : name) {
        quoted += c;
        if (c == '"') quoted += c;
    }
    quoted += "\"";
    return quoted;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CatalogError("cannot open DDL file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    if (text.starts_with("\xEF\xBB\xBF")) text.erase(0, 3); // UTF-8 BOM
    return text;
}

} // namespace

const ColumnDef* TableSchema::find_column(const std::string& name) const {
    std::string lowered = lex::lower_copy(name);
    for (const ColumnDef& col : columns)
        if (lex::lower_copy(col.name) == lowered) return &col;
    return nullptr;
}

const TableSchema* Catalog::find(const std::string& prefixed_name) const {
    auto it = tables_.find(prefixed_name);
    if (it != tables_.end()) return &it->second;
    auto lowered = lower_index_.find(lex::lower_copy(prefixed_name));
    if (lowered != lower_index_.end()) return &tables_.at(lowered->second);
    return nullptr;
}

void Catalog::add_table(TableSchema table, const std::string& source_location) {
    std::string lowered = lex::lower_copy(table.prefixed_name);
    auto existing = lower_index_.find(lowered);
    if (existing != lower_index_.end()) {
        throw CatalogError("duplicate table '" + table.prefixed_name + "' defined at " +
                           source_location + " and at " + origins_.at(existing->second));
    }
    ordered_names_.push_back(table.prefixed_name);
    lower_index_[lowered] = table.prefixed_name;
    origins_[table.prefixed_name] = source_location;
    tables_.emplace(table.prefixed_name, std::move(table));
}

std::string Catalog::emit_ddl(const TableSchema& table) const {
    std::string ddl = "CREATE TABLE " + quote_ident(table.base_name) + " (\n";
    std::vector<const ColumnDef*> pk_cols;
    for (const ColumnDef& col : table.columns)
        if (col.is_primary_key) pk_cols.push_back(&col);

    bool first = true;
    for (const ColumnDef& col : table.columns) {
        if (!first) ddl += ",\n";
        first = false;
        ddl += "  " + quote_ident(col.name);
        if (!col.sql_type.empty()) ddl += " " + col.sql_type;
        if (col.is_primary_key && pk_cols.size() == 1) ddl += " PRIMARY KEY";
    }
    if (pk_cols.size() > 1) {
        ddl += ",\n  PRIMARY KEY (";
        for (std::size_t i = 0; i < pk_cols.size(); ++i) {
            if (i) ddl += ", ";
            ddl += quote_ident(pk_cols[i]->name);
        }
        ddl += ")";
    }
    for (const ForeignKey& fk : table.foreign_keys) {
        // FKs never cross db boundaries, so the base name is a plain suffix
        std::string target_base = fk.to_table.substr(table.db_id.size() + 1);
        ddl += ",\n  FOREIGN KEY (" + quote_ident(fk.from_column) + ") REFERENCES " +
               quote_ident(target_base) + "(" + quote_ident(fk.to_column) + ")";
    }
    ddl += "\n);";
    return ddl;
}

Catalog load_catalog(const std::filesystem::path& ddl_dir) {
    if (!std::filesystem::is_directory(ddl_dir))
        throw CatalogError("DDL directory does not exist: " + ddl_dir.string());

    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::recursive_directory_iterator(ddl_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".sql")
            files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end()); // enumeration order must not matter

    // The schema id is the file stem; benchmark dumps that nest one
    // generically named file per database ("<db>/schema.sql") use the
    // directory name instead.
    auto db_id_of = [&](const std::filesystem::path& file) {
        std::string stem = file.stem().string();
        if (lex::lower_copy(stem) == "schema" && file.parent_path() != ddl_dir)
            return file.parent_path().filename().string();
        return stem;
    };

    Catalog catalog;
    std::unordered_set<std::string> db_ids;

    for (const std::filesystem::path& file : files) {
        const std::string db_id = db_id_of(file);
        db_ids.insert(db_id);
        std::string text = read_file(file);

        std::vector<Token> toks;
        try {
            toks = lex::tokenize(text);
        } catch (const ParseFail& f) {
            throw CatalogError(file.string() + ": " + f.message);
        }

        struct FileTable {
            ParsedTable parsed;
            std::string location;
        };
        std::vector<FileTable> file_tables;

        std::size_t begin = 0;
        for (std::size_t i = 0; i < toks.size(); ++i) {
            bool stmt_end = (toks[i].kind == TokKind::punct && toks[i].text == ";") ||
                            toks[i].kind == TokKind::end;
            if (!stmt_end) continue;
            if (i > begin) {
                TableDefParser parser(toks, begin, i);
                try {
                    if (auto parsed = parser.parse()) {
                        file_tables.push_back(
                            {std::move(*parsed), file.filename().string() + " (statement " +
                                                     std::to_string(file_tables.size() + 1) + ")"});
                    }
                } catch (const ParseFail& f) {
                    throw CatalogError(file.string() + ": cannot parse CREATE TABLE (" + f.message +
                                       "): " + statement_excerpt(toks, begin, i));
                }
            }
            begin = i + 1;
        }

        // base name -> prefixed name and primary key, for intra-file FK resolution
        std::unordered_map<std::string, std::string> base_index;
        std::unordered_map<std::string, std::vector<std::string>> pk_index;
        for (const FileTable& ft : file_tables) {
            std::string lowered = lex::lower_copy(ft.parsed.base_name);
            base_index[lowered] = db_id + "_" + ft.parsed.base_name;
            for (const ColumnDef& col : ft.parsed.columns)
                if (col.is_primary_key) pk_index[lowered].push_back(col.name);
        }

        for (FileTable& ft : file_tables) {
            TableSchema table;
            table.db_id = db_id;
            table.base_name = ft.parsed.base_name;
            table.prefixed_name = db_id + "_" + ft.parsed.base_name;
            table.columns = std::move(ft.parsed.columns);

            for (const PendingForeignKey& fk : ft.parsed.fks) {
                auto target = base_index.find(lex::lower_copy(fk.target_table));
                if (target == base_index.end()) {
                    catalog.warnings_.push_back(file.filename().string() + ": foreign key in " +
                                                table.prefixed_name + " references missing table '" +
                                                fk.target_table + "'; dropped");
                    continue;
                }
                std::vector<std::string> to_columns = fk.to_columns;
                if (to_columns.empty()) {
                    // resolve to the target's primary key, in declaration order
                    auto pk = pk_index.find(lex::lower_copy(fk.target_table));
                    if (pk != pk_index.end()) to_columns = pk->second;
                }
                if (to_columns.size() != fk.from_columns.size() || to_columns.empty()) {
                    catalog.warnings_.push_back(file.filename().string() + ": foreign key in " +
                                                table.prefixed_name + " to '" + fk.target_table +
                                                "' has unresolvable columns; dropped");
                    continue;
                }
                for (std::size_t i = 0; i < fk.from_columns.size(); ++i) {
                    ForeignKey resolved;
                    resolved.from_table = table.prefixed_name;
                    resolved.from_column = fk.from_columns[i];
                    resolved.to_table = target->second;
                    resolved.to_column = to_columns[i];
                    table.foreign_keys.push_back(std::move(resolved));
                }
            }
            catalog.add_table(std::move(table), ft.location);
        }
    }

    // endpoint column check; Spider carries occasional inconsistencies
    for (const std::string& name : catalog.ordered_names_) {
        TableSchema& table = catalog.tables_.at(name);
        auto bad = std::remove_if(
            table.foreign_keys.begin(), table.foreign_keys.end(), [&](const ForeignKey& fk) {
                const TableSchema* target = catalog.find(fk.to_table);
                bool ok = table.find_column(fk.from_column) != nullptr && target != nullptr &&
                          target->find_column(fk.to_column) != nullptr;
                if (!ok)
                    catalog.warnings_.push_back("foreign key " + fk.from_table + "." +
                                                fk.from_column + " -> " + fk.to_table + "." +
                                                fk.to_column + " has a missing column; dropped");
                return !ok;
            });
        table.foreign_keys.erase(bad, table.foreign_keys.end());
    }

    catalog.db_count_ = db_ids.size();
    for (const std::string& w : catalog.warnings_) std::cerr << "[catalog] warning: " << w << "\n";
    return catalog;
}

std::string serialize_for_prompt(const Catalog& catalog, const std::vector<std::string>& names) {
    std::string out;
    bool first = true;
    for (const std::string& name : names) {
        const TableSchema* table = catalog.find(name);
        if (!table) throw CatalogError("unknown table in prompt serialization: " + name);
        if (!first) out += "\n\n";
        first = false;

        out += table->prefixed_name + ": ";
        for (std::size_t i = 0; i < table->columns.size(); ++i) {
            if (i) out += ", ";
            out += table->columns[i].name;
            if (!table->columns[i].sql_type.empty()) out += " " + table->columns[i].sql_type;
        }
        if (!table->foreign_keys.empty()) {
            out += "\nForeign keys: ";
            for (std::size_t i = 0; i < table->foreign_keys.size(); ++i) {
                if (i) out += "; ";
                const ForeignKey& fk = table->foreign_keys[i];
                out += fk.from_column + " references " + fk.to_table + "(" + fk.to_column + ")";
            }
        }
    }
    return out;
}

} // namespace requery
