#include "requery/catalog.hpp"

#include "requery/errors.hpp"
#include "../support/paths.hpp"

#include <doctest.h>

#include <fstream>
#include <map>
#include <random>

using namespace requery;
namespace td = requery::testdata;

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

} // namespace

TEST_CASE("load_catalog ingests the mini fixture directory") {
    Catalog catalog = load_catalog(td::mini_ddl_dir());
    CHECK(catalog.table_count() == 10); // 3 pets + 5 dorm + 2 warehouse
    CHECK(catalog.db_count() == 3);

    // files sorted by name: dorm_1 < pets_1 < warehouse_1
    CHECK(catalog.table_names().front() == "dorm_1_Student");

    const TableSchema* pets = catalog.find("pets_1_Pets");
    REQUIRE(pets != nullptr);
    CHECK(pets->db_id == "pets_1");
    CHECK(pets->base_name == "Pets");
    REQUIRE(pets->columns.size() == 4);
    CHECK(pets->columns[0].name == "PetID");
    CHECK(pets->columns[0].sql_type == "INTEGER");
    CHECK(pets->columns[0].is_primary_key);
    CHECK(pets->columns[1].sql_type == "VARCHAR(20)");

    const TableSchema* has_pet = catalog.find("pets_1_Has_Pet");
    REQUIRE(has_pet != nullptr);
    REQUIRE(has_pet->foreign_keys.size() == 2);
    CHECK(has_pet->foreign_keys[0].to_table == "pets_1_Pets");
    CHECK(has_pet->foreign_keys[1].to_table == "pets_1_Student");
}

TEST_CASE("load_catalog handles quoting styles and drops dangling foreign keys") {
    Catalog catalog = load_catalog(td::mini_ddl_dir());

    const TableSchema* warehouse = catalog.find("warehouse_1_Warehouse");
    REQUIRE(warehouse != nullptr);
    CHECK(warehouse->columns[0].name == "warehouse_id"); // backticks stripped
    CHECK(warehouse->columns[2].name == "location");     // brackets stripped
    CHECK(warehouse->columns[3].sql_type == "unsigned big int");
    CHECK(warehouse->columns[4].sql_type == "numeric(10,2)");

    const TableSchema* shipment = catalog.find("warehouse_1_Shipment");
    REQUIRE(shipment != nullptr);
    // composite PK via table constraint
    CHECK(shipment->columns[0].is_primary_key);
    CHECK(shipment->columns[1].is_primary_key);
    // inline FK to Warehouse survives; FK to the missing Carrier is dropped with a warning
    REQUIRE(shipment->foreign_keys.size() == 1);
    CHECK(shipment->foreign_keys[0].to_table == "warehouse_1_Warehouse");
    bool warned = false;
    for (const std::string& w : catalog.warnings())
        if (w.find("Carrier") != std::string::npos) warned = true;
    CHECK(warned);
}

TEST_CASE("load_catalog of an empty directory") {
    auto dir = td::temp_dir("empty_catalog");
    Catalog catalog = load_catalog(dir);
    CHECK(catalog.table_count() == 0);
    CHECK(catalog.db_count() == 0);
}

TEST_CASE("load_catalog of a missing directory fails") {
    CHECK_THROWS_AS(load_catalog("/nonexistent/nowhere"), CatalogError);
}

TEST_CASE("load_catalog prefixes tables with the file stem") {
    auto dir = td::temp_dir("pets_build");
    write_file(dir / "pets_1.sql",
               "CREATE TABLE Student (StuID INTEGER PRIMARY KEY, LName TEXT);\n"
               "CREATE TABLE Has_Pet (StuID INTEGER, PetID INTEGER);\n"
               "CREATE TABLE Pets (PetID INTEGER PRIMARY KEY, PetType TEXT);\n");
    Catalog catalog = load_catalog(dir);
    CHECK(catalog.table_names() == std::vector<std::string>{"pets_1_Student", "pets_1_Has_Pet",
                                                            "pets_1_Pets"});
    CHECK(catalog.db_count() == 1);
}

TEST_CASE("load_catalog rejects duplicate table names citing both definitions") {
    auto dir = td::temp_dir("dup_catalog");
    write_file(dir / "db_1.sql",
               "CREATE TABLE t (a INTEGER);\nCREATE TABLE T (b INTEGER);\n");
    try {
        load_catalog(dir);
        FAIL("expected CatalogError");
    } catch (const CatalogError& e) {
        std::string msg = e.what();
        CHECK(msg.find("db_1_T") != std::string::npos);
        CHECK(msg.find("statement 1") != std::string::npos);
        CHECK(msg.find("statement 2") != std::string::npos);
    }
}

TEST_CASE("load_catalog reports unparsable CREATE TABLE statements") {
    auto dir = td::temp_dir("bad_catalog");
    write_file(dir / "broken_1.sql", "CREATE TABLE t (a INTEGER,, b);");
    try {
        load_catalog(dir);
        FAIL("expected CatalogError");
    } catch (const CatalogError& e) {
        std::string msg = e.what();
        CHECK(msg.find("broken_1") != std::string::npos);
        CHECK(msg.find("CREATE TABLE t") != std::string::npos); // the statement is listed
    }
}

TEST_CASE("load_catalog skips non-DDL statements") {
    auto dir = td::temp_dir("mixed_catalog");
    write_file(dir / "m_1.sql",
               "PRAGMA foreign_keys=ON;\n"
               "CREATE TABLE a (x INTEGER);\n"
               "INSERT INTO a VALUES (1);\n"
               "CREATE INDEX ix ON a(x);\n"
               "CREATE VIEW v AS SELECT * FROM a;\n");
    Catalog catalog = load_catalog(dir);
    CHECK(catalog.table_count() == 1);
}

TEST_CASE("catalog round-trips through emitted DDL") {
    Catalog original = load_catalog(td::mini_ddl_dir());

    auto dir = td::temp_dir("roundtrip");
    std::map<std::string, std::string> per_db;
    for (const std::string& name : original.table_names()) {
        const TableSchema* table = original.find(name);
        per_db[table->db_id] += original.emit_ddl(*table) + "\n\n";
    }
    for (const auto& [db_id, ddl] : per_db) write_file(dir / (db_id + ".sql"), ddl);

    Catalog reloaded = load_catalog(dir);
    REQUIRE(reloaded.table_names() == original.table_names());
    CHECK(reloaded.db_count() == original.db_count());
    for (const std::string& name : original.table_names()) {
        const TableSchema* a = original.find(name);
        const TableSchema* b = reloaded.find(name);
        REQUIRE(b != nullptr);
        REQUIRE(a->columns.size() == b->columns.size());
        for (std::size_t i = 0; i < a->columns.size(); ++i) {
            CHECK(a->columns[i].name == b->columns[i].name);
            CHECK(a->columns[i].sql_type == b->columns[i].sql_type);
            CHECK(a->columns[i].is_primary_key == b->columns[i].is_primary_key);
        }
        REQUIRE(a->foreign_keys.size() == b->foreign_keys.size());
        for (std::size_t i = 0; i < a->foreign_keys.size(); ++i) {
            CHECK(a->foreign_keys[i].from_column == b->foreign_keys[i].from_column);
            CHECK(a->foreign_keys[i].to_table == b->foreign_keys[i].to_table);
            CHECK(a->foreign_keys[i].to_column == b->foreign_keys[i].to_column);
        }
    }
}

TEST_CASE("load_catalog is deterministic across runs") {
    Catalog a = load_catalog(td::mini_ddl_dir());
    Catalog b = load_catalog(td::mini_ddl_dir());
    CHECK(a.table_names() == b.table_names());
}

TEST_CASE("load_catalog resolves column-less REFERENCES to the target primary key") {
    auto dir = td::temp_dir("fk_pk");
    write_file(dir / "shop_1.sql",
               "create table product (sku integer primary key, label text);\n"
               "create table sale (sale_id integer primary key,\n"
               "                   sku integer references product,\n"
               "                   sold_on date default CURRENT_TIMESTAMP);\n");
    Catalog catalog = load_catalog(dir);
    const TableSchema* sale = catalog.find("shop_1_sale");
    REQUIRE(sale != nullptr);
    REQUIRE(sale->foreign_keys.size() == 1);
    CHECK(sale->foreign_keys[0].to_table == "shop_1_product");
    CHECK(sale->foreign_keys[0].to_column == "sku");
}

TEST_CASE("load_catalog handles a last statement without a semicolon") {
    auto dir = td::temp_dir("no_semi");
    write_file(dir / "x_1.sql", "CREATE TABLE a (x INTEGER);\nCREATE TABLE b (y INTEGER)");
    CHECK(load_catalog(dir).table_count() == 2);
}

TEST_CASE("load_catalog strips a UTF-8 byte-order mark") {
    auto dir = td::temp_dir("bom");
    write_file(dir / "y_1.sql", "\xEF\xBB\xBF" "CREATE TABLE first (x INTEGER);");
    CHECK(load_catalog(dir).table_count() == 1);
}

TEST_CASE("load_catalog accepts reserved-looking quoted column names") {
    auto dir = td::temp_dir("reserved");
    write_file(dir / "r_1.sql",
               "CREATE TABLE orders (\"Order\" INTEGER, `Group` TEXT CHECK (`Group` IN ('a','b')), "
               "[Select] REAL);");
    Catalog catalog = load_catalog(dir);
    const TableSchema* t = catalog.find("r_1_orders");
    REQUIRE(t != nullptr);
    CHECK(t->columns[0].name == "Order");
    CHECK(t->columns[1].name == "Group");
    CHECK(t->columns[2].name == "Select");
}

TEST_CASE("load_catalog skips MySQL-style inline index definitions") {
    auto dir = td::temp_dir("mysql_isms");
    write_file(dir / "shop_2.sql",
               "CREATE TABLE item (\n"
               "  item_id int(11) NOT NULL AUTO_INCREMENT,\n"
               "  label varchar(64) DEFAULT NULL,\n"
               "  `key` varchar(16),\n"
               "  PRIMARY KEY (item_id),\n"
               "  UNIQUE KEY uq_label (label),\n"
               "  KEY idx_key (`key`),\n"
               "  INDEX idx_label (label)\n"
               ") ENGINE=InnoDB DEFAULT CHARSET=utf8;\n");
    Catalog catalog = load_catalog(dir);
    const TableSchema* item = catalog.find("shop_2_item");
    REQUIRE(item != nullptr);
    REQUIRE(item->columns.size() == 3); // index defs are not columns
    CHECK(item->columns[0].is_primary_key);
    CHECK(item->columns[2].name == "key");
    CHECK(item->columns[0].sql_type == "int(11)");
}

TEST_CASE("prefix collisions across schemas are refused, not silently merged") {
    // distinct (db_id, base_name) pairs can map onto the same prefixed name;
    // the loader must fail rather than conflate them
    auto dir = td::temp_dir("prefix_clash");
    write_file(dir / "a.sql", "CREATE TABLE b_c (x INTEGER);\n");
    write_file(dir / "a_b.sql", "CREATE TABLE c (y INTEGER);\n");
    CHECK_THROWS_AS(load_catalog(dir), CatalogError);
}

TEST_CASE("serialize_for_prompt formats columns and foreign keys") {
    Catalog catalog = load_catalog(td::mini_ddl_dir());

    std::string block = serialize_for_prompt(catalog, {"pets_1_Has_Pet"});
    CHECK(block ==
          "pets_1_Has_Pet: StuID INTEGER, PetID INTEGER\n"
          "Foreign keys: PetID references pets_1_Pets(PetID); "
          "StuID references pets_1_Student(StuID)");

    // no foreign keys: a single line, no suffix
    std::string pets = serialize_for_prompt(catalog, {"pets_1_Pets"});
    CHECK(pets == "pets_1_Pets: PetID INTEGER, PetType VARCHAR(20), pet_age INTEGER, weight REAL");

    // blocks joined by blank lines, deterministic for the given order
    std::string both = serialize_for_prompt(catalog, {"pets_1_Pets", "pets_1_Has_Pet"});
    CHECK(both == pets + "\n\n" + block);
}

TEST_CASE("serialize_for_prompt of an empty list is empty") {
    Catalog catalog = load_catalog(td::mini_ddl_dir());
    CHECK(serialize_for_prompt(catalog, {}).empty());
}

TEST_CASE("load_catalog supports the nested one-directory-per-database layout") {
    auto dir = td::temp_dir("nested");
    std::filesystem::create_directories(dir / "pets_1");
    std::filesystem::create_directories(dir / "dorm_1");
    write_file(dir / "pets_1" / "schema.sql", "CREATE TABLE Pets (PetID INTEGER PRIMARY KEY);\n");
    write_file(dir / "dorm_1" / "schema.sql", "CREATE TABLE Dorm (dormid INTEGER);\n");
    Catalog catalog = load_catalog(dir);
    CHECK(catalog.table_count() == 2);
    CHECK(catalog.db_count() == 2);
    CHECK(catalog.contains("pets_1_Pets"));
    CHECK(catalog.contains("dorm_1_Dorm"));
}

TEST_CASE("load_catalog survives random statement soup") {
    std::mt19937 rng(31337);
    static const char* pieces[] = {"CREATE", "TABLE", "t",  "(",  ")",      ",",       ";",
                                   "INTEGER", "PRIMARY", "KEY", "REFERENCES", "'txt'", "NOT",
                                   "NULL",    "x",       "1"};
    std::uniform_int_distribution<std::size_t> pick(0, sizeof(pieces) / sizeof(pieces[0]) - 1);
    std::uniform_int_distribution<int> len(0, 30);
    for (int round = 0; round < 200; ++round) {
        auto dir = td::temp_dir("soup");
        std::string soup;
        int n = len(rng);
        for (int i = 0; i < n; ++i) {
            soup += pieces[pick(rng)];
            soup += " ";
        }
        write_file(dir / "fuzz_1.sql", soup);
        try {
            load_catalog(dir); // garbage either loads as zero tables or raises CatalogError
        } catch (const CatalogError&) {
        }
    }
}

TEST_CASE("serialize_for_prompt rejects unknown names") {
    Catalog catalog = load_catalog(td::mini_ddl_dir());
    try {
        serialize_for_prompt(catalog, {"no_such_table"});
        FAIL("expected CatalogError");
    } catch (const CatalogError& e) {
        CHECK(std::string(e.what()).find("no_such_table") != std::string::npos);
    }
}
