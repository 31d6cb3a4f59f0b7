#include <doctest.h>

#include <fstream>
#include <set>

#include "fairsynth/error.hpp"
#include "fairsynth/ingest.hpp"
#include "fairsynth/rng.hpp"
#include "fairsynth/split.hpp"
#include "helpers.hpp"

using namespace fairsynth;
using test::TempDir;

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

DiscretizationConfig passthrough_config(const std::vector<std::string>& cols) {
    DiscretizationConfig config;
    for (const auto& c : cols) {
        ColumnRule rule;
        rule.source = c;
        rule.name = c;
        rule.passthrough = true;
        config.columns.push_back(rule);
    }
    return config;
}

}  // namespace

TEST_CASE("schema validation") {
    CHECK_THROWS_AS(Schema({{"a", {}, false}}, std::nullopt), Error);
    CHECK_THROWS_AS(Schema({{"a", {"x", "x"}, false}}, std::nullopt), Error);
    CHECK_THROWS_AS(Schema({{"a", {"x"}, false}, {"a", {"y"}, false}}, std::nullopt), Error);
    CHECK_THROWS_AS(Schema({{"a", {"x", "y", "z"}, false}}, std::string("a")), Error);  // label not binary
    CHECK_THROWS_AS(Schema({{"a", {"x", "y"}, false}}, std::string("b")), Error);
    CHECK_NOTHROW(Schema({{"a", {"x", "y"}, false}}, std::string("a")));
}

TEST_CASE("load_csv drops rows with nulls in retained columns") {
    TempDir dir;
    const auto path = dir.file("t.csv");
    write_file(path, "a,b\nx,1\n,2\ny,3\n");
    auto [schema, table] = load_csv(path, passthrough_config({"a", "b"}));
    CHECK(table.n_rows() == 2);

    // null in a dropped column does not discard the row
    auto [schema2, table2] = load_csv(path, passthrough_config({"b"}));
    CHECK(table2.n_rows() == 3);
}

TEST_CASE("load_csv applies bin rules") {
    TempDir dir;
    const auto path = dir.file("age.csv");
    write_file(path, "age\n17\n30\n70\n");

    DiscretizationConfig config;
    ColumnRule rule;
    rule.source = "age";
    rule.name = "age";
    rule.bins = {{"<25", 25.0, false}, {"25-60", 60.0, true}, {">60", std::nullopt, false}};
    config.columns.push_back(rule);

    auto [schema, table] = load_csv(path, config);
    REQUIRE(schema->size() == 1);
    CHECK(schema->attribute(0).categories == std::vector<std::string>{"25-60", "<25", ">60"});
    // one row per category
    std::set<std::uint16_t> seen;
    for (std::size_t r = 0; r < table.n_rows(); ++r) seen.insert(table.at(r, 0));
    CHECK(seen.size() == 3);
}

TEST_CASE("load_csv merge with no catch-all rejects unknown values") {
    TempDir dir;
    const auto path = dir.file("m.csv");
    write_file(path, "c\nfoo\nbar\n");
    DiscretizationConfig config;
    ColumnRule rule;
    rule.source = "c";
    rule.name = "c";
    MergeRule merge;
    merge.map["foo"] = "f";
    rule.merge = merge;
    config.columns.push_back(rule);
    CHECK_THROWS_AS(load_csv(path, config), Error);

    config.columns[0].merge->fallback = "other";
    auto [schema, table] = load_csv(path, config);
    CHECK(table.n_rows() == 2);
}

TEST_CASE("load_csv errors on absent column and unreadable file") {
    TempDir dir;
    const auto path = dir.file("t.csv");
    write_file(path, "a\nx\n");
    CHECK_THROWS_AS(load_csv(path, passthrough_config({"nope"})), Error);
    CHECK_THROWS_AS(load_csv(dir.file("missing.csv"), passthrough_config({"a"})), Error);
}

TEST_CASE("categories are sorted lexicographically") {
    TempDir dir;
    const auto path = dir.file("s.csv");
    write_file(path, "a\nzebra\napple\nmango\n");
    auto [schema, table] = load_csv(path, passthrough_config({"a"}));
    CHECK(schema->attribute(0).categories ==
          std::vector<std::string>{"apple", "mango", "zebra"});
}

TEST_CASE("canonical CSV round-trip reproduces rows and schema") {
    auto schema = test::toy_schema({{"x", 3}, {"y", 2}, {"z", 4}});
    Rng rng(7);
    std::vector<std::vector<int>> rows;
    for (int i = 0; i < 50; ++i)
        rows.push_back({static_cast<int>(rng.uniform_int(3)), static_cast<int>(rng.uniform_int(2)),
                        static_cast<int>(rng.uniform_int(4))});
    const DataTable table = test::make_table(schema, {"x", "y", "z"}, rows);

    TempDir dir;
    const auto path = dir.file("round.csv");
    write_canonical_csv(table, path);
    const DataTable back = read_canonical_csv(path, schema);
    CHECK(back == table);

    // reloading through load_csv with a passthrough config also reproduces rows
    auto [schema2, table2] = load_csv(path, passthrough_config({"x", "y", "z"}));
    REQUIRE(table2.n_rows() == table.n_rows());
    for (std::size_t r = 0; r < table.n_rows(); ++r)
        for (std::size_t c = 0; c < 3; ++c) CHECK(table2.at(r, c) == table.at(r, c));
}

TEST_CASE("holdout_split sizes and determinism") {
    auto schema = test::toy_schema({{"x", 2}});
    std::vector<std::vector<int>> rows(1000, {0});
    for (int i = 0; i < 1000; ++i) rows[i][0] = i % 2;
    const DataTable table = test::make_table(schema, {"x"}, rows);

    auto [train, testt] = holdout_split(table, 0.3, 42);
    CHECK(train.n_rows() == 700);
    CHECK(testt.n_rows() == 300);

    auto [train2, test2] = holdout_split(table, 0.3, 42);
    CHECK(train == train2);
    CHECK(testt == test2);

    auto [train3, test3] = holdout_split(table, 0.3, 43);
    CHECK_FALSE(testt == test3);

    CHECK_THROWS_AS(holdout_split(table, 0.0, 1), Error);
    CHECK_THROWS_AS(holdout_split(table, 1.0, 1), Error);
}

TEST_CASE("holdout_split test size rounds") {
    auto schema = test::toy_schema({{"x", 2}});
    std::vector<std::vector<int>> rows(5278, {1});
    const DataTable table = test::make_table(schema, {"x"}, rows);
    auto [train, testt] = holdout_split(table, 0.3, 0);
    CHECK(testt.n_rows() == 1583);  // round(0.3 * 5278)
    CHECK(train.n_rows() == 5278 - 1583);
}

TEST_CASE("holdout_split partitions the rows") {
    auto schema = test::toy_schema({{"x", 8}});
    Rng rng(3);
    std::vector<std::vector<int>> rows;
    for (int i = 0; i < 237; ++i) rows.push_back({static_cast<int>(rng.uniform_int(8))});
    const DataTable table = test::make_table(schema, {"x"}, rows);

    auto [train, testt] = holdout_split(table, 0.25, 5);
    // multiset of values is preserved
    std::multiset<int> before, after;
    for (std::size_t r = 0; r < table.n_rows(); ++r) before.insert(table.at(r, 0));
    for (std::size_t r = 0; r < train.n_rows(); ++r) after.insert(train.at(r, 0));
    for (std::size_t r = 0; r < testt.n_rows(); ++r) after.insert(testt.at(r, 0));
    CHECK(before == after);
}

TEST_CASE("separate_columns widths and reconstruction") {
    auto schema = test::toy_schema({{"x1", 2}, {"x2", 3}, {"x3", 2}, {"x4", 4}});
    Rng rng(11);
    std::vector<std::vector<int>> rows;
    for (int i = 0; i < 64; ++i)
        rows.push_back({static_cast<int>(rng.uniform_int(2)), static_cast<int>(rng.uniform_int(3)),
                        static_cast<int>(rng.uniform_int(2)), static_cast<int>(rng.uniform_int(4))});
    const DataTable table = test::make_table(schema, {"x1", "x2", "x3", "x4"}, rows);

    SeparationSpec spec;
    spec.internal_attrs = {"x1", "x2", "x3"};
    spec.external_attrs = {"x3", "x4"};
    spec.overlap_attrs = {"x3"};
    auto [internal, external] = separate_columns(table, spec);
    CHECK(internal.width() == 3);
    CHECK(external.width() == 2);
    CHECK(internal.n_rows() == table.n_rows());
    CHECK(external.n_rows() == table.n_rows());

    // joining on row index reconstructs the original exactly
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        CHECK(internal.at(r, 0) == table.at(r, 0));
        CHECK(internal.at(r, 1) == table.at(r, 1));
        CHECK(internal.at(r, 2) == table.at(r, 2));
        CHECK(external.at(r, 0) == table.at(r, 2));
        CHECK(external.at(r, 1) == table.at(r, 3));
    }
}

TEST_CASE("separate_columns degenerate full overlap") {
    auto schema = test::toy_schema({{"a", 2}, {"b", 2}});
    const DataTable table = test::make_table(schema, {"a", "b"}, {{0, 1}, {1, 0}});
    SeparationSpec spec;
    spec.internal_attrs = {"a", "b"};
    spec.external_attrs = {"a", "b"};
    spec.overlap_attrs = {"a", "b"};
    auto [internal, external] = separate_columns(table, spec);
    CHECK(internal == external);
    CHECK(internal == table);
}

TEST_CASE("separation spec validation") {
    std::vector<Attribute> attrs = {{"f", {"a", "b"}, false},
                                    {"y", {"0", "1"}, false},
                                    {"p", {"u", "v"}, true}};
    auto schema = std::make_shared<const Schema>(attrs, std::string("y"));

    SeparationSpec ok;
    ok.internal_attrs = {"f", "y"};
    ok.external_attrs = {"f", "p"};
    ok.overlap_attrs = {"f"};
    CHECK_NOTHROW(ok.validate(*schema));

    SeparationSpec label_external = ok;
    label_external.internal_attrs = {"f"};
    label_external.external_attrs = {"f", "p", "y"};
    CHECK_THROWS_AS(label_external.validate(*schema), Error);

    SeparationSpec protected_internal = ok;
    protected_internal.internal_attrs = {"f", "y", "p"};
    protected_internal.overlap_attrs = {"f", "p"};
    CHECK_THROWS_AS(protected_internal.validate(*schema), Error);

    SeparationSpec empty_overlap = ok;
    empty_overlap.overlap_attrs = {};
    CHECK_THROWS_AS(empty_overlap.validate(*schema), Error);

    SeparationSpec not_covering = ok;
    not_covering.internal_attrs = {"y", "f"};
    not_covering.external_attrs = {"f"};
    CHECK_THROWS_AS(not_covering.validate(*schema), Error);
}
