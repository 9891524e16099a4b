#include <gtest/gtest.h>

#include <random>

#include "dq/error.hpp"
#include "support.hpp"

namespace dq {
namespace {

using test::json;

TEST(Catalog, Loading) {
  json entities = json::array();
  for (int i = 0; i < 14; ++i) {
    entities.push_back({{"name", "t" + std::to_string(i)},
                        {"columns", {{{"name", "id"}, {"type", "integer"}, {"nullable", false}}}},
                        {"key", {"id"}}});
  }
  EXPECT_EQ(test::catalog_from(entities).entities.size(), 14u);
  EXPECT_TRUE(test::catalog_from(json::array()).entities.empty());
  json bad_key = json::array({{{"name", "t"}, {"columns", {{{"name", "id"}, {"type", "integer"}}}}, {"key", {"id2"}}}});
  EXPECT_THROW((void)test::catalog_from(bad_key), ParseError);
  SchemaCatalog c = test::person_catalog();
  EXPECT_EQ(load_catalog(serialize_catalog(c)), c);
}

TEST(Entity, LoadsRowsAndRejectsBadCells) {
  SchemaCatalog catalog = test::person_catalog();
  const EntitySchema& person = *catalog.find("person");
  test::TempDir dir("dataset");
  write_file(dir.path / "person.csv", test::person_csv().at("person"));
  Entity e = load_entity(dir.path / "person.csv", person);
  EXPECT_EQ(e.row_count, 4u);
  EXPECT_EQ(parse_entity_csv("id,ipaddress\n", person).row_count, 0u);

  const EntitySchema& warning = *catalog.find("warning");
  try {
    (void)parse_entity_csv("wid,type\n1,x\nabc,y\n", warning);
    FAIL();
  } catch (const LoadError& err) {
    EXPECT_EQ(err.row(), 1u);  // 0-based data ordinal
    EXPECT_EQ(err.column(), "wid");
  }
  EXPECT_THROW((void)parse_entity_csv("type,wid\n", warning), LoadError);
  EXPECT_THROW((void)parse_entity_csv("wid,type\n,x\n", warning), LoadError);
  EXPECT_THROW((void)load_entity(dir.path / "missing.csv", warning), IoError);
}

TEST(Entity, NullAndQuotingConventions) {
  SchemaCatalog catalog = test::person_catalog();
  Entity e = parse_entity_csv("id,ipaddress\na,\nb,\"\"\nc,\\N\nd,\"x,\"\"y\"\"\"\r\n", *catalog.find("person"));
  ASSERT_EQ(e.row_count, 4u);
  const auto& ip = e.column("ipaddress");
  EXPECT_TRUE(ip[0].is_null());
  EXPECT_EQ(ip[1], Value(""));
  EXPECT_TRUE(ip[2].is_null());
  EXPECT_EQ(ip[3], Value("x,\"y\""));
  EXPECT_EQ(parse_entity_csv(write_entity_csv(e), e.schema), e);
}

TEST(Index, Examples) {
  SchemaCatalog catalog = test::person_catalog();
  Entity e = parse_entity_csv("wid,type\n1,A\n2,B\n3,A\n", *catalog.find("warning"));
  ColumnIndex idx = index_column(e, "type");
  ASSERT_NE(idx.find(Value("A")), nullptr);
  EXPECT_EQ(*idx.find(Value("A")), (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(*idx.find(Value("B")), (std::vector<std::size_t>{1}));
  EXPECT_EQ(idx.distinct(), 2u);

  Entity nulls = parse_entity_csv("wid,type\n1,\n2,\n", *catalog.find("warning"));
  EXPECT_EQ(index_column(nulls, "type").distinct(), 0u);

  ColumnIndex keys = index_column(e, "wid");
  for (const auto& [v, rows] : keys.entries()) EXPECT_EQ(rows.size(), 1u);
}

SchemaCatalog mixed_catalog() {
  return test::catalog_from(json::array({{{"name", "m"},
                                          {"columns",
                                           {{{"name", "t"}, {"type", "text"}},
                                            {{"name", "i"}, {"type", "integer"}},
                                            {{"name", "d"}, {"type", "decimal"}},
                                            {{"name", "b"}, {"type", "boolean"}},
                                            {{"name", "ts"}, {"type", "timestamp"}}}}}}));
}

Entity random_entity(const EntitySchema& schema, std::mt19937_64& rng, std::size_t rows) {
  static const std::vector<std::string> texts{"a", "b,c", "q\"x", "", "\\N", "line\nbreak", "é", " sp "};
  Entity e;
  e.schema = schema;
  e.row_count = rows;
  e.columns.assign(schema.columns.size(), {});
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    for (std::size_t r = 0; r < rows; ++r) {
      if (rng() % 6 == 0) {
        e.columns[c].emplace_back();
        continue;
      }
      switch (schema.columns[c].type) {
        case DataType::text: e.columns[c].emplace_back(texts[rng() % texts.size()]); break;
        case DataType::integer: e.columns[c].emplace_back(static_cast<std::int64_t>(rng() % 2001) - 1000); break;
        case DataType::decimal:
          e.columns[c].emplace_back(Decimal::from_scaled(static_cast<__int128>(rng() % 200001) * 10'000'000'000 -
                                                         static_cast<__int128>(1'000'000'000'000'000)));
          break;
        case DataType::boolean: e.columns[c].emplace_back(rng() % 2 == 0); break;
        case DataType::timestamp:
          e.columns[c].emplace_back(Timestamp{static_cast<std::int64_t>(rng() % 4'000'000'000) * 1'000'000});
          break;
      }
    }
  }
  return e;
}

TEST(DatasetProperty, LosslessRoundTripAndIndexOracle) {
  SchemaCatalog catalog = mixed_catalog();
  for (int seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(seed);
    Entity e = random_entity(catalog.entities[0], rng, rng() % 60);
    std::string csv = write_entity_csv(e);
    Entity back = parse_entity_csv(csv, e.schema);
    EXPECT_EQ(back, e) << "seed " << seed;
    EXPECT_EQ(write_entity_csv(back), csv);
    EXPECT_EQ(parse_entity_csv(csv, e.schema), back);

    for (const auto& col : e.schema.columns) {
      ColumnIndex idx = index_column(e, col.name);
      const auto& values = e.column(col.name);
      for (std::size_t probe = 0; probe < values.size(); ++probe) {
        std::vector<std::size_t> scan;
        for (std::size_t r = 0; r < values.size(); ++r) {
          if (!values[r].is_null() && !values[probe].is_null() && same_value(values[r], values[probe])) scan.push_back(r);
        }
        const auto* hit = idx.find(values[probe]);
        if (scan.empty()) {
          EXPECT_TRUE(hit == nullptr || hit->empty());
        } else {
          ASSERT_NE(hit, nullptr);
          EXPECT_EQ(*hit, scan);
        }
      }
    }
  }
}

TEST(Snapshot, FingerprintTracksContent) {
  SchemaCatalog catalog = test::person_catalog();
  test::TempDir dir("snap");
  for (const auto& [name, csv] : test::person_csv()) write_file(dir.path / (name + ".csv"), csv);
  Repository a = load_snapshot(dir.path, catalog, 1);
  Repository b = load_snapshot(dir.path, catalog, 2);
  EXPECT_EQ(a.fingerprint, b.fingerprint);
  EXPECT_EQ(a.fingerprint.size(), 64u);
  write_file(dir.path / "warning.csv", "wid,type\n1,HR\n");
  EXPECT_NE(load_snapshot(dir.path, catalog, 1).fingerprint, a.fingerprint);
  std::filesystem::remove(dir.path / "person.csv");
  EXPECT_THROW((void)load_snapshot(dir.path, catalog, 1), IoError);
}

}  // namespace
}  // namespace dq
