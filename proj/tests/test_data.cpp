#include <doctest.h>

#include <set>
#include <sstream>

#include "mlrules/data.hpp"
#include "mlrules/errors.hpp"
#include "support.hpp"

using namespace mlrules;
using testing_support::data_path;

namespace {

// The newspaper table typed in again, independently of builtin_newspapers().
const char* kNewspaperRows[14] = {
    "Primary Single Male No 0000",        "Primary Single Male Yes 0000",
    "Primary Married Male No 0100",       "University Divorced Female No 1010",
    "University Married Female Yes 1010", "Secondary Single Male No 0100",
    "University Single Male No 1100",     "Secondary Divorced Female No 1001",
    "Secondary Single Female Yes 0110",   "Secondary Married Male Yes 1100",
    "Primary Married Female No 0000",     "Secondary Divorced Male Yes 0000",
    "University Divorced Male Yes 1100",  "Secondary Divorced Male No 1001",
};

std::vector<std::string> words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

}  // namespace

TEST_CASE("builtin newspapers matches the table cell for cell") {
  Dataset d = builtin_newspapers();
  REQUIRE(d.size() == 14);
  REQUIRE(d.attribute_count() == 4);
  CHECK(d.schema().labels == std::vector<std::string>{"quality", "tabloid", "fashion", "sports"});
  for (std::size_t j = 0; j < 14; ++j) {
    auto w = words(kNewspaperRows[j]);
    for (std::size_t a = 0; a < 4; ++a) {
      const auto& attr = d.schema().attributes[a];
      CHECK(attr.values[static_cast<std::size_t>(d.features(j)[a])] == w[a]);
    }
    for (std::size_t i = 0; i < 4; ++i) CHECK(int(d.labels(j)[i]) == w[4][i] - '0');
  }
}

TEST_CASE("individual fixture rows") {
  Dataset d = builtin_newspapers();
  const auto& s = d.schema();
  auto row = d.features(3);
  CHECK(s.attributes[0].values[size_t(row[0])] == "University");
  CHECK(s.attributes[1].values[size_t(row[1])] == "Divorced");
  CHECK(s.attributes[2].values[size_t(row[2])] == "Female");
  CHECK(s.attributes[3].values[size_t(row[3])] == "No");
  CHECK(d.labels(3) == LabelVector{1, 0, 1, 0});
  CHECK(d.labels(0) == LabelVector{0, 0, 0, 0});
  CHECK(d.labels(12) == LabelVector{1, 1, 0, 0});
  CHECK(s.attributes[3].values == std::vector<std::string>{"Yes", "No"});
}

TEST_CASE("bundled fixture files load to the builtin dataset") {
  Dataset b = builtin_newspapers();
  CHECK(load_dataset(data_path("newspapers.arff"), DataFormat::Arff, std::size_t{4}) == b);
  CHECK(load_dataset(data_path("newspapers.csv"), DataFormat::Csv, std::size_t{4}) == b);
  CHECK(format_from_path("x/newspapers.arff") == DataFormat::Arff);
  CHECK(format_from_path("x/newspapers.csv") == DataFormat::Csv);
}

TEST_CASE("plain CSV with a label count") {
  std::istringstream in("f1,f2,L1,L2\n1.5,a,0,1\n2,b,1,1\n-3,a,0,0\n");
  Dataset d = parse_csv(in, std::size_t{2});
  CHECK(d.attribute_count() == 2);
  CHECK(d.label_count() == 2);
  CHECK(d.size() == 3);
  CHECK_FALSE(d.schema().attributes[0].is_nominal());
  CHECK(d.schema().attributes[1].values == std::vector<std::string>{"a", "b"});
  CHECK(d.features(2)[0] == -3.0);
  CHECK(d.labels(1) == LabelVector{1, 1});
}

TEST_CASE("labels chosen by name") {
  std::istringstream in("L1,f1,L2\n1,x,0\n0,y,1\n");
  Dataset d = parse_csv(in, std::vector<std::string>{"L1", "L2"});
  CHECK(d.schema().labels == std::vector<std::string>{"L1", "L2"});
  CHECK(d.attribute_count() == 1);
  CHECK(d.labels(0) == LabelVector{1, 0});
}

TEST_CASE("arity errors carry the line number") {
  std::istringstream in("f1,f2,L1\n1,2,0\na,b\n");
  try {
    parse_csv(in, std::size_t{1});
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("non-binary labels and unknown nominal values are validation errors") {
  std::istringstream csv("f1,L1\n1,2\n");
  CHECK_THROWS_AS(parse_csv(csv, std::size_t{1}), ValidationError);
  std::istringstream arff("@relation r\n@attribute a {x,y}\n@attribute L {0,1}\n@data\nz,1\n");
  CHECK_THROWS_AS(parse_arff(arff, std::size_t{1}), ValidationError);
}

TEST_CASE("unsupported ARFF input is rejected") {
  std::istringstream sparse("@relation r\n@attribute a numeric\n@attribute L {0,1}\n@data\n{0 1, 1 1}\n");
  CHECK_THROWS_AS(parse_arff(sparse, std::size_t{1}), ParseError);
  std::istringstream str("@relation r\n@attribute a string\n@attribute L {0,1}\n@data\nx,1\n");
  CHECK_THROWS_AS(parse_arff(str, std::size_t{1}), ParseError);
  std::istringstream missing("@relation r\n@attribute a numeric\n@attribute L {0,1}\n@data\n?,1\n");
  CHECK_THROWS(parse_arff(missing, std::size_t{1}));
}

TEST_CASE("ARFF numeric attributes and quoted names") {
  std::istringstream in(
      "% comment\n@RELATION r\n@ATTRIBUTE 'the x' REAL\n@attribute c {red, green}\n"
      "@attribute L1 {0,1}\n@attribute L2 {0,1}\n@DATA\n0.25,green,1,0\n7,red,0,0\n");
  Dataset d = parse_arff(in, std::size_t{2});
  CHECK(d.schema().attributes[0].name == "the x");
  CHECK(d.features(0)[0] == 0.25);
  CHECK(d.features(0)[1] == 1.0);
  CHECK(d.labels(0) == LabelVector{1, 0});
}

TEST_CASE("schema validation") {
  Schema dup{{Attribute::numeric("a"), Attribute::numeric("a")}, {"L"}};
  CHECK_THROWS_AS(dup.validate(), ValidationError);
  Schema clash{{Attribute::numeric("a")}, {"a"}};
  CHECK_THROWS_AS(clash.validate(), ValidationError);
  Schema nolabels{{Attribute::numeric("a")}, {}};
  CHECK_THROWS_AS(nolabels.validate(), ValidationError);
  Schema emptydomain{{Attribute::nominal("a", {})}, {"L"}};
  CHECK_THROWS_AS(emptydomain.validate(), ValidationError);
}

TEST_CASE("fixture statistics against a direct count") {
  std::size_t ones = 0;
  std::set<std::string> sets;
  for (auto* row : kNewspaperRows) {
    auto w = words(row);
    for (char c : w[4]) ones += c == '1';
    sets.insert(w[4]);
  }
  DatasetStats st = dataset_stats(builtin_newspapers());
  CHECK(st.instances == 14);
  CHECK(st.nominal_count == 4);
  CHECK(st.numeric_count == 0);
  CHECK(st.label_occurrences == ones);
  CHECK(st.exact_cardinality() == Rational(static_cast<std::int64_t>(ones), 14));
  CHECK(st.exact_density() == Rational(static_cast<std::int64_t>(ones), 56));
  CHECK(st.distinct_labelsets == sets.size());
  CHECK(st.cardinality == doctest::Approx(18.0 / 14).epsilon(1e-12));
  CHECK(st.density == doctest::Approx(18.0 / 56).epsilon(1e-12));
  CHECK_FALSE(st.degenerate);
}

TEST_CASE("stats of a single all-positive instance and of no instances") {
  Schema s{{Attribute::numeric("x")}, {"a", "b", "c", "d"}};
  DatasetStats one = dataset_stats(Dataset(s, {{1.0}}, {{1, 1, 1, 1}}));
  CHECK(one.cardinality == 4.0);
  CHECK(one.density == 1.0);
  CHECK(one.distinct_labelsets == 1);
  DatasetStats none = dataset_stats(Dataset(s, {}, {}));
  CHECK(none.degenerate);
  CHECK(none.cardinality == 0.0);
  CHECK(none.density == 0.0);
}

TEST_CASE("CSV round trip keeps values, order and domains") {
  Dataset d = builtin_newspapers();
  std::ostringstream out;
  write_csv(out, d);
  std::istringstream in(out.str());
  CHECK(parse_csv(in, std::size_t{4}) == d);
}
