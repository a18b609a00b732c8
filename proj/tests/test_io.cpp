#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "calib/error.hpp"
#include "calib/io.hpp"
#include "calib/synth.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace calib;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path dir;
  TempDir() {
    dir = fs::temp_directory_path() /
          ("calib_io_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter++));
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  std::string path(const std::string& name) const {
    return (dir / name).string();
  }
  static inline int counter = 0;
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  return content;
}

}  // namespace

TEST_CASE("dataset round-trip preserves logits bitwise") {
  TempDir tmp;
  Rng rng(113);
  for (auto format : {DatasetFormat::Csv, DatasetFormat::Jsonl}) {
    for (int trial = 0; trial < 5; ++trial) {
      const bool binary = trial % 2 == 0;
      const auto ds = binary
                          ? helpers::random_binary(50, 3.0, rng)
                          : helpers::random_multiclass(50, 4, 3.0, rng);
      const auto tax = binary ? helpers::taxonomy_bm(1, 1)
                              : helpers::taxonomy_bm(2, 2);
      const std::string path = tmp.path(
          "ds" + std::to_string(trial) +
          (format == DatasetFormat::Csv ? ".csv" : ".jsonl"));
      write_dataset(ds, tax, path, format);
      const auto back = read_dataset(path, format);
      CHECK(back.dataset.logits_flat() == ds.logits_flat());
      CHECK(back.dataset.labels() == ds.labels());
      CHECK(back.dataset.binary_mode() == ds.binary_mode());
      CHECK(back.dataset.num_classes() == ds.num_classes());
      REQUIRE(back.taxonomy.has_value());
      CHECK(back.taxonomy->class_names() == tax.class_names());
      CHECK(back.taxonomy->malignancy() == tax.malignancy());
    }
  }
}

TEST_CASE("format is inferred from the extension") {
  CHECK(infer_format("a/b/data.jsonl") == DatasetFormat::Jsonl);
  CHECK(infer_format("a/b/data.csv") == DatasetFormat::Csv);
  CHECK(infer_format("noext") == DatasetFormat::Csv);
}

TEST_CASE("two-column binary export is auto-converted with a notice") {
  TempDir tmp;
  const std::string path = tmp.path("two_col.csv");
  write_file(path,
             "# num_classes=2\n"
             "# binary_mode=true\n"
             "z0,z1,label\n"
             "1.0,3.5,1\n"
             "2.0,-1.0,0\n");
  const auto result = read_dataset(path);
  CHECK(result.dataset.binary_mode());
  CHECK(result.dataset.logit_cols() == 1);
  CHECK(result.dataset.scalar_logit(0) == 2.5);
  CHECK(result.dataset.scalar_logit(1) == -3.0);
  REQUIRE(result.notices.size() == 1);
  CHECK(result.notices[0].find("z1 - z0") != std::string::npos);
}

TEST_CASE("seven-class taxonomy header mirrors a 3/4 benign split") {
  TempDir tmp;
  const std::string path = tmp.path("seven.jsonl");
  write_file(
      path,
      R"({"num_classes":7,"binary_mode":false,"class_names":["nv","bkl","df","mel","bcc","ak","scc"],"malignancy":["benign","benign","benign","malignant","malignant","malignant","malignant"]})"
      "\n"
      R"({"logits":[1,0,0,0,0,0,0],"label":0})"
      "\n");
  const auto result = read_dataset(path);
  REQUIRE(result.taxonomy.has_value());
  int benign = 0, malignant = 0;
  for (auto m : result.taxonomy->malignancy())
    (m == Malignancy::Benign ? benign : malignant) += 1;
  CHECK(benign == 3);
  CHECK(malignant == 4);
  CHECK(result.dataset.num_classes() == 7);
}

TEST_CASE("truncated records carry the line number") {
  TempDir tmp;
  const std::string path = tmp.path("broken.csv");
  write_file(path,
             "# num_classes=3\n"
             "z0,z1,z2,label\n"
             "1.0,2.0,3.0,0\n"
             "1.0,2.0\n");
  try {
    read_dataset(path);
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(e.line() == 4);
  }

  SUBCASE("bad JSON line number") {
    const std::string jpath = tmp.path("broken.jsonl");
    write_file(jpath,
               "{\"num_classes\":2,\"binary_mode\":true}\n"
               "{\"logits\":[1.0],\"label\":0}\n"
               "{nope}\n");
    try {
      read_dataset(jpath);
      FAIL("expected ParseError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ParseError);
      CHECK(e.line() == 3);
    }
  }
}

TEST_CASE("validation failures surface through reading") {
  TempDir tmp;
  const std::string path = tmp.path("badlabel.csv");
  write_file(path,
             "# num_classes=2\n"
             "z0,label\n"
             "0.5,7\n");
  CHECK_THROWS_AS(read_dataset(path), Error);
  try {
    read_dataset(path);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::LabelOutOfRange);
  }
}

TEST_CASE("binarize_two_class folds softmax pairs") {
  const auto two = helpers::multiclass_dataset({{1.0, 3.0}, {2.0, -1.0}},
                                               {1, 0});
  const auto folded = binarize_two_class(two);
  CHECK(folded.binary_mode());
  CHECK(folded.scalar_logit(0) == 2.0);
  CHECK(folded.scalar_logit(1) == -3.0);
  CHECK_THROWS_AS(
      binarize_two_class(helpers::multiclass_dataset({{1.0, 2.0, 3.0}}, {0})),
      Error);
}

TEST_CASE("cost matrix CSV round-trip and taxonomy check") {
  TempDir tmp;
  const std::string path = tmp.path("costs.csv");
  const CostMatrix costs({0.0, 9.0, 1.0, 0.0}, 2, 2,
                         {"watch", "refer"});
  write_cost_matrix(costs, {"benign", "malignant"}, path);
  const auto tax = ClassTaxonomy({"benign", "malignant"},
                                 {Malignancy::Benign, Malignancy::Malignant});
  const auto back = read_cost_matrix(path, tax);
  CHECK(back.costs_flat() == costs.costs_flat());
  CHECK(back.action_names() == std::vector<std::string>{"watch", "refer"});

  SUBCASE("mismatched taxonomy class names are rejected") {
    const auto other = ClassTaxonomy(
        {"nv", "mel"}, {Malignancy::Benign, Malignancy::Malignant});
    CHECK_THROWS_AS(read_cost_matrix(path, other), Error);
  }
  SUBCASE("missing header is a ParseError") {
    const std::string bad = tmp.path("bad.csv");
    write_file(bad, "watch,0,9\n");
    CHECK_THROWS_AS(read_cost_matrix(bad, std::nullopt), Error);
  }
}

TEST_CASE("reports are byte-identical across runs and carry the envelope") {
  TempDir tmp;
  const std::string input = tmp.path("input.csv");
  const auto synth = generate(SynthSpec::binary(50, 1.5, 67));
  write_dataset(synth.dataset, std::nullopt, input, DatasetFormat::Csv);

  nlohmann::ordered_json config{{"bins", 15}, {"seed", 7}};
  nlohmann::ordered_json results{{"temperature", 1.5}};
  const auto report = make_report("fit", input, config, results);
  CHECK(report["schema_version"] == 1);
  CHECK(report["input"]["digest"].get<std::string>().size() == 16);

  const std::string out1 = tmp.path("r1.json");
  const std::string out2 = tmp.path("r2.json");
  write_report(report, out1);
  write_report(make_report("fit", input, config, results), out2);
  CHECK(read_file(out1) == read_file(out2));
  CHECK_FALSE(fs::exists(out1 + ".tmp"));
}

TEST_CASE("digest changes iff the content changes") {
  TempDir tmp;
  const std::string a = tmp.path("a.txt");
  const std::string b = tmp.path("b.txt");
  write_file(a, "same bytes");
  write_file(b, "same bytes");
  CHECK(file_digest_hex(a) == file_digest_hex(b));
  write_file(b, "same bytes!");
  CHECK(file_digest_hex(a) != file_digest_hex(b));
  CHECK_THROWS_AS(file_digest_hex(tmp.path("missing.txt")), Error);
}

TEST_CASE("missing files and headers raise typed errors") {
  TempDir tmp;
  CHECK_THROWS_AS(read_dataset(tmp.path("nope.csv")), Error);
  const std::string path = tmp.path("noheader.csv");
  write_file(path, "# binary_mode=true\nz0,label\n0.5,1\n");
  try {
    read_dataset(path);
    FAIL("expected ParseError for missing num_classes");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
  }
}
