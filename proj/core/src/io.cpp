#include "calib/io.hpp"

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "calib/error.hpp"

namespace calib {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string::size_type start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back(sep);
    out += parts[i];
  }
  return out;
}

double parse_double(const std::string& token, long line) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0' || errno == ERANGE)
    throw Error(ErrorCode::ParseError,
                "bad numeric field '" + token + "' at line " +
                    std::to_string(line),
                -1, -1, line);
  return v;
}

long parse_long(const std::string& token, long line) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(token.c_str(), &end, 10);
  if (end == token.c_str() || *end != '\0' || errno == ERANGE)
    throw Error(ErrorCode::ParseError,
                "bad integer field '" + token + "' at line " +
                    std::to_string(line),
                -1, -1, line);
  return v;
}

bool parse_bool(const std::string& token, long line) {
  if (token == "true" || token == "1") return true;
  if (token == "false" || token == "0") return false;
  throw Error(ErrorCode::ParseError,
              "bad boolean '" + token + "' at line " + std::to_string(line),
              -1, -1, line);
}

Malignancy parse_malignancy(const std::string& token, long line) {
  if (token == "benign") return Malignancy::Benign;
  if (token == "malignant") return Malignancy::Malignant;
  throw Error(ErrorCode::ParseError,
              "malignancy flag must be 'benign' or 'malignant', got '" +
                  token + "' at line " + std::to_string(line),
              -1, -1, line);
}

std::string malignancy_name(Malignancy m) {
  return m == Malignancy::Benign ? "benign" : "malignant";
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct RawDataset {
  int num_classes = 0;
  std::optional<bool> binary_mode;
  std::vector<std::string> class_names;
  std::vector<Malignancy> malignancy;
  std::vector<double> logits;
  std::vector<int> labels;
  std::size_t cols = 0;
};

// Shared finishing step: applies the two-column binary conversion and
// runs core validation.
ReadDatasetResult finish(RawDataset raw, std::vector<std::string> notices) {
  if (raw.num_classes < 2)
    throw Error(ErrorCode::ParseError, "missing or bad num_classes header");
  if (raw.binary_mode.value_or(false) && raw.cols == 2) {
    const std::size_t n = raw.labels.size();
    std::vector<double> scalar(n);
    for (std::size_t i = 0; i < n; ++i)
      scalar[i] = raw.logits[i * 2 + 1] - raw.logits[i * 2];
    raw.logits = std::move(scalar);
    raw.cols = 1;
    notices.push_back(
        "two-column binary export converted to scalar logits z = z1 - z0");
  }
  if (raw.binary_mode.has_value()) {
    const bool is_binary = raw.cols == 1;
    if (*raw.binary_mode != is_binary)
      throw Error(ErrorCode::ParseError,
                  "binary_mode flag does not match the logit column count");
  }

  ReadDatasetResult result{
      validate_dataset(std::move(raw.logits), raw.cols, std::move(raw.labels),
                       raw.num_classes),
      std::nullopt,
      std::move(notices)};
  if (!raw.malignancy.empty()) {
    if (raw.class_names.empty()) {
      for (std::size_t k = 0; k < raw.malignancy.size(); ++k)
        raw.class_names.push_back("class" + std::to_string(k));
    }
    result.taxonomy = ClassTaxonomy(raw.class_names, raw.malignancy);
    if (result.taxonomy->num_classes() != result.dataset.num_classes())
      throw Error(ErrorCode::ParseError,
                  "malignancy flags do not match num_classes");
  }
  return result;
}

ReadDatasetResult read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);

  RawDataset raw;
  std::string line;
  long line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string body = line.substr(1);
      if (!body.empty() && body[0] == ' ') body.erase(0, 1);
      const auto eq = body.find('=');
      if (eq == std::string::npos) continue;  // plain comment
      const std::string key = body.substr(0, eq);
      const std::string value = body.substr(eq + 1);
      if (key == "num_classes")
        raw.num_classes = static_cast<int>(parse_long(value, line_no));
      else if (key == "binary_mode")
        raw.binary_mode = parse_bool(value, line_no);
      else if (key == "class_names")
        raw.class_names = split(value, ',');
      else if (key == "malignancy") {
        for (const auto& token : split(value, ','))
          raw.malignancy.push_back(parse_malignancy(token, line_no));
      }
      continue;
    }
    if (!header_seen) {
      const auto fields = split(line, ',');
      if (fields.size() < 2 || fields.back() != "label")
        throw Error(ErrorCode::ParseError,
                    "expected header z0,...,label at line " +
                        std::to_string(line_no),
                    -1, -1, line_no);
      raw.cols = fields.size() - 1;
      header_seen = true;
      continue;
    }
    const auto fields = split(line, ',');
    if (fields.size() != raw.cols + 1)
      throw Error(ErrorCode::ParseError,
                  "expected " + std::to_string(raw.cols + 1) +
                      " fields, got " + std::to_string(fields.size()) +
                      " at line " + std::to_string(line_no),
                  -1, -1, line_no);
    for (std::size_t k = 0; k < raw.cols; ++k)
      raw.logits.push_back(parse_double(fields[k], line_no));
    raw.labels.push_back(static_cast<int>(parse_long(fields.back(), line_no)));
  }
  if (!header_seen)
    throw Error(ErrorCode::ParseError, "no data header found in " + path);
  return finish(std::move(raw), {});
}

ReadDatasetResult read_dataset_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);

  RawDataset raw;
  std::string line;
  long line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::ParseError,
                  "bad JSON at line " + std::to_string(line_no) + ": " +
                      e.what(),
                  -1, -1, line_no);
    }
    try {
      if (!header_seen) {
        raw.num_classes = j.at("num_classes").get<int>();
        if (j.contains("binary_mode"))
          raw.binary_mode = j["binary_mode"].get<bool>();
        if (j.contains("class_names"))
          raw.class_names = j["class_names"].get<std::vector<std::string>>();
        if (j.contains("malignancy")) {
          for (const auto& token :
               j["malignancy"].get<std::vector<std::string>>())
            raw.malignancy.push_back(parse_malignancy(token, line_no));
        }
        header_seen = true;
        continue;
      }
      const auto logits = j.at("logits").get<std::vector<double>>();
      if (raw.labels.empty()) {
        raw.cols = logits.size();
      } else if (logits.size() != raw.cols) {
        throw Error(ErrorCode::ParseError,
                    "logit arity changed at line " + std::to_string(line_no),
                    -1, -1, line_no);
      }
      raw.logits.insert(raw.logits.end(), logits.begin(), logits.end());
      raw.labels.push_back(j.at("label").get<int>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::ParseError,
                  "bad record at line " + std::to_string(line_no) + ": " +
                      e.what(),
                  -1, -1, line_no);
    }
  }
  if (!header_seen)
    throw Error(ErrorCode::ParseError, "no header object found in " + path);
  return finish(std::move(raw), {});
}

}  // namespace

DatasetFormat infer_format(const std::string& path) {
  return path.size() >= 6 && path.substr(path.size() - 6) == ".jsonl"
             ? DatasetFormat::Jsonl
             : DatasetFormat::Csv;
}

ReadDatasetResult read_dataset(const std::string& path, DatasetFormat format) {
  return format == DatasetFormat::Jsonl ? read_dataset_jsonl(path)
                                        : read_dataset_csv(path);
}

ReadDatasetResult read_dataset(const std::string& path) {
  return read_dataset(path, infer_format(path));
}

void write_dataset(const LogitDataset& dataset,
                   const std::optional<ClassTaxonomy>& taxonomy,
                   const std::string& path, DatasetFormat format) {
  if (taxonomy && taxonomy->num_classes() != dataset.num_classes())
    throw Error(ErrorCode::ShapeMismatch,
                "taxonomy does not match dataset classes");
  std::ostringstream out;
  const std::size_t cols = dataset.logit_cols();
  if (format == DatasetFormat::Csv) {
    out << "# num_classes=" << dataset.num_classes() << '\n';
    out << "# binary_mode=" << (dataset.binary_mode() ? "true" : "false")
        << '\n';
    if (taxonomy) {
      out << "# class_names=" << join(taxonomy->class_names(), ',') << '\n';
      std::vector<std::string> flags;
      for (Malignancy m : taxonomy->malignancy())
        flags.push_back(malignancy_name(m));
      out << "# malignancy=" << join(flags, ',') << '\n';
    }
    for (std::size_t k = 0; k < cols; ++k) out << 'z' << k << ',';
    out << "label\n";
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      for (std::size_t k = 0; k < cols; ++k)
        out << fmt17(dataset.row(i)[k]) << ',';
      out << dataset.label(i) << '\n';
    }
  } else {
    nlohmann::ordered_json header;
    header["num_classes"] = dataset.num_classes();
    header["binary_mode"] = dataset.binary_mode();
    if (taxonomy) {
      header["class_names"] = taxonomy->class_names();
      std::vector<std::string> flags;
      for (Malignancy m : taxonomy->malignancy())
        flags.push_back(malignancy_name(m));
      header["malignancy"] = flags;
    }
    out << header.dump() << '\n';
    for (std::size_t i = 0; i < dataset.size(); ++i) {
      nlohmann::ordered_json rec;
      const auto row = dataset.row(i);
      rec["logits"] = std::vector<double>(row.begin(), row.end());
      rec["label"] = dataset.label(i);
      out << rec.dump() << '\n';
    }
  }
  write_text_atomic(path, out.str());
}

LogitDataset binarize_two_class(const LogitDataset& dataset) {
  if (dataset.binary_mode()) return dataset;
  if (dataset.num_classes() != 2)
    throw Error(ErrorCode::ShapeMismatch,
                "binarize requires a 2-class dataset");
  std::vector<double> scalar(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto row = dataset.row(i);
    scalar[i] = row[1] - row[0];
  }
  return validate_dataset(std::move(scalar), 1, dataset.labels(), 2);
}

CostMatrix read_cost_matrix(const std::string& path,
                            const std::optional<ClassTaxonomy>& taxonomy) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::string line;
  long line_no = 0;
  std::vector<std::string> header;
  std::vector<std::string> action_names;
  std::vector<double> costs;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split(line, ',');
    if (header.empty()) {
      if (fields.size() < 3 || fields[0] != "action")
        throw Error(ErrorCode::ParseError,
                    "cost matrix header must be action,<class names> at line " +
                        std::to_string(line_no),
                    -1, -1, line_no);
      header = fields;
      continue;
    }
    if (fields.size() != header.size())
      throw Error(ErrorCode::ParseError,
                  "cost row arity mismatch at line " + std::to_string(line_no),
                  -1, -1, line_no);
    action_names.push_back(fields[0]);
    for (std::size_t k = 1; k < fields.size(); ++k)
      costs.push_back(parse_double(fields[k], line_no));
  }
  if (header.empty())
    throw Error(ErrorCode::ParseError, "no cost matrix header in " + path);
  const std::size_t num_classes = header.size() - 1;
  if (taxonomy) {
    if (static_cast<std::size_t>(taxonomy->num_classes()) != num_classes)
      throw Error(ErrorCode::ShapeMismatch,
                  "cost matrix classes do not match taxonomy");
    for (std::size_t k = 0; k < num_classes; ++k) {
      if (header[k + 1] != taxonomy->class_names()[k])
        throw Error(ErrorCode::ParseError,
                    "cost matrix class '" + header[k + 1] +
                        "' does not match taxonomy class '" +
                        taxonomy->class_names()[k] + "'");
    }
  }
  return CostMatrix(std::move(costs), action_names.size(), num_classes,
                    std::move(action_names));
}

void write_cost_matrix(const CostMatrix& costs,
                       const std::vector<std::string>& class_names,
                       const std::string& path) {
  if (class_names.size() != costs.num_classes())
    throw Error(ErrorCode::ShapeMismatch,
                "class names do not match cost matrix");
  std::ostringstream out;
  out << "action";
  for (const auto& name : class_names) out << ',' << name;
  out << '\n';
  for (std::size_t a = 0; a < costs.num_actions(); ++a) {
    out << costs.action_names()[a];
    for (std::size_t k = 0; k < costs.num_classes(); ++k)
      out << ',' << fmt17(costs.cost(a, k));
    out << '\n';
  }
  write_text_atomic(path, out.str());
}

nlohmann::ordered_json make_report(const std::string& kind,
                                   const std::string& input_path,
                                   nlohmann::ordered_json config,
                                   nlohmann::ordered_json results) {
  nlohmann::ordered_json report;
  report["schema_version"] = 1;
  report["kind"] = kind;
  report["input"] = {{"path", input_path},
                     {"digest", file_digest_hex(input_path)}};
  report["config"] = std::move(config);
  report["results"] = std::move(results);
  return report;
}

void write_report(const nlohmann::ordered_json& report,
                  const std::string& path) {
  write_text_atomic(path, report.dump(2) + "\n");
}

std::string file_digest_hex(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ULL;
    }
    if (!in) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(hash));
  return hex;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp);
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::IoError, "short write to " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error(ErrorCode::IoError,
                "cannot move " + tmp + " to " + path + ": " + ec.message());
  }
}

}  // namespace calib
