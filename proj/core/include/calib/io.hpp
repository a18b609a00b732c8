#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "calib/types.hpp"

namespace calib {

enum class DatasetFormat { Csv, Jsonl };

// Picks the format from the file extension (.jsonl -> Jsonl, anything
// else CSV).
DatasetFormat infer_format(const std::string& path);

struct ReadDatasetResult {
  LogitDataset dataset;
  std::optional<ClassTaxonomy> taxonomy;
  // Human-readable notes emitted during ingestion (e.g. the two-column
  // binary conversion); callers decide whether to log them.
  std::vector<std::string> notices;
};

// Reads and validates a dataset file.
//
// CSV: preamble lines `# key=value` (num_classes, binary_mode,
// class_names, malignancy), a header `z0,...,zK-1,label`, then one
// record per line. JSONL: a header object on the first line, then one
// object {"logits": [...], "label": l} per line. Parse errors carry
// 1-based line numbers.
//
// A file declaring binary_mode with two logit columns is treated as a
// two-class softmax export and converted to scalar logits z = z1 - z0
// (a notice records the conversion).
ReadDatasetResult read_dataset(const std::string& path, DatasetFormat format);
ReadDatasetResult read_dataset(const std::string& path);

// Writes the dataset in either format. Logits are serialized with 17
// significant digits (CSV) or shortest-round-trip (JSONL); both survive
// a read back bit-exactly.
void write_dataset(const LogitDataset& dataset,
                   const std::optional<ClassTaxonomy>& taxonomy,
                   const std::string& path, DatasetFormat format);

// Folds a two-column 2-class dataset into the binary scalar form
// z = z1 - z0. sigma(z/T) equals the tempered two-class softmax of the
// original pair, so nothing is lost.
LogitDataset binarize_two_class(const LogitDataset& dataset);

// Cost matrix CSV: header `action,<class names...>`, one row per action.
// When a taxonomy is supplied the header class names must match it.
CostMatrix read_cost_matrix(const std::string& path,
                            const std::optional<ClassTaxonomy>& taxonomy);
void write_cost_matrix(const CostMatrix& costs,
                       const std::vector<std::string>& class_names,
                       const std::string& path);

// Envelope for every report the toolkit writes: schema version, the
// input file with its content digest, the configuration echo, and the
// computed results. Two runs over identical inputs produce identical
// bytes.
nlohmann::ordered_json make_report(const std::string& kind,
                                   const std::string& input_path,
                                   nlohmann::ordered_json config,
                                   nlohmann::ordered_json results);
void write_report(const nlohmann::ordered_json& report,
                  const std::string& path);

// FNV-1a 64-bit digest of the file bytes, as 16 hex characters.
std::string file_digest_hex(const std::string& path);

// Writes to `path + ".tmp"` and renames into place, so a failed run
// never leaves a partial file at the destination.
void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace calib
