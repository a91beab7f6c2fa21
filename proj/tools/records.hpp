#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "run_config.hpp"

namespace rodbell::cli {

using Field = std::variant<double, std::int64_t, std::uint64_t, std::string, bool>;

/*!
 * Writes result rows as CSV or JSON lines.
 *
 * CSV output starts with one `#` provenance line carrying the tool version
 * and config hash, then the header. JSON lines carry the same column names
 * plus `tool_version` and `config_hash` on every row. Numbers use the
 * shortest round-trip decimal form.
 */
class RecordWriter {
 public:
  RecordWriter(std::ostream& os, OutputFormat format, std::vector<std::string> columns,
               std::string hash);

  void row(const std::vector<Field>& fields);

 private:
  std::ostream& os_;
  OutputFormat format_;
  std::vector<std::string> columns_;
  std::string hash_;
};

/// Config hash embedded in a CSV or JSONL result text; empty when absent or
/// when rows disagree.
std::string embedded_hash(const std::string& record_text);

/// True when every record in `record_text` carries the hash of `cfg`.
bool record_hash_matches(const std::string& record_text, const RunConfig& cfg);

}  // namespace rodbell::cli
