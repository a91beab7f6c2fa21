#include "records.hpp"

#include <cmath>
#include <sstream>

#include "json.hpp"

namespace rodbell::cli {
namespace {

std::string csv_text(const Field& f) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) return format_number(v);
        else if constexpr (std::is_same_v<T, bool>) return v ? "true" : "false";
        else if constexpr (std::is_same_v<T, std::string>) return v;
        else return std::to_string(v);
      },
      f);
}

nlohmann::ordered_json json_value(const Field& f) {
  return std::visit(
      [](const auto& v) -> nlohmann::ordered_json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, double>) {
          if (!std::isfinite(v)) return nullptr;
          return v;
        } else {
          return v;
        }
      },
      f);
}

constexpr std::string_view kHashTag = "config_hash=";

}  // namespace

RecordWriter::RecordWriter(std::ostream& os, OutputFormat format,
                           std::vector<std::string> columns, std::string hash)
    : os_(os), format_(format), columns_(std::move(columns)), hash_(std::move(hash)) {
  if (format_ == OutputFormat::Csv) {
    os_ << "# rodbell " << kVersion << ' ' << kHashTag << hash_ << '\n';
    for (std::size_t i = 0; i < columns_.size(); ++i) os_ << (i ? "," : "") << columns_[i];
    os_ << '\n';
  }
}

void RecordWriter::row(const std::vector<Field>& fields) {
  if (format_ == OutputFormat::Csv) {
    for (std::size_t i = 0; i < fields.size(); ++i) os_ << (i ? "," : "") << csv_text(fields[i]);
    os_ << '\n';
    return;
  }
  nlohmann::ordered_json obj;
  for (std::size_t i = 0; i < fields.size(); ++i) obj[columns_[i]] = json_value(fields[i]);
  obj["tool_version"] = kVersion;
  obj["config_hash"] = hash_;
  os_ << obj.dump() << '\n';
}

std::string embedded_hash(const std::string& record_text) {
  std::istringstream in(record_text);
  std::string line, found;
  while (std::getline(in, line)) {
    std::string h;
    if (line.starts_with("#")) {
      const auto pos = line.find(kHashTag);
      if (pos == std::string::npos) continue;
      h = line.substr(pos + kHashTag.size());
    } else if (line.starts_with("{")) {
      const auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded() || !j.contains("config_hash")) return "";
      h = j["config_hash"].get<std::string>();
    } else {
      continue;
    }
    if (!found.empty() && h != found) return "";
    found = h;
  }
  return found;
}

bool record_hash_matches(const std::string& record_text, const RunConfig& cfg) {
  const auto h = embedded_hash(record_text);
  return !h.empty() && h == config_hash(cfg);
}

}  // namespace rodbell::cli
