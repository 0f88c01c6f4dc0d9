#include "rbc/records.hpp"

#include <charconv>
#include <cstdio>

#include "rbc/error.hpp"
#include "rbc/io.hpp"

namespace rbc {

namespace {

constexpr std::string_view kOutcomeHeader =
    "example_id,attack_name,target,success,l0,l2,linf,iterations,seed";
constexpr std::string_view kReportHeader =
    "classifier,attack,targeted,parameter,value,n_examples,n_targets,successes,success_rate,"
    "avg_l0,avg_l2,avg_linf,config_digest";
constexpr std::uint32_t kSidecarVersion = 1;

template <typename T>
T parse_number(const std::string& field, std::string_view what) {
  T value{};
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc{} || ptr != end)
    throw FormatError("bad " + std::string(what) + " field '" + field + "'");
  return value;
}

std::string optional_cell(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string{};
}

std::optional<double> parse_optional(const std::string& field, std::string_view what) {
  if (field.empty()) return std::nullopt;
  return parse_number<double>(field, what);
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text, std::string_view header) {
  std::vector<std::vector<std::string>> rows;
  bool first = true;
  while (!text.empty()) {
    const auto eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (first) {
      if (line != header)
        throw FormatError("unexpected CSV header '" + std::string(line) + "', expected '" +
                          std::string(header) + "'");
      first = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const auto comma = line.find(',', start);
      fields.emplace_back(line.substr(start, comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(fields));
  }
  if (first) throw FormatError("CSV text is empty");
  return rows;
}

std::string outcomes_csv(std::span<const OutcomeRecord> records,
                         std::span<const std::uint8_t> verdicts) {
  if (!verdicts.empty() && verdicts.size() != records.size())
    throw DimensionError("outcomes_csv: verdict count differs from record count");
  std::string out(kOutcomeHeader);
  out += '\n';
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const bool success = verdicts.empty() ? r.outcome.success : verdicts[i] != 0;
    out += std::to_string(r.example_id) + ',' + r.attack_name + ',' +
           (r.outcome.target ? std::to_string(*r.outcome.target) : std::string{}) + ',' +
           (success ? "1" : "0") + ',' + std::to_string(r.outcome.noise.l0) + ',' +
           format_double(r.outcome.noise.l2) + ',' + format_double(r.outcome.noise.linf) + ',' +
           std::to_string(r.outcome.iterations) + ',' + std::to_string(r.seed) + '\n';
  }
  return out;
}

std::vector<std::uint8_t> adversarial_sidecar(std::span<const OutcomeRecord> records) {
  ByteWriter w;
  w.raw("RBCA");
  w.u32(kSidecarVersion);
  w.u64(records.size());
  const std::size_t dim = records.empty() ? 0 : records.front().outcome.adversarial.size();
  w.u32(static_cast<std::uint32_t>(dim));
  for (const auto& r : records) {
    if (r.outcome.adversarial.size() != dim)
      throw DimensionError("adversarial vectors differ in length");
    for (const double v : r.outcome.adversarial) w.f64(v);
  }
  return {w.bytes().begin(), w.bytes().end()};
}

std::vector<OutcomeRecord> parse_outcomes(std::string_view csv,
                                          std::span<const std::uint8_t> sidecar,
                                          const Dataset& test) {
  const auto rows = parse_csv(csv, kOutcomeHeader);
  ByteReader in(sidecar);
  if (in.raw(4) != "RBCA") throw FormatError("adversarial sidecar: bad magic");
  const auto version = in.u32();
  if (version != kSidecarVersion)
    throw VersionError("adversarial sidecar version " + std::to_string(version) +
                       ", expected " + std::to_string(kSidecarVersion));
  const auto count = in.u64();
  const auto dim = in.u32();
  if (count != rows.size())
    throw FormatError("sidecar holds " + std::to_string(count) + " vectors, CSV has " +
                      std::to_string(rows.size()) + " rows");
  if (count > 0 && dim != test.feature_dim())
    throw DimensionError("sidecar dimension " + std::to_string(dim) + " differs from dataset");

  std::vector<OutcomeRecord> records;
  records.reserve(rows.size());
  for (const auto& f : rows) {
    if (f.size() != 9) throw FormatError("outcome row needs 9 fields");
    OutcomeRecord r;
    r.example_id = parse_number<std::size_t>(f[0], "example_id");
    if (r.example_id >= test.size()) throw RangeError("outcome example_id outside the test set");
    r.attack_name = f[1];
    r.true_label = test[r.example_id].label;
    if (!f[2].empty()) r.outcome.target = parse_number<std::size_t>(f[2], "target");
    if (f[3] != "0" && f[3] != "1") throw FormatError("bad success field '" + f[3] + "'");
    r.outcome.success = f[3] == "1";
    r.outcome.iterations = parse_number<std::size_t>(f[7], "iterations");
    r.seed = parse_number<std::uint64_t>(f[8], "seed");
    r.outcome.adversarial.resize(dim);
    for (auto& v : r.outcome.adversarial) v = in.f64();
    r.outcome.noise = noise_of(test[r.example_id].features, r.outcome.adversarial);
    if (r.outcome.noise.l0 != parse_number<std::size_t>(f[4], "l0") ||
        r.outcome.noise.l2 != parse_number<double>(f[5], "l2") ||
        r.outcome.noise.linf != parse_number<double>(f[6], "linf"))
      throw FormatError("outcome row for example " + f[0] +
                        " does not match its adversarial vector");
    records.push_back(std::move(r));
  }
  if (in.remaining() != 0) throw LengthError("adversarial sidecar has trailing bytes");
  return records;
}

void write_outcomes(const std::filesystem::path& csv_path,
                    const std::filesystem::path& sidecar_path,
                    std::span<const OutcomeRecord> records) {
  write_file_atomic(sidecar_path, adversarial_sidecar(records));
  write_file_atomic(csv_path, outcomes_csv(records));
}

std::vector<OutcomeRecord> read_outcomes(const std::filesystem::path& csv_path,
                                         const std::filesystem::path& sidecar_path,
                                         const Dataset& test) {
  const auto csv = read_file_bytes(csv_path);
  const auto sidecar = read_file_bytes(sidecar_path);
  return parse_outcomes(std::string_view(reinterpret_cast<const char*>(csv.data()), csv.size()),
                        sidecar, test);
}

std::string reports_csv(std::span<const EvalReport> reports) {
  std::string out(kReportHeader);
  out += '\n';
  for (const auto& r : reports) {
    out += r.classifier_name + ',' + r.attack_name + ',' + (r.targeted ? "1" : "0") + ',' +
           r.parameter + ',' + optional_cell(r.value) + ',' + std::to_string(r.n_examples) + ',' +
           std::to_string(r.n_targets) + ',' + std::to_string(r.successes) + ',' +
           format_double(r.success_rate) + ',' + optional_cell(r.avg_l0) + ',' +
           optional_cell(r.avg_l2) + ',' + optional_cell(r.avg_linf) + ',' + r.config_digest +
           '\n';
  }
  return out;
}

std::vector<EvalReport> parse_reports(std::string_view csv) {
  std::vector<EvalReport> reports;
  for (const auto& f : parse_csv(csv, kReportHeader)) {
    if (f.size() != 13) throw FormatError("report row needs 13 fields");
    EvalReport r;
    r.classifier_name = f[0];
    r.attack_name = f[1];
    r.targeted = f[2] == "1";
    r.parameter = f[3];
    r.value = parse_optional(f[4], "value");
    r.n_examples = parse_number<std::size_t>(f[5], "n_examples");
    r.n_targets = parse_number<std::size_t>(f[6], "n_targets");
    r.successes = parse_number<std::size_t>(f[7], "successes");
    r.success_rate = parse_number<double>(f[8], "success_rate");
    r.avg_l0 = parse_optional(f[9], "avg_l0");
    r.avg_l2 = parse_optional(f[10], "avg_l2");
    r.avg_linf = parse_optional(f[11], "avg_linf");
    r.config_digest = f[12];
    reports.push_back(std::move(r));
  }
  return reports;
}

std::string accuracy_csv(std::span<const AccuracyRow> rows) {
  std::string out = "classifier,accuracy\n";
  for (const auto& r : rows) out += r.classifier_name + ',' + format_double(r.accuracy) + '\n';
  return out;
}

std::string histogram_csv(std::span<const HistogramRow> rows) {
  std::string out = "example_id,class,count,r,m,seed\n";
  for (const auto& row : rows)
    for (std::size_t c = 0; c < row.votes.counts.size(); ++c)
      out += std::to_string(row.example_id) + ',' + std::to_string(c) + ',' +
             std::to_string(row.votes.counts[c]) + ',' + format_double(row.r) + ',' +
             std::to_string(row.m) + ',' + std::to_string(row.seed) + '\n';
  return out;
}

}  // namespace rbc
