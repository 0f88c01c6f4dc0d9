#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rbc/evaluation.hpp"
#include "rbc/region.hpp"

namespace rbc {

/// Shortest text that reads back to the same double (%.17g).
std::string format_double(double v);

/// Outcome CSV with header
///   example_id,attack_name,target,success,l0,l2,linf,iterations,seed
/// `target` is empty for untargeted rows. When `verdicts` is non-empty it
/// replaces the success column (judged campaigns).
std::string outcomes_csv(std::span<const OutcomeRecord> records,
                         std::span<const std::uint8_t> verdicts = {});

/// Binary sidecar holding the adversarial vectors, little-endian:
///   "RBCA" | u32 version | u64 count | u32 dim | count * dim float64
std::vector<std::uint8_t> adversarial_sidecar(std::span<const OutcomeRecord> records);

/// Parses an outcome CSV and its sidecar back into records; true labels come
/// from `test`, noise is recomputed from the vectors and must match the CSV.
std::vector<OutcomeRecord> parse_outcomes(std::string_view csv,
                                          std::span<const std::uint8_t> sidecar,
                                          const Dataset& test);

void write_outcomes(const std::filesystem::path& csv_path,
                    const std::filesystem::path& sidecar_path,
                    std::span<const OutcomeRecord> records);
std::vector<OutcomeRecord> read_outcomes(const std::filesystem::path& csv_path,
                                         const std::filesystem::path& sidecar_path,
                                         const Dataset& test);

/// Report CSV with header
///   classifier,attack,targeted,parameter,value,n_examples,n_targets,successes,
///   success_rate,avg_l0,avg_l2,avg_linf,config_digest
/// Absent averages and values are empty cells.
std::string reports_csv(std::span<const EvalReport> reports);
std::vector<EvalReport> parse_reports(std::string_view csv);

/// classifier,accuracy
std::string accuracy_csv(std::span<const AccuracyRow> rows);

struct HistogramRow {
  std::size_t example_id = 0;
  VoteCounts votes;
  double r = 0.0;
  std::size_t m = 0;
  std::uint64_t seed = 0;
};

/// example_id,class,count,r,m,seed with one line per class.
std::string histogram_csv(std::span<const HistogramRow> rows);

/// Splits CSV text into rows of fields; the first row must equal `header`.
std::vector<std::vector<std::string>> parse_csv(std::string_view text, std::string_view header);

}  // namespace rbc
