#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "grass/dataset.hpp"

namespace grass {

struct QuartileStats {
  double lower = 0.0;  // t* range covered, inclusive upper bound
  double upper = 0.0;
  std::size_t count = 0;
  double avg_runtime = 0.0;
  double avg_best = 0.0;
  double accuracy = 0.0;
};

struct EvaluationReport {
  std::size_t num_instances = 0;
  double cutoff = 500.0;
  double avg_runtime = 0.0;
  double solved_pct = 0.0;
  double accuracy = 0.0;
  // Mean (t_selected - t*) over instances where a non-optimal solver was
  // picked; 0 with cost_of_wrong_empty set when there are none.
  double cost_of_wrong = 0.0;
  bool cost_of_wrong_empty = true;
  std::size_t wrong_count = 0;
  double mean_best = 0.0;
  // Grouped by t* at its 25/50/75% empirical percentiles (linear interpolation).
  std::array<QuartileStats, 4> quartiles{};
};

/// `selections[i]` is the solver picked for `records[i]`. Results do not
/// depend on record order. Throws MissingSelection on length mismatch or an
/// out-of-range solver index.
EvaluationReport evaluate(std::span<const std::size_t> selections,
                          std::span<const RuntimeRecord> records, double cutoff = 500.0);

struct SelectionRow {
  std::string instance_id;
  std::size_t selected = 0;
  double t_selected = 0.0;
  double t_star = 0.0;
};

std::vector<SelectionRow> make_selection_rows(std::span<const std::size_t> selections,
                                              std::span<const RuntimeRecord> records);
/// CSV `instance_id,selected,t_selected,t_star`.
void write_selections(const std::vector<SelectionRow>& rows, const std::string& path);
std::vector<SelectionRow> read_selections(const std::string& path);

/// Matches selection rows to manifest records by instance id; only selected
/// records are returned. Unknown ids raise MissingSelection.
struct MatchedSelections {
  std::vector<std::size_t> selections;
  std::vector<RuntimeRecord> records;
};
MatchedSelections match_selections(const std::vector<SelectionRow>& rows,
                                   const LabeledDataset& ds);

std::string report_csv(const EvaluationReport& r);
std::string report_table(const EvaluationReport& r, const std::string& title);

/// Empirical percentile (0..100) with linear interpolation on sorted data.
double percentile(std::span<const double> sorted, double pct);

}  // namespace grass
