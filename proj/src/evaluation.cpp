#include "grass/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "grass/error.hpp"
#include "grass/textio.hpp"

namespace grass {

namespace {

double sorted_mean(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

double percentile(std::span<const double> sorted, double pct) {
  if (sorted.empty()) return 0.0;
  const double pos = pct / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

EvaluationReport evaluate(std::span<const std::size_t> selections,
                          std::span<const RuntimeRecord> records, double cutoff) {
  if (selections.size() != records.size()) {
    throw Error(ErrorCode::MissingSelection,
                std::to_string(records.size()) + " records but " +
                    std::to_string(selections.size()) + " selections");
  }
  EvaluationReport rep;
  rep.num_instances = records.size();
  rep.cutoff = cutoff;
  if (records.empty()) return rep;

  std::vector<double> chosen, best, wrong_cost;
  std::size_t solved = 0, correct = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (selections[i] >= r.runtimes.size()) {
      throw Error(ErrorCode::MissingSelection,
                  "selection out of range for instance '" + r.instance_id + "'");
    }
    const double t = r.runtimes[selections[i]];
    chosen.push_back(t);
    best.push_back(r.best_time);
    if (t <= cutoff) ++solved;
    if (r.is_optimal(selections[i])) {
      ++correct;
    } else {
      wrong_cost.push_back(t - r.best_time);
    }
  }
  const double n = static_cast<double>(records.size());
  rep.avg_runtime = sorted_mean(chosen);
  rep.mean_best = sorted_mean(best);
  rep.solved_pct = 100.0 * static_cast<double>(solved) / n;
  rep.accuracy = static_cast<double>(correct) / n;
  rep.wrong_count = wrong_cost.size();
  rep.cost_of_wrong_empty = wrong_cost.empty();
  rep.cost_of_wrong = sorted_mean(wrong_cost);

  std::vector<double> sorted_best = best;
  std::sort(sorted_best.begin(), sorted_best.end());
  const std::array<double, 3> cuts = {percentile(sorted_best, 25.0), percentile(sorted_best, 50.0),
                                      percentile(sorted_best, 75.0)};
  std::array<std::vector<double>, 4> q_runtime, q_best;
  std::array<std::size_t, 4> q_correct{};
  for (std::size_t i = 0; i < records.size(); ++i) {
    std::size_t q = 0;
    while (q < 3 && best[i] > cuts[q]) ++q;
    q_runtime[q].push_back(chosen[i]);
    q_best[q].push_back(best[i]);
    if (records[i].is_optimal(selections[i])) ++q_correct[q];
  }
  for (std::size_t q = 0; q < 4; ++q) {
    auto& s = rep.quartiles[q];
    s.lower = q == 0 ? sorted_best.front() : cuts[q - 1];
    s.upper = q == 3 ? sorted_best.back() : cuts[q];
    s.count = q_runtime[q].size();
    s.avg_runtime = sorted_mean(q_runtime[q]);
    s.avg_best = sorted_mean(q_best[q]);
    s.accuracy = s.count ? static_cast<double>(q_correct[q]) / static_cast<double>(s.count) : 0.0;
  }
  return rep;
}

std::vector<SelectionRow> make_selection_rows(std::span<const std::size_t> selections,
                                              std::span<const RuntimeRecord> records) {
  if (selections.size() != records.size()) {
    throw Error(ErrorCode::MissingSelection, "selections and records differ in length");
  }
  std::vector<SelectionRow> rows;
  rows.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    rows.push_back({records[i].instance_id, selections[i], records[i].runtimes.at(selections[i]),
                    records[i].best_time});
  }
  return rows;
}

void write_selections(const std::vector<SelectionRow>& rows, const std::string& path) {
  std::string out = "instance_id,selected,t_selected,t_star\n";
  for (const auto& r : rows) {
    out += r.instance_id + ',' + std::to_string(r.selected) + ',' + format_double(r.t_selected) +
           ',' + format_double(r.t_star) + '\n';
  }
  write_file(path, out);
}

std::vector<SelectionRow> read_selections(const std::string& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || trim(line) != "instance_id,selected,t_selected,t_star") {
    throw Error(ErrorCode::InvalidArgument,
                path + ": expected header instance_id,selected,t_selected,t_star");
  }
  std::vector<SelectionRow> rows;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto cols = split(trim(line), ',');
    if (cols.size() != 4) throw Error(ErrorCode::InvalidArgument, path + ": malformed row");
    SelectionRow r;
    r.instance_id = cols[0];
    const auto sel = parse_int(cols[1], path + " selected");
    if (sel < 0) throw Error(ErrorCode::InvalidArgument, path + ": negative solver index");
    r.selected = static_cast<std::size_t>(sel);
    r.t_selected = parse_double(cols[2], path + " t_selected");
    r.t_star = parse_double(cols[3], path + " t_star");
    rows.push_back(std::move(r));
  }
  return rows;
}

MatchedSelections match_selections(const std::vector<SelectionRow>& rows,
                                   const LabeledDataset& ds) {
  std::unordered_map<std::string, std::size_t> by_id;
  for (const auto& r : rows) by_id[r.instance_id] = r.selected;
  MatchedSelections out;
  // Only manifest instances that were selected for are evaluated; a selection
  // file for one fold evaluates that fold.
  for (const auto& rec : ds.records) {
    const auto it = by_id.find(rec.instance_id);
    if (it == by_id.end()) continue;
    out.selections.push_back(it->second);
    out.records.push_back(rec);
  }
  if (out.records.size() != by_id.size()) {
    throw Error(ErrorCode::MissingSelection,
                "selections reference instances missing from the manifest");
  }
  if (out.records.empty()) throw Error(ErrorCode::MissingSelection, "no selections to evaluate");
  return out;
}

std::string report_csv(const EvaluationReport& r) {
  std::string out =
      "n,cutoff,avg_runtime,solved_pct,accuracy,cost_of_wrong,wrong_count,cost_of_wrong_empty,"
      "mean_best";
  for (int q = 1; q <= 4; ++q) {
    const auto s = std::to_string(q);
    out += ",q" + s + "_upper,q" + s + "_count,q" + s + "_avg_runtime,q" + s + "_avg_best";
  }
  out += '\n';
  out += std::to_string(r.num_instances) + ',' + format_double(r.cutoff) + ',' +
         format_double(r.avg_runtime) + ',' + format_double(r.solved_pct) + ',' +
         format_double(r.accuracy) + ',' + format_double(r.cost_of_wrong) + ',' +
         std::to_string(r.wrong_count) + ',' + (r.cost_of_wrong_empty ? "1" : "0") + ',' +
         format_double(r.mean_best);
  for (const auto& q : r.quartiles) {
    out += ',' + format_double(q.upper) + ',' + std::to_string(q.count) + ',' +
           format_double(q.avg_runtime) + ',' + format_double(q.avg_best);
  }
  out += '\n';
  return out;
}

std::string report_table(const EvaluationReport& r, const std::string& title) {
  char buf[256];
  std::string out = title + "\n";
  std::snprintf(buf, sizeof buf,
                "  instances        %zu\n  avg runtime      %.3f s\n  solved (<=%.0fs)  %.2f %%\n"
                "  accuracy         %.4f\n  cost of wrong    %.3f s (%zu mispredicted)\n"
                "  oracle runtime   %.3f s\n",
                r.num_instances, r.avg_runtime, r.cutoff, r.solved_pct, r.accuracy,
                r.cost_of_wrong, r.wrong_count, r.mean_best);
  out += buf;
  out += "  best-runtime quartile   range                 n      avg runtime   oracle\n";
  for (std::size_t q = 0; q < 4; ++q) {
    const auto& s = r.quartiles[q];
    std::snprintf(buf, sizeof buf, "  Q%zu                      [%9.3f, %9.3f]  %5zu  %11.3f  %9.3f\n",
                  q + 1, s.lower, s.upper, s.count, s.avg_runtime, s.avg_best);
    out += buf;
  }
  return out;
}

}  // namespace grass
