#include "grass/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "grass/error.hpp"
#include "grass/textio.hpp"

namespace grass {

RuntimeRecord RuntimeRecord::make(std::string id, std::vector<double> runtimes) {
  if (runtimes.empty()) {
    throw Error(ErrorCode::MissingRuntimes, "no runtimes for instance '" + id + "'");
  }
  for (const double t : runtimes) {
    if (!std::isfinite(t) || t <= 0.0) {
      throw Error(ErrorCode::MissingRuntimes,
                  "runtime for instance '" + id + "' must be positive and finite");
    }
  }
  RuntimeRecord r;
  r.instance_id = std::move(id);
  r.runtimes = std::move(runtimes);
  r.best_solver = static_cast<std::size_t>(
      std::min_element(r.runtimes.begin(), r.runtimes.end()) - r.runtimes.begin());
  r.best_time = r.runtimes[r.best_solver];
  return r;
}

void LabeledDataset::assign_folds() {
  if (num_folds == 0) throw Error(ErrorCode::InvalidArgument, "fold count must be positive");
  folds.assign(records.size(), 0);
  std::vector<std::vector<std::size_t>> by_label(std::max<std::size_t>(1, num_solvers()));
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto label = records[i].best_solver;
    if (label >= by_label.size()) by_label.resize(label + 1);
    by_label[label].push_back(i);
  }
  std::mt19937_64 rng(fold_seed);
  std::size_t next = 0;
  for (auto& group : by_label) {
    std::shuffle(group.begin(), group.end(), rng);
    for (const auto i : group) folds[i] = next++ % num_folds;
  }
}

std::vector<std::size_t> LabeledDataset::test_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  if (fold == kAllFolds) return out;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (folds.at(i) == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> LabeledDataset::train_indices(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (fold == kAllFolds || folds.at(i) != fold) out.push_back(i);
  return out;
}

std::string LabeledDataset::resolve_path(std::size_t i) const {
  const std::filesystem::path p(paths.at(i));
  if (p.is_absolute() || base_dir.empty()) return p.string();
  return (std::filesystem::path(base_dir) / p).string();
}

std::string sidecar_path(const std::string& manifest_path) { return manifest_path + ".meta"; }

LabeledDataset load_manifest(const std::string& manifest_path) {
  LabeledDataset ds;
  ds.base_dir = std::filesystem::path(manifest_path).parent_path().string();

  const auto meta = KeyValueConfig::load(sidecar_path(manifest_path));
  ds.cutoff = meta.get_double("cutoff");
  ds.solver_names = split(meta.get("solvers"), ',');
  ds.num_folds = static_cast<std::size_t>(meta.get_int_or("folds", 5));
  ds.fold_seed = static_cast<std::uint64_t>(meta.get_int_or("fold_seed", 0));
  if (!(ds.cutoff > 0.0)) throw Error(ErrorCode::InvalidArgument, "cutoff must be positive");

  const std::string text = read_file(manifest_path);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::InvalidArgument, manifest_path + ": empty manifest");
  }
  const auto header = split(trim(line), ',');
  const std::size_t k = ds.solver_names.size();
  if (header.size() != k + 2 || header[0] != "instance_id" || header[1] != "path") {
    throw Error(ErrorCode::InvalidArgument,
                manifest_path + ": header must be instance_id,path,t_1..t_" + std::to_string(k));
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cols = split(trim(line), ',');
    if (cols.size() != k + 2) {
      throw Error(ErrorCode::MissingRuntimes, manifest_path + ":" + std::to_string(line_no) +
                                                  ": expected " + std::to_string(k) + " runtimes");
    }
    std::vector<double> t;
    for (std::size_t j = 0; j < k; ++j) {
      if (cols[j + 2].empty()) {
        throw Error(ErrorCode::MissingRuntimes,
                    manifest_path + ":" + std::to_string(line_no) + ": missing runtime");
      }
      t.push_back(parse_double(cols[j + 2], manifest_path + ":" + std::to_string(line_no)));
    }
    ds.records.push_back(RuntimeRecord::make(cols[0], std::move(t)));
    ds.paths.push_back(cols[1]);
  }
  ds.assign_folds();
  return ds;
}

void save_manifest(const LabeledDataset& ds, const std::string& manifest_path) {
  std::string out = "instance_id,path";
  for (std::size_t k = 0; k < ds.num_solvers(); ++k) out += ",t_" + std::to_string(k + 1);
  out += '\n';
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& r = ds.records[i];
    out += r.instance_id + ',' + ds.paths.at(i);
    for (const double t : r.runtimes) out += ',' + format_double(t);
    out += '\n';
  }
  write_file(manifest_path, out);

  KeyValueConfig meta;
  std::string names;
  for (std::size_t k = 0; k < ds.solver_names.size(); ++k) {
    if (k) names += ',';
    names += ds.solver_names[k];
  }
  meta.set("cutoff", format_double(ds.cutoff));
  meta.set("solvers", names);
  meta.set("folds", std::to_string(ds.num_folds));
  meta.set("fold_seed", std::to_string(ds.fold_seed));
  write_file(sidecar_path(manifest_path), "# grass dataset sidecar\n" + meta.to_string());
}

}  // namespace grass
