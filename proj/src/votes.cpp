#include "depagg/votes.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include "depagg/rng.hpp"

namespace depagg {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

void strip_cr(std::string& s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
}

int parse_bit(const std::string& cell, int row, int col) {
  if (cell == "0") return 0;
  if (cell == "1") return 1;
  throw ParseError("non-binary cell '" + cell + "'", row, col);
}

}  // namespace

VoteMatrix::VoteMatrix(Storage votes, std::vector<std::string> item_ids,
                       std::vector<std::string> judge_names,
                       std::optional<std::vector<int>> gold)
    : votes_(std::move(votes)),
      item_ids_(std::move(item_ids)),
      judge_names_(std::move(judge_names)),
      gold_(std::move(gold)) {
  if (votes_.rows() < 1 || votes_.cols() < 1)
    throw std::invalid_argument("VoteMatrix needs n >= 1 and K >= 1");
  if ((votes_.array() > 1).any())
    throw std::invalid_argument("VoteMatrix entries must be 0 or 1");
  if (item_ids_.empty()) {
    item_ids_.reserve(static_cast<std::size_t>(n()));
    for (int i = 0; i < n(); ++i) item_ids_.push_back(std::to_string(i));
  }
  if (judge_names_.empty()) {
    for (int j = 0; j < K(); ++j) judge_names_.push_back("j" + std::to_string(j + 1));
  }
  if (static_cast<int>(item_ids_.size()) != n())
    throw std::invalid_argument("item_ids length must equal n");
  if (static_cast<int>(judge_names_.size()) != K())
    throw std::invalid_argument("judge_names length must equal K");
  if (gold_) {
    if (static_cast<int>(gold_->size()) != n())
      throw std::invalid_argument("gold_labels length must equal n");
    for (int g : *gold_)
      if (g != 0 && g != 1) throw std::invalid_argument("gold labels must be 0 or 1");
  }
}

std::vector<int> VoteMatrix::row(int i) const {
  std::vector<int> out(static_cast<std::size_t>(K()));
  for (int j = 0; j < K(); ++j) out[static_cast<std::size_t>(j)] = votes_(i, j);
  return out;
}

const std::vector<int>& VoteMatrix::gold() const {
  if (!gold_) throw std::logic_error("vote matrix has no gold labels");
  return *gold_;
}

VoteMatrix VoteMatrix::select_items(std::span<const int> rows) const {
  Storage out(static_cast<Eigen::Index>(rows.size()), votes_.cols());
  std::vector<std::string> ids;
  std::optional<std::vector<int>> g;
  if (gold_) g.emplace();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = votes_.row(rows[r]);
    ids.push_back(item_ids_[static_cast<std::size_t>(rows[r])]);
    if (gold_) g->push_back((*gold_)[static_cast<std::size_t>(rows[r])]);
  }
  return VoteMatrix(std::move(out), std::move(ids), judge_names_, std::move(g));
}

VoteMatrix VoteMatrix::select_judges(std::span<const int> cols) const {
  Storage out(votes_.rows(), static_cast<Eigen::Index>(cols.size()));
  std::vector<std::string> names;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    out.col(static_cast<Eigen::Index>(c)) = votes_.col(cols[c]);
    names.push_back(judge_names_[static_cast<std::size_t>(cols[c])]);
  }
  return VoteMatrix(std::move(out), item_ids_, std::move(names), gold_);
}

VoteMatrix VoteMatrix::flipped() const {
  Storage out = (1 - votes_.array()).matrix();
  std::optional<std::vector<int>> g;
  if (gold_) {
    g.emplace();
    for (int y : *gold_) g->push_back(1 - y);
  }
  return VoteMatrix(std::move(out), item_ids_, judge_names_, std::move(g));
}

bool operator==(const VoteMatrix& a, const VoteMatrix& b) {
  return a.votes_.rows() == b.votes_.rows() && a.votes_.cols() == b.votes_.cols() &&
         a.votes_ == b.votes_ && a.item_ids_ == b.item_ids_ &&
         a.judge_names_ == b.judge_names_ && a.gold_ == b.gold_;
}

PosteriorVector PosteriorVector::from_gamma(std::vector<double> gamma) {
  PosteriorVector p;
  p.hard_labels.reserve(gamma.size());
  for (double g : gamma) p.hard_labels.push_back(g >= 0.5 ? 1 : 0);
  p.gamma = std::move(gamma);
  return p;
}

ParseError::ParseError(const std::string& what, int row, int column)
    : std::runtime_error("parse error at row " + std::to_string(row) + ", column " +
                         std::to_string(column) + ": " + what),
      row_(row),
      column_(column) {}

VoteMatrix read_votes(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file", 1, 1);
  strip_cr(line);
  auto header = split_csv_line(line);
  if (header.size() < 2) throw ParseError("header needs an item column and at least one judge", 1, 1);
  const bool has_label = header.back() == "label";
  const int n_judges = static_cast<int>(header.size()) - 1 - (has_label ? 1 : 0);
  if (n_judges < 1) throw ParseError("no judge columns", 1, 1);
  std::vector<std::string> judges(header.begin() + 1, header.begin() + 1 + n_judges);

  std::vector<std::string> ids;
  std::vector<std::uint8_t> cells;
  std::vector<int> gold;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    strip_cr(line);
    if (line.empty()) continue;
    auto parts = split_csv_line(line);
    if (parts.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " cells, found " +
                           std::to_string(parts.size()),
                       row, static_cast<int>(std::min(parts.size(), header.size())) + 1);
    ids.push_back(parts[0]);
    for (int j = 0; j < n_judges; ++j)
      cells.push_back(static_cast<std::uint8_t>(parse_bit(parts[static_cast<std::size_t>(j) + 1], row, j + 2)));
    if (has_label) gold.push_back(parse_bit(parts.back(), row, n_judges + 2));
  }
  if (ids.empty()) throw ParseError("no data rows", row, 1);

  VoteMatrix::Storage votes(static_cast<Eigen::Index>(ids.size()), n_judges);
  std::copy(cells.begin(), cells.end(), votes.data());
  std::optional<std::vector<int>> g;
  if (has_label) g = std::move(gold);
  return VoteMatrix(std::move(votes), std::move(ids), std::move(judges), std::move(g));
}

VoteMatrix load_votes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_votes(in);
}

void write_votes(std::ostream& out, const VoteMatrix& v) {
  out << "item";
  for (const auto& name : v.judge_names()) out << ',' << name;
  if (v.has_gold()) out << ",label";
  out << '\n';
  for (int i = 0; i < v.n(); ++i) {
    out << v.item_ids()[static_cast<std::size_t>(i)];
    for (int j = 0; j < v.K(); ++j) out << ',' << v(i, j);
    if (v.has_gold()) out << ',' << v.gold()[static_cast<std::size_t>(i)];
    out << '\n';
  }
}

void save_votes(const std::filesystem::path& path, const VoteMatrix& v) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_votes(out, v);
}

void write_posteriors(std::ostream& out, const VoteMatrix& v, const PosteriorVector& post) {
  out << "item,gamma,label\n";
  char buf[32];
  for (int i = 0; i < v.n(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    std::snprintf(buf, sizeof buf, "%.17g", post.gamma[k]);
    out << v.item_ids()[k] << ',' << buf << ',' << post.hard_labels[k] << '\n';
  }
}

int train_size(int n, double train_fraction) {
  return std::max(1, static_cast<int>(std::floor(train_fraction * n)));
}

std::pair<std::vector<int>, std::vector<int>> split_indices(int n, const SplitSpec& spec) {
  if (n < 2) throw std::invalid_argument("split needs at least 2 items");
  if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0))
    throw std::invalid_argument("train_fraction must lie in (0, 1)");
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(derive_seed(spec.seed, {0x5b117ULL}));
  for (int i = n - 1; i > 0; --i) {
    const auto j = static_cast<int>(rng.below(static_cast<std::uint64_t>(i) + 1));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  const int m = std::min(train_size(n, spec.train_fraction), n - 1);
  std::vector<int> train(idx.begin(), idx.begin() + m);
  std::vector<int> test(idx.begin() + m, idx.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {std::move(train), std::move(test)};
}

std::pair<VoteMatrix, VoteMatrix> split(const VoteMatrix& v, const SplitSpec& spec) {
  auto [train, test] = split_indices(v.n(), spec);
  return {v.select_items(train), v.select_items(test)};
}

double accuracy(std::span<const int> pred, std::span<const int> gold) {
  if (pred.size() != gold.size()) throw std::invalid_argument("accuracy: length mismatch");
  if (pred.empty()) throw std::invalid_argument("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == gold[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

}  // namespace depagg
