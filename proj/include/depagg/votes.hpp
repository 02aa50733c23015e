#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace depagg {

/// Binary vote matrix for n items and K judges, plus optional gold labels.
///
/// Entries are exactly 0 or 1; missing votes are not representable. The
/// matrix is immutable after construction and safe to share read-only.
class VoteMatrix {
 public:
  using Storage = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  /// Throws std::invalid_argument when any invariant fails. Empty
  /// `judge_names` / `item_ids` are filled with j1..jK / 0..n-1.
  VoteMatrix(Storage votes, std::vector<std::string> item_ids = {},
             std::vector<std::string> judge_names = {},
             std::optional<std::vector<int>> gold = std::nullopt);

  [[nodiscard]] int n() const noexcept { return static_cast<int>(votes_.rows()); }
  [[nodiscard]] int K() const noexcept { return static_cast<int>(votes_.cols()); }
  [[nodiscard]] int operator()(int i, int j) const noexcept { return votes_(i, j); }

  [[nodiscard]] const Storage& votes() const noexcept { return votes_; }
  /// Votes as a dense double matrix (n x K), for linear algebra.
  [[nodiscard]] Eigen::MatrixXd as_real() const { return votes_.cast<double>(); }
  /// Row i as a 0/1 int vector.
  [[nodiscard]] std::vector<int> row(int i) const;

  [[nodiscard]] const std::vector<std::string>& item_ids() const noexcept { return item_ids_; }
  [[nodiscard]] const std::vector<std::string>& judge_names() const noexcept { return judge_names_; }
  [[nodiscard]] bool has_gold() const noexcept { return gold_.has_value(); }
  /// Throws std::logic_error when no gold labels are attached.
  [[nodiscard]] const std::vector<int>& gold() const;

  /// Sub-matrix restricted to the given rows (in order).
  [[nodiscard]] VoteMatrix select_items(std::span<const int> rows) const;
  /// Sub-matrix restricted to the given judge columns (in order).
  [[nodiscard]] VoteMatrix select_judges(std::span<const int> cols) const;
  /// Every vote inverted; gold labels inverted too.
  [[nodiscard]] VoteMatrix flipped() const;

  friend bool operator==(const VoteMatrix& a, const VoteMatrix& b);

 private:
  Storage votes_;
  std::vector<std::string> item_ids_;
  std::vector<std::string> judge_names_;
  std::optional<std::vector<int>> gold_;
};

/// Per-item posterior Pr(Y=1 | votes) and thresholded labels.
struct PosteriorVector {
  std::vector<double> gamma;
  std::vector<int> hard_labels;

  /// Labels are 1 exactly when gamma >= 1/2.
  static PosteriorVector from_gamma(std::vector<double> gamma);
};

/// Raised for malformed vote CSV input; message names row and column.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, int row, int column);
  [[nodiscard]] int row() const noexcept { return row_; }
  [[nodiscard]] int column() const noexcept { return column_; }

 private:
  int row_;
  int column_;
};

/// CSV schema: header `item,<judge>*K[,label]`, one row per item, 0/1 cells.
/// Rows and columns in errors are 1-based; the header is row 1.
VoteMatrix read_votes(std::istream& in);
VoteMatrix load_votes(const std::filesystem::path& path);
void write_votes(std::ostream& out, const VoteMatrix& v);
void save_votes(const std::filesystem::path& path, const VoteMatrix& v);

void write_posteriors(std::ostream& out, const VoteMatrix& v, const PosteriorVector& post);

struct SplitSpec {
  double train_fraction = 0.15;
  std::uint64_t seed = 0;
};

/// Number of training items: max(1, floor(train_fraction * n)).
int train_size(int n, double train_fraction);

/// Seeded shuffle into (train, test). Requires n >= 2 and 0 < fraction < 1.
std::pair<VoteMatrix, VoteMatrix> split(const VoteMatrix& v, const SplitSpec& spec);
/// Row indices used by `split`, train first.
std::pair<std::vector<int>, std::vector<int>> split_indices(int n, const SplitSpec& spec);

/// Fraction of agreeing positions. Throws on length mismatch or empty input.
double accuracy(std::span<const int> pred, std::span<const int> gold);

}  // namespace depagg
