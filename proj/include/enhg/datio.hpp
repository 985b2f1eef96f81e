#pragma once

// Sample matrices, label vectors, file loaders, normalization, synthetic
// generators and corruption for robustness experiments.

#include <Eigen/Dense>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "enhg/error.hpp"

namespace enhg {

using Index = Eigen::Index;

/// d x n matrix whose columns are samples. Entries are finite, d >= 1, n >= 2.
class SampleMatrix {
 public:
  SampleMatrix() = default;

  explicit SampleMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
    if (values_.rows() < 1 || values_.cols() < 2) {
      throw InvalidArgument("sample matrix needs d >= 1 and n >= 2, got " +
                            std::to_string(values_.rows()) + "x" +
                            std::to_string(values_.cols()));
    }
    if (!values_.allFinite()) {
      throw InvalidArgument("sample matrix contains non-finite entries");
    }
  }

  Index dim() const { return values_.rows(); }
  Index count() const { return values_.cols(); }
  const Eigen::MatrixXd& values() const { return values_; }
  auto sample(Index i) const { return values_.col(i); }

 private:
  Eigen::MatrixXd values_;
};

/// Class id per sample plus a known/unknown mask. Entries with mask false
/// carry no information.
struct LabelVector {
  std::vector<int> labels;
  std::vector<bool> known;

  LabelVector() = default;
  explicit LabelVector(std::vector<int> l)
      : labels(std::move(l)), known(labels.size(), true) {}
  LabelVector(std::vector<int> l, std::vector<bool> k) : labels(std::move(l)), known(std::move(k)) {
    if (labels.size() != known.size()) {
      throw InvalidArgument("label and mask lengths differ");
    }
  }

  std::size_t size() const { return labels.size(); }

  bool fully_known() const {
    return std::all_of(known.begin(), known.end(), [](bool b) { return b; });
  }

  /// One past the largest known label (0 when nothing is known).
  int num_classes() const {
    int c = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (known[i]) c = std::max(c, labels[i] + 1);
    }
    return c;
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::optional<double> parse_double(std::string_view field) {
  field = trim(field);
  if (field.empty()) return std::nullopt;
  if (field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

inline std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

inline std::vector<unsigned char> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct IdxPayload {
  std::vector<std::uint32_t> dims;
  std::vector<unsigned char> data;
};

inline IdxPayload parse_idx(const std::vector<unsigned char>& bytes, const std::string& what) {
  if (bytes.size() < 4) throw IoError(what + ": file too short for IDX header");
  if (bytes[0] != 0 || bytes[1] != 0) throw IoError(what + ": bad IDX magic number");
  if (bytes[2] != 0x08) throw IoError(what + ": bad IDX magic number (only unsigned byte data supported)");
  const std::size_t ndims = bytes[3];
  if (ndims == 0) throw IoError(what + ": bad IDX magic number (zero dimensions)");
  const std::size_t header = 4 + 4 * ndims;
  if (bytes.size() < header) throw IoError(what + ": size mismatch, truncated IDX dimension header");

  IdxPayload out;
  std::size_t expected = 1;
  for (std::size_t k = 0; k < ndims; ++k) {
    out.dims.push_back(read_be32(bytes, 4 + 4 * k));
    expected *= out.dims.back();
  }
  const std::size_t actual = bytes.size() - header;
  if (actual != expected) {
    throw IoError(what + ": size mismatch, dimensions imply " + std::to_string(expected) +
                  " bytes but payload has " + std::to_string(actual));
  }
  out.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(header), bytes.end());
  return out;
}

}  // namespace detail

/// Parses CSV text where each line is one feature dimension and each field one sample.
inline Eigen::MatrixXd parse_matrix_csv(std::istream& in, bool has_header) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool header_pending = has_header;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto fields = detail::split_commas(body);
    if (rows.empty()) {
      width = fields.size();
    } else if (fields.size() != width) {
      throw IoError("ragged row at row " + std::to_string(line_no) + ": expected " +
                    std::to_string(width) + " fields, found " + std::to_string(fields.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto v = detail::parse_double(fields[c]);
      if (!v) {
        throw IoError("non-numeric field at row " + std::to_string(line_no) + ", column " +
                      std::to_string(c + 1) + ": '" + std::string(detail::trim(fields[c])) + "'");
      }
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("no data rows");

  Eigen::MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(width));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < width; ++c) m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
  }
  return m;
}

inline SampleMatrix load_matrix_csv(const std::string& path, bool has_header = false) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    return SampleMatrix(parse_matrix_csv(in, has_header));
  } catch (const IoError& e) {
    throw IoError(path + ": " + e.what());
  }
}

/// Writes a matrix in the same dialect load_matrix_csv reads. Values use the
/// shortest representation that round-trips.
inline void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << detail::format_double(m(r, c));
    }
    out << '\n';
  }
}

inline void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  write_matrix_csv(out, m);
}

/// One integer label per line; an optional header line is skipped when it is not numeric.
inline LabelVector load_labels_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = detail::trim(line);
    if (body.empty()) continue;
    const auto v = detail::parse_double(body);
    if (!v || *v != std::floor(*v) || *v < 0) {
      if (labels.empty() && line_no == 1) continue;
      throw IoError(path + ": invalid label at row " + std::to_string(line_no));
    }
    labels.push_back(static_cast<int>(*v));
  }
  if (labels.empty()) throw IoError(path + ": no data rows");
  return LabelVector(std::move(labels));
}

/// IDX label file (magic 0x00000801): one unsigned byte per item.
inline LabelVector load_idx_labels(const std::string& path) {
  const auto parsed = detail::parse_idx(detail::read_file_bytes(path), path);
  if (parsed.dims.size() != 1) throw IoError(path + ": label file must be 1-dimensional");
  std::vector<int> labels(parsed.data.begin(), parsed.data.end());
  return LabelVector(std::move(labels));
}

/// Loads IDX images (one flattened image per column, bytes scaled by 1/255)
/// and optionally an IDX label file.
inline std::pair<SampleMatrix, std::optional<LabelVector>> load_idx(
    const std::string& images_path, const std::optional<std::string>& labels_path = std::nullopt) {
  const auto images = detail::parse_idx(detail::read_file_bytes(images_path), images_path);
  if (images.dims.size() < 2) {
    throw IoError(images_path + ": image file needs at least 2 dimensions");
  }
  const std::size_t count = images.dims[0];
  std::size_t dim = 1;
  for (std::size_t k = 1; k < images.dims.size(); ++k) dim *= images.dims[k];

  Eigen::MatrixXd x(static_cast<Index>(dim), static_cast<Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t p = 0; p < dim; ++p) {
      x(static_cast<Index>(p), static_cast<Index>(i)) = images.data[i * dim + p] / 255.0;
    }
  }

  std::optional<LabelVector> labels;
  if (labels_path) {
    auto parsed = load_idx_labels(*labels_path);
    if (parsed.size() != count) {
      throw IoError("image/label count mismatch: " + std::to_string(count) + " images, " +
                    std::to_string(parsed.size()) + " labels");
    }
    labels = std::move(parsed);
  }
  return {SampleMatrix(std::move(x)), std::move(labels)};
}

/// Centers each column to zero mean, then scales it to unit Euclidean norm.
inline SampleMatrix normalize_columns(const SampleMatrix& x) {
  Eigen::MatrixXd out = x.values();
  for (Index i = 0; i < out.cols(); ++i) {
    const double scale = out.col(i).cwiseAbs().maxCoeff();
    out.col(i).array() -= out.col(i).mean();
    const double norm = out.col(i).norm();
    if (!(norm > 1e-12 * scale) || norm == 0.0) {
      throw InvalidArgument("constant column " + std::to_string(i) +
                            " cannot be normalized to unit length");
    }
    out.col(i) /= norm;
  }
  return SampleMatrix(std::move(out));
}

inline bool is_normalized(const SampleMatrix& x, double tol = 1e-12) {
  for (Index i = 0; i < x.count(); ++i) {
    if (std::abs(x.sample(i).mean()) > tol) return false;
    if (std::abs(x.sample(i).norm() - 1.0) > tol) return false;
  }
  return true;
}

namespace detail {

inline Eigen::VectorXd gaussian_vector(std::mt19937_64& rng, Index size, double sigma = 1.0) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd v(size);
  for (Index i = 0; i < size; ++i) v(i) = sigma * normal(rng);
  return v;
}

}  // namespace detail

/// k isotropic Gaussian clusters. Centers are rescaled so the closest pair is
/// exactly `sep` apart. Columns are grouped by cluster.
inline std::pair<SampleMatrix, LabelVector> synth_blobs(int k, int d, int n_per, double sep,
                                                        double noise_sigma, std::uint64_t seed) {
  if (k < 2 || d < 2 || n_per < 2) {
    throw InvalidArgument("synth_blobs needs k >= 2, d >= 2, n_per >= 2");
  }
  if (!(sep > 0.0) || !(noise_sigma >= 0.0)) {
    throw InvalidArgument("synth_blobs needs sep > 0 and noise_sigma >= 0");
  }
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd centers(d, k);
  for (int c = 0; c < k; ++c) centers.col(c) = detail::gaussian_vector(rng, d);

  double closest = std::numeric_limits<double>::infinity();
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) closest = std::min(closest, (centers.col(a) - centers.col(b)).norm());
  }
  centers *= sep / closest;

  Eigen::MatrixXd x(d, static_cast<Index>(k) * n_per);
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(k) * n_per);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int c = 0; c < k; ++c) {
    for (int s = 0; s < n_per; ++s) {
      const Index col = static_cast<Index>(c) * n_per + s;
      for (int r = 0; r < d; ++r) x(r, col) = centers(r, c) + noise_sigma * normal(rng);
      labels.push_back(c);
    }
  }
  return {SampleMatrix(std::move(x)), LabelVector(std::move(labels))};
}

/// Output of synth_subspaces together with the d x sub_dim orthonormal basis of each subspace.
struct SubspaceSample {
  SampleMatrix x;
  LabelVector labels;
  std::vector<Eigen::MatrixXd> bases;
};

/// Union of k random sub_dim-dimensional subspaces of R^d. Each sample is a
/// Gaussian combination of its subspace basis plus isotropic noise.
inline SubspaceSample synth_subspaces_with_bases(int k, int d, int sub_dim, int n_per,
                                                 double noise_sigma, std::uint64_t seed) {
  if (k < 1 || n_per < 1 || d < 2 || sub_dim < 1 || sub_dim >= d) {
    throw InvalidArgument("synth_subspaces needs 1 <= sub_dim < d and k, n_per >= 1");
  }
  if (static_cast<long>(k) * n_per < 4) throw InvalidArgument("synth_subspaces needs k * n_per >= 4");
  if (!(noise_sigma >= 0.0)) throw InvalidArgument("synth_subspaces needs noise_sigma >= 0");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Eigen::MatrixXd> bases;
  Eigen::MatrixXd x(d, static_cast<Index>(k) * n_per);
  std::vector<int> labels;
  for (int c = 0; c < k; ++c) {
    Eigen::MatrixXd g(d, sub_dim);
    for (Index j = 0; j < sub_dim; ++j) g.col(j) = detail::gaussian_vector(rng, d);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd basis = qr.householderQ() * Eigen::MatrixXd::Identity(d, sub_dim);
    for (int s = 0; s < n_per; ++s) {
      const Index col = static_cast<Index>(c) * n_per + s;
      const Eigen::VectorXd coeffs = detail::gaussian_vector(rng, sub_dim);
      x.col(col) = basis * coeffs;
      if (noise_sigma > 0.0) {
        for (int r = 0; r < d; ++r) x(r, col) += noise_sigma * normal(rng);
      }
      labels.push_back(c);
    }
    bases.push_back(std::move(basis));
  }
  return {SampleMatrix(std::move(x)), LabelVector(std::move(labels)), std::move(bases)};
}

inline std::pair<SampleMatrix, LabelVector> synth_subspaces(int k, int d, int sub_dim, int n_per,
                                                            double noise_sigma, std::uint64_t seed) {
  auto s = synth_subspaces_with_bases(k, d, sub_dim, n_per, noise_sigma, seed);
  return {std::move(s.x), std::move(s.labels)};
}

enum class CorruptionMode { gaussian_columns, sparse_entries, block_missing };

inline CorruptionMode parse_corruption_mode(std::string_view name) {
  if (name == "gaussian_columns") return CorruptionMode::gaussian_columns;
  if (name == "sparse_entries") return CorruptionMode::sparse_entries;
  if (name == "block_missing") return CorruptionMode::block_missing;
  throw InvalidArgument("unknown corruption mode '" + std::string(name) + "'");
}

inline std::string to_string(CorruptionMode mode) {
  switch (mode) {
    case CorruptionMode::gaussian_columns: return "gaussian_columns";
    case CorruptionMode::sparse_entries: return "sparse_entries";
    case CorruptionMode::block_missing: return "block_missing";
  }
  return "unknown";
}

/// Indices of the columns a gaussian_columns/block_missing corruption touches:
/// ceil(fraction * n) columns sampled without replacement, ascending.
inline std::vector<Index> corrupted_columns(Index n, double fraction, std::mt19937_64& rng) {
  const auto count = static_cast<Index>(std::ceil(fraction * static_cast<double>(n) - 1e-12));
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(static_cast<std::size_t>(std::clamp<Index>(count, 0, n)));
  std::sort(order.begin(), order.end());
  return order;
}

/// Corrupts a copy of x.
///  - gaussian_columns: ceil(fraction*n) columns receive N(0, magnitude) noise (magnitude is a variance).
///  - sparse_entries: in every column, ceil(fraction*d) entries are replaced by +-magnitude.
///  - block_missing: ceil(fraction*n) columns get a contiguous run of ceil(fraction*d) entries zeroed.
inline SampleMatrix corrupt(const SampleMatrix& x, CorruptionMode mode, double fraction, double magnitude,
                            std::uint64_t seed) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) {
    throw InvalidArgument("corruption fraction must lie in [0, 1]");
  }
  if (!(magnitude >= 0.0)) throw InvalidArgument("corruption magnitude must be >= 0");

  Eigen::MatrixXd out = x.values();
  if (fraction == 0.0) return SampleMatrix(std::move(out));

  std::mt19937_64 rng(seed);
  const Index d = out.rows();
  const Index n = out.cols();
  const auto per_column = std::clamp<Index>(
      static_cast<Index>(std::ceil(fraction * static_cast<double>(d) - 1e-12)), 0, d);

  switch (mode) {
    case CorruptionMode::gaussian_columns: {
      std::normal_distribution<double> normal(0.0, std::sqrt(magnitude));
      for (const Index c : corrupted_columns(n, fraction, rng)) {
        for (Index r = 0; r < d; ++r) out(r, c) += normal(rng);
      }
      break;
    }
    case CorruptionMode::sparse_entries: {
      std::vector<Index> rows(static_cast<std::size_t>(d));
      std::bernoulli_distribution coin(0.5);
      for (Index c = 0; c < n; ++c) {
        std::iota(rows.begin(), rows.end(), Index{0});
        std::shuffle(rows.begin(), rows.end(), rng);
        for (Index k = 0; k < per_column; ++k) {
          out(rows[static_cast<std::size_t>(k)], c) = coin(rng) ? magnitude : -magnitude;
        }
      }
      break;
    }
    case CorruptionMode::block_missing: {
      for (const Index c : corrupted_columns(n, fraction, rng)) {
        std::uniform_int_distribution<Index> start_dist(0, d - per_column);
        const Index start = start_dist(rng);
        out.col(c).segment(start, per_column).setZero();
      }
      break;
    }
  }
  return SampleMatrix(std::move(out));
}

}  // namespace enhg
