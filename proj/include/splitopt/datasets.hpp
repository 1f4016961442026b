#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "splitopt/mlp.hpp"

namespace splitopt::data {

/// N images (rows, values in [0,1]) with one class label each.
struct Dataset {
  Eigen::MatrixXd images;
  std::vector<int> labels;
  int classes = 0;
  std::string meta;

  std::size_t size() const { return labels.size(); }
  Eigen::Index dim() const { return images.cols(); }

  nn::Batch as_batch() const { return {images, labels}; }
  nn::Batch gather(std::span<const std::size_t> indices) const;
};

/// Wrong magic number or malformed header.
class IdxFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Payload shorter than the header promises.
class IdxLengthError : public std::runtime_error {
 public:
  IdxLengthError(const std::string& what, std::size_t expected, std::size_t actual)
      : std::runtime_error(what), expected_(expected), actual_(actual) {}
  std::size_t expected() const { return expected_; }
  std::size_t actual() const { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// Big-endian IDX image file (magic 0x803, N, rows, cols) plus label file
/// (magic 0x801, N). Pixels are scaled by 1/255.
Dataset parse_idx(std::span<const std::uint8_t> image_bytes,
                  std::span<const std::uint8_t> label_bytes);

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

/// Inverse of parse_idx. Pixels are rounded to the nearest byte.
std::vector<std::uint8_t> serialize_idx_images(const Eigen::MatrixXd& images, std::uint32_t rows,
                                               std::uint32_t cols);
std::vector<std::uint8_t> serialize_idx_labels(std::span<const int> labels);

struct BlobSpec {
  int n_per_class = 500;
  int n_classes = 2;
  int dim = 2;
  double separation = 6.0;
  std::uint64_t seed = 1;
};

/// Gaussian clusters in [0,1]^dim. Centers lie on the main diagonal with
/// adjacent centers `separation` noise standard deviations apart; the noise
/// scale is chosen so the outermost centers keep a 3-sigma margin inside the
/// unit cube. Values are clipped to [0,1]. Rows are grouped by class.
Dataset synth_blobs(const BlobSpec& spec);

/// Class centers and noise scale used by synth_blobs.
struct BlobGeometry {
  Eigen::MatrixXd centers;  // n_classes x dim
  double sigma;
};
BlobGeometry blob_geometry(const BlobSpec& spec);

}  // namespace splitopt::data
