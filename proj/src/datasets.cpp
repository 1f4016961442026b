#include "splitopt/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <random>
#include <sstream>

namespace splitopt::data {

nn::Batch Dataset::gather(std::span<const std::size_t> indices) const {
  nn::Batch batch;
  batch.inputs.resize(static_cast<Eigen::Index>(indices.size()), images.cols());
  batch.targets.reserve(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    batch.inputs.row(static_cast<Eigen::Index>(i)) =
        images.row(static_cast<Eigen::Index>(indices[i]));
    batch.targets.push_back(labels.at(indices[i]));
  }
  return batch;
}

namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void write_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 24));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v));
}

std::string hex(std::uint32_t v) {
  std::ostringstream os;
  os << "0x" << std::hex;
  os.width(8);
  os.fill('0');
  os << v;
  return os.str();
}

void require_length(std::span<const std::uint8_t> bytes, std::size_t expected, const char* what) {
  if (bytes.size() < expected) {
    throw IdxLengthError(std::string(what) + ": expected " + std::to_string(expected) +
                             " bytes, got " + std::to_string(bytes.size()),
                         expected, bytes.size());
  }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

Dataset parse_idx(std::span<const std::uint8_t> image_bytes,
                  std::span<const std::uint8_t> label_bytes) {
  require_length(image_bytes, 16, "IDX image header");
  const std::uint32_t image_magic = read_be32(image_bytes, 0);
  if (image_magic != kIdxImageMagic)
    throw IdxFormatError("IDX image file: bad magic " + hex(image_magic) + ", expected " +
                         hex(kIdxImageMagic));
  const std::uint32_t count = read_be32(image_bytes, 4);
  const std::uint32_t rows = read_be32(image_bytes, 8);
  const std::uint32_t cols = read_be32(image_bytes, 12);
  const std::size_t pixels = std::size_t{rows} * cols;
  require_length(image_bytes, 16 + std::size_t{count} * pixels, "IDX image payload");

  require_length(label_bytes, 8, "IDX label header");
  const std::uint32_t label_magic = read_be32(label_bytes, 0);
  if (label_magic != kIdxLabelMagic)
    throw IdxFormatError("IDX label file: bad magic " + hex(label_magic) + ", expected " +
                         hex(kIdxLabelMagic));
  const std::uint32_t label_count = read_be32(label_bytes, 4);
  require_length(label_bytes, 8 + std::size_t{label_count}, "IDX label payload");
  if (label_count != count)
    throw IdxFormatError("IDX image count " + std::to_string(count) +
                         " does not match label count " + std::to_string(label_count));
  if (count == 0) throw IdxFormatError("IDX files contain no samples");

  Dataset ds;
  ds.images.resize(count, static_cast<Eigen::Index>(pixels));
  for (std::uint32_t i = 0; i < count; ++i)
    for (std::size_t p = 0; p < pixels; ++p)
      ds.images(i, static_cast<Eigen::Index>(p)) = image_bytes[16 + std::size_t{i} * pixels + p] / 255.0;
  ds.labels.reserve(count);
  int max_label = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    const int label = label_bytes[8 + i];
    ds.labels.push_back(label);
    max_label = std::max(max_label, label);
  }
  ds.classes = max_label + 1;
  ds.meta = "idx:" + std::to_string(count) + "x" + std::to_string(rows) + "x" + std::to_string(cols);
  return ds;
}

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  const auto img = read_file(images);
  const auto lab = read_file(labels);
  Dataset ds = parse_idx(img, lab);
  ds.meta = "idx:" + images.string() + "," + labels.string();
  return ds;
}

std::vector<std::uint8_t> serialize_idx_images(const Eigen::MatrixXd& images, std::uint32_t rows,
                                               std::uint32_t cols) {
  if (static_cast<Eigen::Index>(rows) * cols != images.cols())
    throw std::invalid_argument("serialize_idx_images: rows*cols does not match image width");
  std::vector<std::uint8_t> out;
  out.reserve(16 + static_cast<std::size_t>(images.size()));
  write_be32(out, kIdxImageMagic);
  write_be32(out, static_cast<std::uint32_t>(images.rows()));
  write_be32(out, rows);
  write_be32(out, cols);
  for (Eigen::Index i = 0; i < images.rows(); ++i)
    for (Eigen::Index j = 0; j < images.cols(); ++j) {
      const double v = std::clamp(images(i, j), 0.0, 1.0);
      out.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
    }
  return out;
}

std::vector<std::uint8_t> serialize_idx_labels(std::span<const int> labels) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + labels.size());
  write_be32(out, kIdxLabelMagic);
  write_be32(out, static_cast<std::uint32_t>(labels.size()));
  for (int l : labels) {
    if (l < 0 || l > 255) throw std::invalid_argument("serialize_idx_labels: label out of byte range");
    out.push_back(static_cast<std::uint8_t>(l));
  }
  return out;
}

BlobGeometry blob_geometry(const BlobSpec& spec) {
  if (spec.n_per_class < 1 || spec.n_classes < 1 || spec.dim < 1)
    throw std::invalid_argument("synth_blobs: counts must be >= 1");
  if (!(spec.separation > 0.0)) throw std::invalid_argument("synth_blobs: separation must be > 0");

  // Adjacent centers differ by `step` in every coordinate, i.e. by
  // step*sqrt(dim) in Euclidean distance, which must equal separation*sigma.
  // Per coordinate the span (C-1)*step + 6*sigma fills [0,1].
  const double root_dim = std::sqrt(static_cast<double>(spec.dim));
  const double sigma = 1.0 / ((spec.n_classes - 1) * spec.separation / root_dim + 6.0);
  const double step = spec.separation * sigma / root_dim;
  BlobGeometry g{Eigen::MatrixXd(spec.n_classes, spec.dim), sigma};
  for (int c = 0; c < spec.n_classes; ++c) g.centers.row(c).setConstant(3.0 * sigma + c * step);
  return g;
}

Dataset synth_blobs(const BlobSpec& spec) {
  const BlobGeometry geom = blob_geometry(spec);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> noise(0.0, geom.sigma);

  const Eigen::Index n = static_cast<Eigen::Index>(spec.n_per_class) * spec.n_classes;
  Dataset ds;
  ds.images.resize(n, spec.dim);
  ds.labels.reserve(static_cast<std::size_t>(n));
  Eigen::Index row = 0;
  for (int c = 0; c < spec.n_classes; ++c) {
    for (int i = 0; i < spec.n_per_class; ++i, ++row) {
      for (int j = 0; j < spec.dim; ++j)
        ds.images(row, j) = std::clamp(geom.centers(c, j) + noise(rng), 0.0, 1.0);
      ds.labels.push_back(c);
    }
  }
  ds.classes = spec.n_classes;
  std::ostringstream meta;
  meta << "synth:n_per_class=" << spec.n_per_class << ",classes=" << spec.n_classes
       << ",dim=" << spec.dim << ",separation=" << spec.separation << ",seed=" << spec.seed;
  ds.meta = meta.str();
  return ds;
}

}  // namespace splitopt::data
