#pragma once

// 8-bit binary PGM (P5) frames and their stacking into a pixels x frames
// matrix.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "loire/core.hpp"
#include "loire/io/csv.hpp"

namespace loire::io {

struct GrayImage {
  int width = 0;
  int height = 0;
  int maxval = 255;
  std::vector<std::uint8_t> pixels;  // row-major, width * height

  std::uint8_t at(int row, int col) const {
    return pixels[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                  static_cast<std::size_t>(col)];
  }
};

/// Accepts P5 with maxval <= 255 and '#' comments in the header.
GrayImage read_pgm(std::istream& in);
GrayImage read_pgm(const std::filesystem::path& path);

/// Writes "P5\n<w> <h>\n<maxval>\n" followed by the raw pixels.
void write_pgm(std::ostream& out, const GrayImage& img);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

/// Frames as columns: column j is frame j vectorized column-major, so pixel
/// (row, col) sits at index col * height + row.
struct FrameStack {
  int width = 0;
  int height = 0;
  DenseMatrix<double> matrix;  // (width * height) x frames

  Index frames() const { return matrix.cols(); }

  static FrameStack from_images(const std::vector<GrayImage>& images);
  GrayImage frame(Index j) const;
};

/// Converts a column back to an image, rounding and clamping to [0, 255].
GrayImage column_to_image(const Eigen::Ref<const DenseVector<double>>& column, int width,
                          int height);

/// Reads, validates and stacks frames in the given order. Dimension
/// mismatches name the offending file.
FrameStack load_frames(const std::vector<std::filesystem::path>& paths);

/// Expands shell-style patterns ('*', '?') in the file-name component; plain
/// paths pass through. Matches within one pattern are sorted by name.
std::vector<std::filesystem::path> expand_frame_patterns(const std::vector<std::string>& patterns);

}  // namespace loire::io
