#include "loire/io/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

namespace loire::io {

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string header_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      if (!tok.empty()) return tok;
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

int header_int(std::istream& in, const char* what) {
  const std::string tok = header_token(in);
  if (tok.empty() || !std::all_of(tok.begin(), tok.end(), [](unsigned char ch) {
        return std::isdigit(ch) != 0;
      })) {
    throw DataError(std::string("PGM header: bad ") + what + " '" + tok + "'");
  }
  return std::stoi(tok);
}

bool matches(std::string_view pattern, std::string_view name) {
  std::size_t p = 0, n = 0, star = std::string_view::npos, mark = 0;
  while (n < name.size()) {
    if (p < pattern.size() && (pattern[p] == '?' || pattern[p] == name[n])) {
      ++p;
      ++n;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = n;
    } else if (star != std::string_view::npos) {
      p = star + 1;
      n = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

}  // namespace

GrayImage read_pgm(std::istream& in) {
  if (header_token(in) != "P5") throw DataError("not a binary PGM (P5) file");
  GrayImage img;
  img.width = header_int(in, "width");
  img.height = header_int(in, "height");
  img.maxval = header_int(in, "maxval");
  if (img.width <= 0 || img.height <= 0) throw DataError("PGM has zero size");
  if (img.maxval <= 0 || img.maxval > 255) throw DataError("only 8-bit PGM is supported");
  // header_token consumed exactly one whitespace byte after maxval.
  img.pixels.resize(static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height));
  in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.pixels.size())) {
    throw DataError("PGM pixel data truncated");
  }
  return img;
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return read_pgm(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_pgm(std::ostream& out, const GrayImage& img) {
  out << "P5\n" << img.width << ' ' << img.height << '\n' << img.maxval << '\n';
  out.write(reinterpret_cast<const char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_pgm(out, img);
  if (!out) throw DataError("write failed for " + path.string());
}

FrameStack FrameStack::from_images(const std::vector<GrayImage>& images) {
  if (images.empty()) throw DataError("no frames");
  FrameStack s;
  s.width = images.front().width;
  s.height = images.front().height;
  const Index pixels = static_cast<Index>(s.width) * s.height;
  s.matrix.resize(pixels, static_cast<Index>(images.size()));
  for (std::size_t j = 0; j < images.size(); ++j) {
    const GrayImage& img = images[j];
    if (img.width != s.width || img.height != s.height) {
      throw DataError("frame " + std::to_string(j) + " is " + std::to_string(img.width) + "x" +
                      std::to_string(img.height) + ", expected " + std::to_string(s.width) +
                      "x" + std::to_string(s.height));
    }
    for (int c = 0; c < s.width; ++c) {
      for (int r = 0; r < s.height; ++r) {
        s.matrix(static_cast<Index>(c) * s.height + r, static_cast<Index>(j)) = img.at(r, c);
      }
    }
  }
  return s;
}

GrayImage column_to_image(const Eigen::Ref<const DenseVector<double>>& column, int width,
                          int height) {
  if (column.size() != static_cast<Index>(width) * height) {
    throw DimensionError("column length does not match frame size");
  }
  GrayImage img;
  img.width = width;
  img.height = height;
  img.pixels.resize(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  for (int c = 0; c < width; ++c) {
    for (int r = 0; r < height; ++r) {
      const double v = std::clamp(std::round(column(static_cast<Index>(c) * height + r)), 0.0, 255.0);
      img.pixels[static_cast<std::size_t>(r) * static_cast<std::size_t>(width) +
                 static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(v);
    }
  }
  return img;
}

GrayImage FrameStack::frame(Index j) const {
  if (j < 0 || j >= frames()) throw DimensionError("frame index out of range");
  return column_to_image(matrix.col(j), width, height);
}

FrameStack load_frames(const std::vector<std::filesystem::path>& paths) {
  if (paths.size() < 2) throw DataError("need at least 2 frames, got " + std::to_string(paths.size()));
  std::vector<GrayImage> images;
  images.reserve(paths.size());
  for (const auto& p : paths) {
    images.push_back(read_pgm(p));
    const GrayImage& first = images.front();
    const GrayImage& cur = images.back();
    if (cur.width != first.width || cur.height != first.height) {
      throw DataError(p.string() + " is " + std::to_string(cur.width) + "x" +
                      std::to_string(cur.height) + " but " + paths.front().string() + " is " +
                      std::to_string(first.width) + "x" + std::to_string(first.height));
    }
  }
  return FrameStack::from_images(images);
}

std::vector<std::filesystem::path> expand_frame_patterns(const std::vector<std::string>& patterns) {
  namespace fs = std::filesystem;
  std::vector<fs::path> out;
  for (const auto& pattern : patterns) {
    const fs::path p(pattern);
    const std::string name = p.filename().string();
    if (name.find_first_of("*?") == std::string::npos) {
      out.push_back(p);
      continue;
    }
    const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
    if (!fs::is_directory(dir)) throw DataError("no such directory: " + dir.string());
    std::vector<fs::path> hits;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && matches(name, entry.path().filename().string())) {
        hits.push_back(p.has_parent_path() ? entry.path() : entry.path().filename());
      }
    }
    if (hits.empty()) throw DataError("pattern matched no files: " + pattern);
    std::sort(hits.begin(), hits.end());
    out.insert(out.end(), hits.begin(), hits.end());
  }
  return out;
}

}  // namespace loire::io
