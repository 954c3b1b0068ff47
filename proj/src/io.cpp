#include "bssn/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace bssn {

namespace {

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  std::ofstream os(path, binary ? std::ios::binary : std::ios::out);
  if (!os) throw InvalidArgument("cannot open for writing: " + path.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& path, bool binary = false) {
  std::ifstream is(path, binary ? std::ios::binary : std::ios::in);
  if (!is) throw InvalidArgument("cannot open for reading: " + path.string());
  return is;
}

}  // namespace

std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.5e", v);
  return buf;
}

void write_pgm(const std::filesystem::path& path, const Vec& image,
               int image_side) {
  if (image.size() != static_cast<Eigen::Index>(image_side) * image_side) {
    throw InvalidArgument("write_pgm: image size mismatch");
  }
  const double lo = std::min(0.0, image.minCoeff());
  const double hi = std::max(image.maxCoeff(), lo + 1e-300);
  auto os = open_out(path, true);
  os << "P5\n" << image_side << " " << image_side << "\n255\n";
  // row-major pixel order per the format; vectors are column-major
  for (int r = 0; r < image_side; ++r) {
    for (int c = 0; c < image_side; ++c) {
      const double v = image(static_cast<Eigen::Index>(c) * image_side + r);
      const int q = static_cast<int>(std::lround(255.0 * (v - lo) / (hi - lo)));
      os.put(static_cast<char>(std::clamp(q, 0, 255)));
    }
  }
}

Vec read_pgm(const std::filesystem::path& path, int& image_side_out) {
  auto is = open_in(path, true);
  std::string magic;
  is >> magic;
  if (magic != "P5") throw InvalidArgument("read_pgm: not a P5 file");
  int w = 0, h = 0, maxval = 0;
  is >> w >> h >> maxval;
  if (w != h || maxval != 255) {
    throw InvalidArgument("read_pgm: expected square 8-bit image");
  }
  is.get();  // single whitespace after the header
  Vec img(static_cast<Eigen::Index>(w) * h);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const int byte = is.get();
      if (byte == EOF) throw InvalidArgument("read_pgm: truncated file");
      img(static_cast<Eigen::Index>(c) * h + r) = byte / 255.0;
    }
  }
  image_side_out = w;
  return img;
}

void write_vector_csv(const std::filesystem::path& path, const Vec& v) {
  auto os = open_out(path);
  os.precision(17);
  for (Eigen::Index k = 0; k < v.size(); ++k) os << v(k) << "\n";
}

Vec read_vector_csv(const std::filesystem::path& path) {
  auto is = open_in(path);
  std::vector<double> vals;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    vals.push_back(std::stod(line));
  }
  return Eigen::Map<const Vec>(vals.data(), vals.size());
}

void write_matrix_csv(const std::filesystem::path& path, const Mat& m) {
  auto os = open_out(path);
  os.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      os << m(i, j) << (j + 1 < m.cols() ? "," : "");
    }
    os << "\n";
  }
}

Mat read_matrix_csv(const std::filesystem::path& path) {
  auto is = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw InvalidArgument("read_matrix_csv: ragged rows");
    }
    rows.push_back(std::move(row));
  }
  Mat m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i) {
    for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

namespace {

void write_history(std::ostream& os,
                   const std::vector<IterationRecord>& records,
                   const char* sep) {
  os << "j" << sep << "residual_norm" << sep << "objective" << sep << "step"
     << sep << "lcp_size" << sep << "sle_size" << sep << "sle_count\n";
  for (const auto& r : records) {
    os << r.j << sep << format_sci(r.residual_norm) << sep
       << format_sci(r.objective) << sep;
    if (r.j == 0) {
      os << "-" << sep << "-" << sep << "-" << sep << "-\n";
    } else {
      os << format_sci(r.step) << sep << r.lcp_size << sep << r.sle_size << sep
         << r.sle_count << "\n";
    }
  }
}

}  // namespace

void write_history_csv(const std::filesystem::path& path,
                       const std::vector<IterationRecord>& records) {
  auto os = open_out(path);
  write_history(os, records, ",");
}

void write_history_dat(const std::filesystem::path& path,
                       const std::vector<IterationRecord>& records) {
  auto os = open_out(path);
  write_history(os, records, " ");
}

}  // namespace bssn
