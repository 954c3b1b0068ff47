#pragma once

#include <filesystem>
#include <string>

#include "bssn/types.hpp"

namespace bssn {

/// Binary PGM (P5, 8-bit). Pixel values are rescaled from [0, max] to
/// [0, 255]; images are column-major flat vectors of side N.
void write_pgm(const std::filesystem::path& path, const Vec& image,
               int image_side);
Vec read_pgm(const std::filesystem::path& path, int& image_side_out);

void write_vector_csv(const std::filesystem::path& path, const Vec& v);
Vec read_vector_csv(const std::filesystem::path& path);

void write_matrix_csv(const std::filesystem::path& path, const Mat& m);
Mat read_matrix_csv(const std::filesystem::path& path);

/// Iteration history with the column set
/// j,residual_norm,objective,step,lcp_size,sle_size,sle_count.
/// Numbers use scientific notation with 6 significant digits; the
/// start row leaves the per-step columns as '-'.
void write_history_csv(const std::filesystem::path& path,
                       const std::vector<IterationRecord>& records);

/// Whitespace-separated twin of the history CSV for gnuplot.
void write_history_dat(const std::filesystem::path& path,
                       const std::vector<IterationRecord>& records);

std::string format_sci(double v);

}  // namespace bssn
