#pragma once

#include <filesystem>
#include <string>

#include "gnrfm/matrix.hpp"
#include "gnrfm/segmentation.hpp"

namespace gnrfm::io {

/// Row-major CSV, 17 significant digits, optional leading "# rows cols" line.
std::string format_matrix_csv(const Matrix& m, bool shape_comment = true);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m, bool shape_comment = true);

/// Parses CSV written by write_matrix_csv or any comma-separated numeric
/// table. Lines starting with '#' are skipped except a leading shape
/// comment, which is checked against the data. Rejects ragged rows,
/// non-finite values and empty tables.
Matrix parse_matrix_csv(const std::string& text, const std::string& origin = "<string>");
Matrix read_matrix_csv(const std::filesystem::path& path);

/// One integer label per line.
void write_labels(const std::filesystem::path& path, const Labels& labels);
Labels read_labels(const std::filesystem::path& path);

/// Binary 8-bit PGM, linear scale from 0 to the largest entry.
void write_pgm(const std::filesystem::path& path, const Matrix& m);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace gnrfm::io
