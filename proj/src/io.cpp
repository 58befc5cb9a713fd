#include "gnrfm/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

namespace gnrfm::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

[[noreturn]] void parse_fail(const std::string& origin, std::size_t line, const std::string& why) {
  throw IoError(origin + ":" + std::to_string(line) + ": " + why);
}

double parse_double(std::string_view tok, const std::string& origin, std::size_t line) {
  tok = trim(tok);
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty())
    parse_fail(origin, line, "not a number: '" + std::string(tok) + "'");
  if (!std::isfinite(v)) parse_fail(origin, line, "non-finite value");
  return v;
}

}  // namespace

std::string format_matrix_csv(const Matrix& m, bool shape_comment) {
  std::string out;
  out.reserve(m.size() * 24 + 32);
  if (shape_comment) out += "# " + std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
  char buf[40];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      std::snprintf(buf, sizeof buf, "%.17g", m(i, j) == 0.0 ? 0.0 : m(i, j));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m, bool shape_comment) {
  write_text(path, format_matrix_csv(m, shape_comment));
}

Matrix parse_matrix_csv(const std::string& text, const std::string& origin) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  long want_rows = -1;
  long want_cols = -1;
  std::size_t line_no = 0;
  bool seen_data = false;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view l = trim(line);
    if (l.empty()) continue;
    if (l.front() == '#') {
      if (!seen_data && want_rows < 0) {
        std::istringstream hs{std::string(l.substr(1))};
        long r = 0, c = 0;
        if (hs >> r >> c) {
          want_rows = r;
          want_cols = c;
        }
      }
      continue;
    }
    seen_data = true;
    std::size_t count = 0;
    std::string_view rest = l;
    while (true) {
      const std::size_t comma = rest.find(',');
      values.push_back(parse_double(rest.substr(0, comma), origin, line_no));
      ++count;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (rows == 0)
      cols = count;
    else if (count != cols)
      parse_fail(origin, line_no,
                 "expected " + std::to_string(cols) + " columns, found " + std::to_string(count));
    ++rows;
  }
  if (rows == 0 || cols == 0) throw IoError(origin + ": no matrix data");
  if (want_rows >= 0 && (static_cast<std::size_t>(want_rows) != rows ||
                         static_cast<std::size_t>(want_cols) != cols))
    throw IoError(origin + ": shape comment says " + std::to_string(want_rows) + "x" +
                  std::to_string(want_cols) + " but data is " + std::to_string(rows) + "x" +
                  std::to_string(cols));
  Matrix m(rows, cols);
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

Matrix read_matrix_csv(const std::filesystem::path& path) {
  return parse_matrix_csv(read_text(path), path.string());
}

void write_labels(const std::filesystem::path& path, const Labels& labels) {
  std::string out;
  for (int l : labels) out += std::to_string(l) + "\n";
  write_text(path, out);
}

Labels read_labels(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  Labels out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view l = trim(line);
    if (l.empty() || l.front() == '#') continue;
    int v = 0;
    const auto [ptr, ec] = std::from_chars(l.data(), l.data() + l.size(), v);
    if (ec != std::errc() || ptr != l.data() + l.size())
      parse_fail(path.string(), line_no, "not an integer label: '" + std::string(l) + "'");
    out.push_back(v);
  }
  if (out.empty()) throw IoError(path.string() + ": no labels");
  return out;
}

void write_pgm(const std::filesystem::path& path, const Matrix& m) {
  if (m.empty()) throw IoError("write_pgm: empty matrix");
  double mx = 0.0;
  for (double x : m.values()) mx = std::max(mx, x);
  std::string out = "P5\n" + std::to_string(m.cols()) + " " + std::to_string(m.rows()) + "\n255\n";
  out.reserve(out.size() + m.size());
  for (double x : m.values()) {
    double g = mx > 0.0 ? std::clamp(x / mx, 0.0, 1.0) * 255.0 : 0.0;
    out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(g))));
  }
  write_text(path, out);
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw IoError("write failed for " + path.string());
}

}  // namespace gnrfm::io
