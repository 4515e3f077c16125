#pragma once

// Report serialisation. JSON and CSV numbers are printed with 17 significant digits so a
// report round-trips exactly; non-finite values become the strings "+inf", "-inf", "nan"
// (JSON has no literal for them).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mourre/linalg.hpp"
#include "mourre/spectral.hpp"

namespace mourre::io {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// A double as a JSON value: a number when finite, otherwise its string spelling.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(format_double(v)); }

inline Json numbers(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(number(x));
  return a;
}

inline Json numbers(const RealVector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

namespace detail {

inline void escape(std::ostream& os, const std::string& s) { os << Json(s).dump(); }

inline void write(std::ostream& os, const Json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ",\n";
        first = false;
        os << pad;
        escape(os, it.key());
        os << ": ";
        write(os, it.value(), indent, depth + 1);
      }
      os << "\n" << close << "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_primitive(); });
      os << "[";
      bool first = true;
      for (const auto& e : j) {
        if (!first) os << (flat ? ", " : ",");
        if (!flat) os << "\n" << pad;
        first = false;
        write(os, e, indent, depth + 1);
      }
      if (!flat) os << "\n" << close;
      os << "]";
      return;
    }
    case Json::value_t::number_float:
      os << format_double(j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

}  // namespace detail

/// Deterministic pretty printer (keys sorted, doubles at 17 significant digits).
inline std::string dump(const Json& j) {
  std::ostringstream os;
  detail::write(os, j, 2, 0);
  os << "\n";
  return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write to '" + path.string() + "' failed");
}

inline void write_json(const std::filesystem::path& path, const Json& j) { write_text(path, dump(j)); }

/// Minimal CSV table; cells are strings or doubles.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  CsvTable& row() {
    rows_.emplace_back();
    return *this;
  }
  CsvTable& operator<<(double v) {
    rows_.back().push_back(format_double(v));
    return *this;
  }
  CsvTable& operator<<(long long v) {
    rows_.back().push_back(std::to_string(v));
    return *this;
  }
  CsvTable& operator<<(int v) { return *this << static_cast<long long>(v); }
  CsvTable& operator<<(std::size_t v) { return *this << static_cast<long long>(v); }
  CsvTable& operator<<(const std::string& v) {
    rows_.back().push_back(v);
    return *this;
  }

  [[nodiscard]] std::string str() const {
    std::ostringstream os;
    auto line = [&os](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
      os << "\n";
    };
    line(header_);
    for (const auto& r : rows_) {
      if (r.size() != header_.size()) throw std::logic_error("CsvTable: row width does not match header");
      line(r);
    }
    return os.str();
  }

  void write(const std::filesystem::path& path) const { write_text(path, str()); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Text matrix format:
///   # rows cols complex
///   re im re im ...        (one line per row, row-major)
inline void write_matrix_text(std::ostream& os, const Matrix& m) {
  os << "# " << m.rows() << " " << m.cols() << " complex\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      os << (j ? " " : "") << format_double(m(i, j).real()) << " " << format_double(m(i, j).imag());
    }
    os << "\n";
  }
}

inline Matrix read_matrix_text(std::istream& is) {
  std::string hash, kind;
  Eigen::Index rows = 0, cols = 0;
  if (!(is >> hash >> rows >> cols >> kind) || hash != "#" || kind != "complex" || rows < 0 || cols < 0) {
    throw std::runtime_error("read_matrix_text: bad header (expected '# rows cols complex')");
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      double re = 0.0, im = 0.0;
      if (!(is >> re >> im)) throw std::runtime_error("read_matrix_text: truncated data");
      m(i, j) = Complex(re, im);
    }
  }
  return m;
}

inline void write_matrix_text(const std::filesystem::path& path, const Matrix& m) {
  std::ostringstream os;
  write_matrix_text(os, m);
  write_text(path, os.str());
}

/// index,value
inline CsvTable eigenvalue_table(const SpectralDecomposition& dec) {
  CsvTable t({"index", "value"});
  for (Eigen::Index k = 0; k < dec.dim(); ++k) t.row() << static_cast<long long>(k) << dec.eigenvalues()[k];
  return t;
}

}  // namespace mourre::io
