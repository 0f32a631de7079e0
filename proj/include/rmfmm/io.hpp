// Copyright 2026 The rmfmm Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RMFMM_IO_HPP_
#define RMFMM_IO_HPP_

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include "rmfmm/error.hpp"
#include "rmfmm/types.hpp"

// Text formats.
//
// Masked matrix:   "m n" header line, then m lines of n whitespace-separated
//                  tokens; "NA" marks an unobserved entry.
// Dense matrix:    "rows cols" header, then dense rows (used for factors).
// Numbers are written with 17 significant digits so that a save/load
// round trip is bit-exact; scientific notation is accepted on load.

namespace rmfmm::io {

namespace detail {

class Tokenizer {
 public:
  Tokenizer(std::istream& in, std::string source)
      : in_(in), source_(std::move(source)) {}

  // Next whitespace-delimited token; false at end of input.
  bool Next(std::string& token) {
    token.clear();
    for (;;) {
      if (pos_ >= line_.size()) {
        if (!std::getline(in_, line_)) return false;
        ++line_no_;
        pos_ = 0;
        if (!line_.empty() && line_.back() == '\r') line_.pop_back();
        continue;
      }
      const char c = line_[pos_];
      if (c == ' ' || c == '\t') {
        ++pos_;
        continue;
      }
      token_col_ = pos_ + 1;
      while (pos_ < line_.size() && line_[pos_] != ' ' && line_[pos_] != '\t') {
        token.push_back(line_[pos_++]);
      }
      return true;
    }
  }

  [[noreturn]] void Fail(ErrorKind kind, const std::string& msg) const {
    throw Error(kind, source_ + ":" + std::to_string(line_no_) + ":" +
                          std::to_string(token_col_) + ": " + msg);
  }

  std::size_t line() const { return line_no_; }

 private:
  std::istream& in_;
  std::string source_;
  std::string line_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
  std::size_t token_col_ = 0;
};

inline double ParseNumber(Tokenizer& tok, const std::string& token) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    tok.Fail(ErrorKind::kParseError, "not a number: '" + token + "'");
  }
  if (!std::isfinite(value)) {
    tok.Fail(ErrorKind::kNonFiniteValue, "non-finite value '" + token + "'");
  }
  return value;
}

inline Index ParseDimension(Tokenizer& tok) {
  std::string token;
  if (!tok.Next(token)) {
    tok.Fail(ErrorKind::kParseError, "missing shape header");
  }
  Index value = 0;
  const auto [ptr, ec] =
      std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || value < 0) {
    tok.Fail(ErrorKind::kParseError, "bad dimension '" + token + "'");
  }
  return value;
}

inline std::string FormatNumber(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Each matrix row must sit on one line; blank lines between rows are
// tolerated.
template <class Cell>
void ReadGrid(Tokenizer& tok, Index rows, Index cols, Cell&& cell) {
  std::string token;
  std::size_t previous_line = tok.line();
  for (Index i = 0; i < rows; ++i) {
    std::size_t row_line = 0;
    for (Index j = 0; j < cols; ++j) {
      if (!tok.Next(token)) {
        tok.Fail(ErrorKind::kShapeHeaderMismatch,
                 "expected " + std::to_string(rows * cols) +
                     " values, input ended early");
      }
      if (j == 0) {
        row_line = tok.line();
        if (row_line == previous_line) {
          tok.Fail(ErrorKind::kShapeHeaderMismatch,
                   "row " + std::to_string(i + 1) +
                       " does not start on a new line");
        }
      } else if (tok.line() != row_line) {
        tok.Fail(ErrorKind::kShapeHeaderMismatch,
                 "row " + std::to_string(i + 1) + " has fewer than " +
                     std::to_string(cols) + " values");
      }
      cell(i, j, token);
    }
    previous_line = row_line;
  }
  if (tok.Next(token)) {
    tok.Fail(ErrorKind::kShapeHeaderMismatch,
             "extra value '" + token + "' beyond declared shape");
  }
}

inline std::ifstream OpenIn(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open '" + path + "'");
  return in;
}

inline std::ofstream OpenOut(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorKind::kIoError, "cannot write '" + path + "'");
  }
  return out;
}

inline void Finish(std::ostream& out, const std::string& path) {
  out.flush();
  if (!out) throw Error(ErrorKind::kIoError, "write failed for '" + path + "'");
}

}  // namespace detail

inline MaskedMatrix ReadMaskedMatrix(std::istream& in,
                                     const std::string& source = "<stream>") {
  detail::Tokenizer tok(in, source);
  const Index m = detail::ParseDimension(tok);
  const Index n = detail::ParseDimension(tok);
  DenseMatrix values = DenseMatrix::Zero(m, n);
  DenseMatrix mask = DenseMatrix::Zero(m, n);
  detail::ReadGrid(tok, m, n, [&](Index i, Index j, const std::string& t) {
    if (t == "NA") return;
    values(i, j) = detail::ParseNumber(tok, t);
    mask(i, j) = 1.0;
  });
  return MaskedMatrix(std::move(values), std::move(mask));
}

inline void WriteMaskedMatrix(std::ostream& out, const MaskedMatrix& data) {
  out << data.rows() << ' ' << data.cols() << '\n';
  for (Index i = 0; i < data.rows(); ++i) {
    for (Index j = 0; j < data.cols(); ++j) {
      if (j > 0) out << ' ';
      if (data.observed(i, j)) {
        out << detail::FormatNumber(data.values()(i, j));
      } else {
        out << "NA";
      }
    }
    out << '\n';
  }
}

inline DenseMatrix ReadDenseMatrix(std::istream& in,
                                   const std::string& source = "<stream>") {
  detail::Tokenizer tok(in, source);
  const Index rows = detail::ParseDimension(tok);
  const Index cols = detail::ParseDimension(tok);
  DenseMatrix a(rows, cols);
  detail::ReadGrid(tok, rows, cols, [&](Index i, Index j, const std::string& t) {
    a(i, j) = detail::ParseNumber(tok, t);
  });
  return a;
}

inline void WriteDenseMatrix(std::ostream& out, const DenseMatrix& a) {
  out << a.rows() << ' ' << a.cols() << '\n';
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j > 0) out << ' ';
      out << detail::FormatNumber(a(i, j));
    }
    out << '\n';
  }
}

inline MaskedMatrix LoadMaskedMatrix(const std::string& path) {
  auto in = detail::OpenIn(path);
  return ReadMaskedMatrix(in, path);
}

inline void SaveMaskedMatrix(const std::string& path, const MaskedMatrix& d) {
  auto out = detail::OpenOut(path);
  WriteMaskedMatrix(out, d);
  detail::Finish(out, path);
}

inline DenseMatrix LoadDenseMatrix(const std::string& path) {
  auto in = detail::OpenIn(path);
  return ReadDenseMatrix(in, path);
}

inline void SaveDenseMatrix(const std::string& path, const DenseMatrix& a) {
  auto out = detail::OpenOut(path);
  WriteDenseMatrix(out, a);
  detail::Finish(out, path);
}

/// Factors live in two dense files, one for U (m x r) and one for V (n x r).
inline FactorPair LoadFactors(const std::string& u_path,
                              const std::string& v_path) {
  FactorPair f{LoadDenseMatrix(u_path), LoadDenseMatrix(v_path)};
  if (f.U.cols() != f.V.cols()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "factor files '" + u_path + "' and '" + v_path +
                    "' have different column counts");
  }
  return f;
}

inline void SaveFactors(const std::string& u_path, const std::string& v_path,
                        const FactorPair& f) {
  SaveDenseMatrix(u_path, f.U);
  SaveDenseMatrix(v_path, f.V);
}

/// Flat key=value manifest, keys in sorted order.
inline void SaveManifest(const std::string& path,
                         const std::map<std::string, std::string>& kv) {
  auto out = detail::OpenOut(path);
  for (const auto& [k, v] : kv) out << k << '=' << v << '\n';
  detail::Finish(out, path);
}

inline std::map<std::string, std::string> LoadManifest(
    const std::string& path) {
  auto in = detail::OpenIn(path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::kParseError,
                  path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

}  // namespace rmfmm::io

#endif  // RMFMM_IO_HPP_
