#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "nsft/errors.hpp"
#include "nsft/tensor.hpp"

namespace nsft {

struct ParseResult {
  SparseTensor tensor;
  std::uint64_t data_lines = 0;          // non-blank, non-comment lines
  std::uint64_t dropped_nonpositive = 0; // values <= 0, excluded by contract
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

// Splits on runs of spaces/tabs; returns the number of fields found, writing
// at most `max` of them.
inline std::size_t fields(std::string_view s, std::string_view* out,
                          std::size_t max) {
  std::size_t count = 0;
  std::size_t pos = 0;
  while (pos < s.size()) {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    if (pos >= s.size()) break;
    std::size_t end = pos;
    while (end < s.size() && s[end] != ' ' && s[end] != '\t') ++end;
    if (count < max) out[count] = s.substr(pos, end - pos);
    ++count;
    pos = end;
  }
  return count;
}

inline std::uint32_t parse_index(std::string_view tok, std::uint64_t line_no,
                                 const char* what) {
  std::uint32_t v = 0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw parse_error("line " + std::to_string(line_no) + ": bad " + what +
                      " '" + std::string(tok) + "'");
  return v;
}

inline double parse_value(std::string_view tok, std::uint64_t line_no) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || p != tok.data() + tok.size())
    throw parse_error("line " + std::to_string(line_no) + ": bad value '" +
                      std::string(tok) + "'");
  if (!std::isfinite(v))
    throw parse_error("line " + std::to_string(line_no) +
                      ": value is not finite");
  return v;
}

// Shortest decimal form that round-trips the exact double.
inline void append_double(std::string& out, double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, p);
}

}  // namespace detail

/// Reads the WS-DREAM line format: one observation per line, four
/// whitespace-separated fields `user_id service_id time_slice value`.
/// Lines beginning with '#' and blank lines are skipped. Values <= 0 are
/// dropped and counted rather than stored; indices outside `dims` and
/// duplicate indices are errors.
inline ParseResult parse_wsdream(std::istream& in, Dims dims) {
  std::vector<Observation> entries;
  std::uint64_t data_lines = 0;
  std::uint64_t dropped = 0;
  std::uint64_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    ++data_lines;

    std::string_view tok[4];
    if (detail::fields(body, tok, 4) != 4)
      throw parse_error("line " + std::to_string(line_no) +
                        ": expected 4 fields");
    const std::uint32_t i = detail::parse_index(tok[0], line_no, "user id");
    const std::uint32_t j = detail::parse_index(tok[1], line_no, "service id");
    const std::uint32_t k = detail::parse_index(tok[2], line_no, "time slice");
    const double value = detail::parse_value(tok[3], line_no);
    const EntryIndex index{i, j, k};
    if (!index.in(dims))
      throw range_error("line " + std::to_string(line_no) + ": index (" +
                        std::to_string(i) + ", " + std::to_string(j) + ", " +
                        std::to_string(k) + ") outside declared dimensions");
    if (value <= 0.0) {
      ++dropped;
      continue;
    }
    entries.push_back(Observation{index, value});
  }
  // Duplicate detection happens in the SparseTensor constructor, after the
  // entries are sorted.
  return ParseResult{SparseTensor(dims, std::move(entries)), data_lines,
                     dropped};
}

/// Writes a tensor back out in the same line format, preceded by a
/// `# dims I J K` comment so downstream commands can recover the shape.
/// Values use the shortest decimal form that round-trips exactly.
inline void write_wsdream(std::ostream& out, const SparseTensor& tensor) {
  std::string buf;
  buf += "# dims ";
  buf += std::to_string(tensor.dims().users);
  buf += ' ';
  buf += std::to_string(tensor.dims().services);
  buf += ' ';
  buf += std::to_string(tensor.dims().times);
  buf += '\n';
  out << buf;
  for (const Observation& o : tensor.entries()) {
    buf.clear();
    buf += std::to_string(o.index.i);
    buf += ' ';
    buf += std::to_string(o.index.j);
    buf += ' ';
    buf += std::to_string(o.index.k);
    buf += ' ';
    detail::append_double(buf, o.value);
    buf += '\n';
    out << buf;
  }
}

// Recovers dims from the `# dims I J K` header comment, if present.
inline bool sniff_dims(std::istream& in, Dims& dims) {
  std::string line;
  if (!std::getline(in, line)) return false;
  std::string_view body = detail::trim(line);
  constexpr std::string_view prefix = "# dims ";
  if (body.substr(0, prefix.size()) != prefix) return false;
  std::string_view tok[3];
  if (detail::fields(body.substr(prefix.size()), tok, 3) != 3) return false;
  try {
    dims.users = detail::parse_index(tok[0], 1, "dim");
    dims.services = detail::parse_index(tok[1], 1, "dim");
    dims.times = detail::parse_index(tok[2], 1, "dim");
  } catch (const parse_error&) {
    return false;
  }
  return dims.users > 0 && dims.services > 0 && dims.times > 0;
}

/// Split manifest: per part, the sorted (i, j, k) triples. Used to freeze an
/// experimental split independently of the value data.
inline void write_split_manifest(std::ostream& out, const DataSplit& split) {
  auto part = [&](const char* name, const SparseTensor& t) {
    out << "part " << name << ' ' << t.size() << '\n';
    for (const Observation& o : t.entries())
      out << o.index.i << ' ' << o.index.j << ' ' << o.index.k << '\n';
  };
  part("train", split.train);
  part("valid", split.valid);
  part("test", split.test);
}

}  // namespace nsft
