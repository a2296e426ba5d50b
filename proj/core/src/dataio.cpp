#include "cubicqn/dataio.hpp"

#include <zlib.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "cubicqn/rng.hpp"

namespace cubicqn {

namespace {

bool parse_double(std::string_view token, double& out) {
  // from_chars does not accept a leading '+', which LIBSVM labels carry.
  if (token.size() > 1 && token.front() == '+') token.remove_prefix(1);
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

bool parse_int(std::string_view token, int& out) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, out);
  return ec == std::errc{} && ptr == end;
}

void append_double(std::string& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, res.ptr);
}

std::string gunzip(const std::string& compressed) {
  z_stream strm{};
  if (inflateInit2(&strm, 15 + 16) != Z_OK) {
    throw std::runtime_error("gunzip: inflateInit2 failed");
  }
  std::string out;
  char buf[1 << 16];
  strm.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(compressed.data()));
  strm.avail_in = static_cast<uInt>(compressed.size());
  int rc = Z_OK;
  while (rc != Z_STREAM_END) {
    strm.next_out = reinterpret_cast<Bytef*>(buf);
    strm.avail_out = sizeof(buf);
    rc = inflate(&strm, Z_NO_FLUSH);
    if (rc != Z_OK && rc != Z_STREAM_END) {
      inflateEnd(&strm);
      throw std::runtime_error("gunzip: corrupt stream");
    }
    out.append(buf, sizeof(buf) - strm.avail_out);
  }
  inflateEnd(&strm);
  return out;
}

}  // namespace

RawDataset parse_libsvm(std::istream& in, bool remap01) {
  RawDataset data;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream tokens(line);
    std::string token;
    if (!(tokens >> token)) continue;  // blank or comment-only line

    double label;
    if (!parse_double(token, label)) {
      throw ParseError(line_number, "malformed label '" + token + "'");
    }
    if (remap01) {
      label = label == 0.0 ? -1.0 : (label > 0.0 ? 1.0 : -1.0);
    } else if (label == 0.0) {
      throw ParseError(line_number, "label 0 not allowed (use the 0/1 remap flag)");
    } else {
      label = label > 0.0 ? 1.0 : -1.0;
    }

    std::vector<SparseEntry> row;
    int prev_index = 0;
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) {
        throw ParseError(line_number, "malformed token '" + token + "' (expected index:value)");
      }
      int index;
      double value;
      if (!parse_int(std::string_view(token).substr(0, colon), index) || index < 1) {
        throw ParseError(line_number, "malformed index in '" + token + "'");
      }
      if (!parse_double(std::string_view(token).substr(colon + 1), value)) {
        throw ParseError(line_number, "malformed value in '" + token + "'");
      }
      if (index <= prev_index) {
        throw ParseError(line_number, "indices must be strictly increasing");
      }
      prev_index = index;
      row.push_back({index, value});
      data.dim = std::max(data.dim, index);
    }
    data.rows.push_back(std::move(row));
    data.labels.push_back(label);
  }
  return data;
}

void write_libsvm(const RawDataset& data, std::ostream& out) {
  std::string line;
  for (std::size_t i = 0; i < data.rows.size(); ++i) {
    line.clear();
    append_double(line, data.labels[i]);
    for (const SparseEntry& entry : data.rows[i]) {
      line.push_back(' ');
      line += std::to_string(entry.index);
      line.push_back(':');
      append_double(line, entry.value);
    }
    line.push_back('\n');
    out << line;
  }
}

RawDataset load_libsvm_file(const std::string& path, bool remap01) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  std::string text = buffer.str();
  if (path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0) {
    text = gunzip(text);
  }
  std::istringstream stream(text);
  return parse_libsvm(stream, remap01);
}

Dataset to_dense(const RawDataset& raw, std::string source) {
  Dataset out;
  out.source = std::move(source);
  const int n = static_cast<int>(raw.rows.size());
  out.rows = linalg::Matrix(n, raw.dim);
  out.labels.resize(n);
  for (int i = 0; i < n; ++i) {
    out.labels[i] = raw.labels[i] > 0.0 ? 1 : -1;
    for (const SparseEntry& entry : raw.rows[i]) {
      out.rows(i, entry.index - 1) = entry.value;
    }
  }
  return out;
}

NormalizeOutcome normalize_rows(const Dataset& input) {
  NormalizeOutcome out;
  const int n = input.rows.rows();
  const int d = input.rows.cols();
  std::vector<int> keep;
  keep.reserve(n);
  for (int i = 0; i < n; ++i) {
    double norm_sq = 0.0;
    for (int j = 0; j < d; ++j) norm_sq += input.rows(i, j) * input.rows(i, j);
    if (norm_sq == 0.0) {
      ++out.dropped_rows;
    } else {
      keep.push_back(i);
    }
  }
  out.dataset.source = input.source;
  out.dataset.rows = linalg::Matrix(static_cast<int>(keep.size()), d);
  out.dataset.labels.resize(keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const int i = keep[r];
    double norm_sq = 0.0;
    for (int j = 0; j < d; ++j) norm_sq += input.rows(i, j) * input.rows(i, j);
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (int j = 0; j < d; ++j) out.dataset.rows(r, j) = input.rows(i, j) * inv;
    out.dataset.labels[r] = input.labels[i];
  }
  return out;
}

Dataset synth_logistic(int n, int d, std::uint64_t seed, double separation) {
  if (n < 1 || d < 1) throw std::invalid_argument("synth_logistic: n and d must be >= 1");
  rng::Engine engine(seed);
  const linalg::Vector plane = rng::unit_sphere_vector(engine, d);

  Dataset out;
  {
    std::ostringstream name;
    name << "synth(n=" << n << ",d=" << d << ",seed=" << seed << ",separation=" << separation
         << ")";
    out.source = name.str();
  }
  out.rows = linalg::Matrix(n, d);
  out.labels.resize(n);
  const double margin_scale = std::sqrt(static_cast<double>(d));
  for (int i = 0; i < n; ++i) {
    linalg::Vector row = rng::unit_sphere_vector(engine, d);
    double margin = linalg::dot(row, plane);
    for (int j = 0; j < d; ++j) out.rows(i, j) = row[j];
    // P(b = +1) = sigmoid(separation * scaled margin); separation = inf
    // degenerates to the noiseless sign rule.
    double p;
    if (std::isinf(separation)) {
      p = margin >= 0.0 ? 1.0 : 0.0;
    } else {
      p = sigmoid(separation * margin * margin_scale);
    }
    out.labels[i] = engine.uniform() < p ? 1 : -1;
  }
  return out;
}

}  // namespace cubicqn
