#include "swr/io.hpp"

#include <json.hpp>

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

namespace swr {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_real(const std::string& text, Index line) {
  const char* begin = text.c_str();
  char* end = nullptr;
  errno = 0;
  const double value = std::strtod(begin, &end);
  while (end && (*end == ' ' || *end == '\r')) ++end;
  if (end == begin || *end != '\0') {
    throw InputError("line " + std::to_string(line) + ": not a number: '" + text + "'");
  }
  return value;
}

/// Data rows of a header-led CSV whose first column is the step index.
std::vector<std::vector<double>> read_table(std::istream& in, Index min_cols, std::vector<std::string>& header) {
  std::string line;
  if (!std::getline(in, line)) throw InputError("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  header = split_fields(line);
  if (static_cast<Index>(header.size()) < min_cols) throw ShapeError("CSV header has too few columns");

  std::vector<std::vector<double>> rows;
  Index line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw ShapeError("line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                       " fields, header has " + std::to_string(header.size()));
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_real(f, line_no));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ShapeError("CSV has no data rows");
  return rows;
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  return in;
}

}  // namespace

Inputs SequenceFile::inputs() const {
  if (x0.size() == 0) return Inputs(u);
  return Inputs(u, x0);
}

std::string format_real(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

void write_sequence_csv(std::ostream& out, const Vector<double>& a, const TimeMajor<double>& u, int digits) {
  if (a.size() != u.rows()) throw ShapeError("coefficient and input lengths differ");
  out << "t,a";
  for (Index c = 0; c < u.cols(); ++c) out << ",u_" << c + 1;
  out << '\n';
  for (Index i = 0; i < u.rows(); ++i) {
    out << i + 1 << ',' << format_real(a[i], digits);
    for (Index c = 0; c < u.cols(); ++c) out << ',' << format_real(u(i, c), digits);
    out << '\n';
  }
}

void write_states_csv(std::ostream& out, const TimeMajor<double>& x, int digits) {
  out << 't';
  for (Index c = 0; c < x.cols(); ++c) out << ",x_" << c + 1;
  out << '\n';
  for (Index i = 0; i < x.rows(); ++i) {
    out << i + 1;
    for (Index c = 0; c < x.cols(); ++c) out << ',' << format_real(x(i, c), digits);
    out << '\n';
  }
}

SequenceFile parse_sequence_csv(std::istream& in) {
  std::vector<std::string> header;
  const auto rows = read_table(in, 3, header);
  const Index n = static_cast<Index>(rows.size());
  const Index d = static_cast<Index>(header.size()) - 2;
  SequenceFile file;
  file.a.resize(n);
  file.u.resize(n, d);
  for (Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    file.a[i] = row[1];
    for (Index c = 0; c < d; ++c) file.u(i, c) = row[static_cast<std::size_t>(c + 2)];
  }
  return file;
}

TimeMajor<double> parse_states_csv(std::istream& in) {
  std::vector<std::string> header;
  const auto rows = read_table(in, 2, header);
  const Index n = static_cast<Index>(rows.size());
  const Index d = static_cast<Index>(header.size()) - 1;
  TimeMajor<double> x(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < d; ++c) x(i, c) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c + 1)];
  }
  return x;
}

SequenceFile parse_sequence_json(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("a") || !doc.contains("u")) {
    throw InputError("JSON sequence needs \"a\" and \"u\"");
  }
  try {
    const auto a = doc.at("a").get<std::vector<double>>();
    const auto u = doc.at("u").get<std::vector<std::vector<double>>>();
    if (a.size() != u.size()) throw ShapeError("\"a\" and \"u\" lengths differ");
    if (a.empty()) throw ShapeError("empty sequence");
    const Index n = static_cast<Index>(a.size());
    const Index d = static_cast<Index>(u.front().size());
    SequenceFile file;
    file.a = Eigen::Map<const Vector<double>>(a.data(), n);
    file.u.resize(n, d);
    for (Index i = 0; i < n; ++i) {
      const auto& row = u[static_cast<std::size_t>(i)];
      if (static_cast<Index>(row.size()) != d) throw ShapeError("ragged \"u\" rows");
      for (Index c = 0; c < d; ++c) file.u(i, c) = row[static_cast<std::size_t>(c)];
    }
    if (doc.contains("x0")) {
      const auto x0 = doc.at("x0").get<std::vector<double>>();
      if (static_cast<Index>(x0.size()) != d) throw ShapeError("\"x0\" length differs from channel count");
      file.x0 = Eigen::Map<const RowVector<double>>(x0.data(), d);
    }
    return file;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad JSON sequence: ") + e.what());
  }
}

SequenceFile read_sequence(const std::string& path) {
  std::ifstream in = open(path);
  const bool json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
  return json ? parse_sequence_json(in) : parse_sequence_csv(in);
}

TimeMajor<double> read_states(const std::string& path) {
  std::ifstream in = open(path);
  return parse_states_csv(in);
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char ch : bytes) {
    hash ^= ch;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace swr
