#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "qrm/error.hpp"
#include "qrm/mesh.hpp"

namespace qrm {
namespace {

/// Yields whitespace-tokenized, comment-stripped, non-empty lines.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::istringstream& tokens) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_no_;
      if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      tokens.clear();
      tokens.str(line);
      return true;
    }
    return false;
  }

  int line() const { return line_no_; }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

[[noreturn]] void fail(const LineReader& r, const std::string& what) {
  throw FormatError("mesh file line " + std::to_string(r.line()) + ": " + what);
}

template <typename... T>
void read_exact(LineReader& r, std::istringstream& ss, const char* what, T&... out) {
  if (!r.next(ss)) throw FormatError(std::string("mesh file truncated while reading ") + what);
  (ss >> ... >> out);
  std::string extra;
  if (ss.fail() || (ss >> extra)) fail(r, std::string("malformed ") + what);
}

}  // namespace

MeshReadResult read_mesh(std::istream& in, const MeshReadOptions& options) {
  LineReader reader(in);
  std::istringstream ss;
  long long nv = 0;
  long long nt = 0;
  read_exact(reader, ss, "header", nv, nt);
  if (nv < 3 || nt < 1) fail(reader, "invalid vertex/triangle counts");

  std::vector<Point> vertices(static_cast<std::size_t>(nv));
  for (auto& p : vertices) read_exact(reader, ss, "vertex", p.x, p.y);

  MeshReadResult result;
  std::vector<std::array<int, 3>> triangles(static_cast<std::size_t>(nt));
  for (std::size_t t = 0; t < triangles.size(); ++t) {
    long long a = 0;
    long long b = 0;
    long long c = 0;
    read_exact(reader, ss, "triangle", a, b, c);
    for (long long v : {a, b, c}) {
      if (v < 0 || v >= nv) {
        fail(reader, "triangle " + std::to_string(t) + " references vertex " + std::to_string(v) +
                         " beyond range");
      }
    }
    std::array<int, 3> tri{static_cast<int>(a), static_cast<int>(b), static_cast<int>(c)};
    const Point p0 = vertices[tri[0]];
    const Point p1 = vertices[tri[1]];
    const Point p2 = vertices[tri[2]];
    const double area2 = (p1.x - p0.x) * (p2.y - p0.y) - (p1.y - p0.y) * (p2.x - p0.x);
    if (area2 == 0.0) fail(reader, "degenerate triangle " + std::to_string(t));
    if (area2 < 0.0) {
      if (options.strict) fail(reader, "clockwise triangle " + std::to_string(t));
      std::swap(tri[1], tri[2]);
      result.warnings.push_back("triangle " + std::to_string(t) + " reoriented to counter-clockwise");
    }
    triangles[t] = tri;
  }
  if (reader.next(ss)) fail(reader, "unexpected trailing content");

  try {
    result.mesh = Mesh(std::move(vertices), std::move(triangles));
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("invalid mesh: ") + e.what());
  }
  return result;
}

void write_mesh(std::ostream& out, const Mesh& mesh, const std::string& header) {
  if (!header.empty()) {
    std::istringstream lines(header);
    std::string line;
    while (std::getline(lines, line)) out << "# " << line << '\n';
  }
  out << mesh.num_vertices() << ' ' << mesh.num_triangles() << '\n';
  const auto old_precision = out.precision(17);
  for (const auto& p : mesh.vertices()) out << p.x << ' ' << p.y << '\n';
  out.precision(old_precision);
  for (const auto& t : mesh.triangles()) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

}  // namespace qrm
