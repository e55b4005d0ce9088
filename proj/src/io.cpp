#include "driftlab/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <type_traits>

#include "driftlab/error.hpp"

namespace driftlab {

namespace {

// Numbers go through from_chars: stream extraction rejects subnormals.
template <typename T>
bool parse_token(std::istream& is, T& out) {
  std::string tok;
  if (!(is >> tok)) return false;
  if constexpr (std::is_arithmetic_v<T>) {
    const char* end = tok.data() + tok.size();
    const auto [ptr, ec] = std::from_chars(tok.data(), end, out);
    return ec == std::errc() && ptr == end;
  } else {
    out = std::move(tok);
    return true;
  }
}

// Line-oriented reader that tracks line numbers for error messages.
class LineReader {
 public:
  explicit LineReader(std::istream& is) : is_(is) {}

  std::istringstream next(const char* what) {
    std::string line;
    while (std::getline(is_, line)) {
      ++line_;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return std::istringstream(line);
    }
    throw ParseError(std::string("unexpected end of input, expected ") + what, line_ + 1);
  }

  template <typename... T>
  void read(const char* what, T&... out) {
    auto ss = next(what);
    if (!(parse_token(ss, out) && ...)) fail(std::string("malformed ") + what);
    std::string rest;
    if (ss >> rest) fail(std::string("trailing data after ") + what);
  }

  void expect(const std::string& header) {
    auto ss = next("header");
    std::string got;
    std::getline(ss, got);
    while (!got.empty() && (got.back() == '\r' || got.back() == ' ')) got.pop_back();
    if (got != header) fail("expected header '" + header + "'");
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, line_); }
  int line() const { return line_; }

 private:
  std::istream& is_;
  int line_ = 0;
};

void write_lines(std::ostream& os, const std::string& text) {
  os << text;
  if (!os) throw IoError("write failed");
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p);
  if (!os) throw IoError("cannot open " + p.string() + " for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& p) {
  std::ifstream is(p);
  if (!is) throw IoError("cannot open " + p.string());
  return is;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_mesh(std::ostream& os, const TriMesh& mesh) {
  std::ostringstream ss;
  ss << "diskmesh v1\n"
     << mesh.num_vertices() << ' ' << mesh.num_triangles() << ' ' << mesh.boundary_edges().size() << ' '
     << mesh.level() << '\n';
  for (const auto& v : mesh.vertices()) ss << format_double(v.x()) << ' ' << format_double(v.y()) << '\n';
  for (const auto& t : mesh.triangles()) ss << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  for (const auto& e : mesh.boundary_edges()) ss << e.v[0] << ' ' << e.v[1] << '\n';
  write_lines(os, ss.str());
}

MeshPtr read_mesh(std::istream& is) {
  LineReader in(is);
  in.expect("diskmesh v1");
  long nv = 0, nt = 0, nb = 0;
  int level = 0;
  in.read("mesh sizes", nv, nt, nb, level);
  if (nv < 3 || nt < 1 || nb < 3 || level < 0) in.fail("invalid mesh sizes");

  std::vector<Vec2> verts(static_cast<std::size_t>(nv));
  for (auto& v : verts) {
    double x = 0, y = 0;
    in.read("vertex", x, y);
    if (!std::isfinite(x) || !std::isfinite(y)) in.fail("non-finite vertex");
    v = Vec2(x, y);
  }
  auto check_index = [&](long i) {
    if (i < 0 || i >= nv) in.fail("vertex index out of range");
    return static_cast<int>(i);
  };
  std::vector<std::array<int, 3>> tris(static_cast<std::size_t>(nt));
  for (auto& t : tris) {
    long a = 0, b = 0, c = 0;
    in.read("triangle", a, b, c);
    t = {check_index(a), check_index(b), check_index(c)};
    const Vec2 e1 = verts[t[1]] - verts[t[0]], e2 = verts[t[2]] - verts[t[0]];
    if (e1.x() * e2.y() - e1.y() * e2.x() <= 0.0) in.fail("triangle is not counterclockwise");
  }
  std::vector<BoundaryEdge> edges(static_cast<std::size_t>(nb));
  for (auto& e : edges) {
    long a = 0, b = 0;
    in.read("boundary edge", a, b);
    e.v = {check_index(a), check_index(b)};
    const Vec2 mid = 0.5 * (verts[e.v[0]] + verts[e.v[1]]);
    double ang = std::atan2(mid.y(), mid.x());
    if (ang < 0) ang += 2 * std::numbers::pi;
    e.angle = ang;
    e.cell = -1;
  }
  auto mesh = std::make_shared<const TriMesh>(std::move(verts), std::move(tris), std::move(edges), level);
  for (const auto& e : mesh->boundary_edges())
    if (e.cell < 0) throw ParseError("boundary edge does not belong to a triangle", in.line());
  return mesh;
}

void write_field(std::ostream& os, const ScalarField& f) {
  std::ostringstream ss;
  ss << "diskfield v1\nvertex " << f.values().size() << '\n';
  for (Eigen::Index i = 0; i < f.values().size(); ++i) ss << format_double(f.values()[i]) << '\n';
  write_lines(os, ss.str());
}

void write_field(std::ostream& os, const CellVectorField& f) {
  std::ostringstream ss;
  ss << "diskfield v1\ncell " << f.values().size() << '\n';
  for (const auto& v : f.values()) ss << format_double(v.x()) << ' ' << format_double(v.y()) << '\n';
  write_lines(os, ss.str());
}

namespace {

std::size_t read_field_header(LineReader& in, const std::string& kind, std::size_t expected) {
  in.expect("diskfield v1");
  std::string got;
  long n = 0;
  in.read("field header", got, n);
  if (got != kind) in.fail("expected a " + kind + " field, got '" + got + "'");
  if (n < 0 || static_cast<std::size_t>(n) != expected) in.fail("field size does not match the mesh");
  return static_cast<std::size_t>(n);
}

}  // namespace

ScalarField read_scalar_field(std::istream& is, const MeshPtr& mesh) {
  LineReader in(is);
  const std::size_t n = read_field_header(in, "vertex", mesh->num_vertices());
  Eigen::VectorXd v(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    double x = 0;
    in.read("value", x);
    if (!std::isfinite(x)) in.fail("non-finite value");
    v[static_cast<Eigen::Index>(i)] = x;
  }
  return ScalarField(mesh, std::move(v));
}

CellVectorField read_cell_field(std::istream& is, const MeshPtr& mesh) {
  LineReader in(is);
  const std::size_t n = read_field_header(in, "cell", mesh->num_triangles());
  std::vector<Vec2> v(n);
  for (auto& x : v) {
    double a = 0, b = 0;
    in.read("cell vector", a, b);
    if (!std::isfinite(a) || !std::isfinite(b)) in.fail("non-finite value");
    x = Vec2(a, b);
  }
  return CellVectorField(mesh, std::move(v));
}

void write_grid(std::ostream& os, const GridField& f) {
  const std::int64_t n = f.grid.N;
  const double l = f.grid.L;
  os.write(reinterpret_cast<const char*>(&n), sizeof n);
  os.write(reinterpret_cast<const char*>(&l), sizeof l);
  os.write(reinterpret_cast<const char*>(f.data.data()), static_cast<std::streamsize>(f.data.size() * sizeof(double)));
  if (!os) throw IoError("grid write failed");
}

GridField read_grid(std::istream& is) {
  std::int64_t n = 0;
  double l = 0;
  is.read(reinterpret_cast<char*>(&n), sizeof n);
  is.read(reinterpret_cast<char*>(&l), sizeof l);
  if (!is) throw ParseError("truncated grid header", 1);
  if (n < 2 || n > (1 << 16)) throw ParseError("invalid grid size", 1);
  PeriodicGrid g{l, static_cast<int>(n)};
  std::vector<double> data(static_cast<std::size_t>(n * n));
  is.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double)));
  if (!is) throw ParseError("truncated grid data", 1);
  return GridField(g, std::move(data));
}

std::string hardy_csv_header() { return "l1,riesz1_l1,riesz2_l1,total,mean,L,N"; }

std::string hardy_csv_row(const HardyReport& r) {
  return format_double(r.l1) + ',' + format_double(r.riesz_l1[0]) + ',' + format_double(r.riesz_l1[1]) + ',' +
         format_double(r.total) + ',' + format_double(r.mean) + ',' + format_double(r.grid.L) + ',' +
         std::to_string(r.grid.N);
}

void write_trace_csv(std::ostream& os, const std::vector<TraceEntry>& trace) {
  std::ostringstream ss;
  ss << "iter,dAtilde_inf,dB_h1,residual_ab\n";
  for (std::size_t k = 0; k < trace.size(); ++k)
    ss << k + 1 << ',' << format_double(trace[k].dAtilde_inf) << ',' << format_double(trace[k].dB_h1) << ','
       << format_double(trace[k].residual_ab) << '\n';
  write_lines(os, ss.str());
}

void write_bundle(const std::filesystem::path& dir, const DriftProblem& prob) {
  std::filesystem::create_directories(dir);
  const TriMesh& mesh = prob.b.mesh();
  {
    auto os = open_out(dir / "mesh.txt");
    write_mesh(os, mesh);
  }
  {
    auto os = open_out(dir / "b.field");
    write_field(os, prob.b);
  }
  {
    auto os = open_out(dir / "g.csv");
    std::ostringstream ss;
    ss << "vertex,value\n";
    for (std::size_t k = 0; k < mesh.boundary_vertices().size(); ++k)
      ss << mesh.boundary_vertices()[k] << ',' << format_double(prob.g[static_cast<Eigen::Index>(k)]) << '\n';
    write_lines(os, ss.str());
  }
  if (prob.f) {
    auto os = open_out(dir / "f.field");
    write_field(os, ScalarField(prob.b.mesh_ptr(), *prob.f));
  }
}

ProblemBundle read_bundle(const std::filesystem::path& dir) {
  MeshPtr mesh;
  {
    auto is = open_in(dir / "mesh.txt");
    mesh = read_mesh(is);
  }
  auto bis = open_in(dir / "b.field");
  CellVectorField b = read_cell_field(bis, mesh);

  BoundaryValues g = BoundaryValues::Zero(static_cast<Eigen::Index>(mesh->boundary_vertices().size()));
  std::vector<char> seen(static_cast<std::size_t>(g.size()), 0);
  {
    auto is = open_in(dir / "g.csv");
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      if (lineno == 1 && line.rfind("vertex", 0) == 0) continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream ss(line);
      long v = 0;
      double val = 0;
      if (!parse_token(ss, v) || !parse_token(ss, val) || !std::isfinite(val)) throw ParseError("malformed boundary value", lineno);
      if (v < 0 || static_cast<std::size_t>(v) >= mesh->num_vertices() || mesh->boundary_slot(v) < 0)
        throw ParseError("not a boundary vertex: " + std::to_string(v), lineno);
      g[mesh->boundary_slot(v)] = val;
      seen[static_cast<std::size_t>(mesh->boundary_slot(v))] = 1;
    }
  }
  for (char s : seen)
    if (!s) throw ParseError("g.csv does not cover every boundary vertex", 0);

  std::optional<DualVector> f;
  if (std::filesystem::exists(dir / "f.field")) {
    auto is = open_in(dir / "f.field");
    f = read_scalar_field(is, mesh).values();
  }
  return ProblemBundle{mesh, DriftProblem{std::move(b), std::move(g), std::move(f)}};
}

}  // namespace driftlab
