#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "driftlab/error.hpp"
#include "driftlab/io.hpp"

using namespace driftlab;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream ss(text);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

std::string join(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += l + '\n';
  return s;
}

template <typename Fn>
int parse_error_line(Fn&& fn) {
  try {
    fn();
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("driftlab_io_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, -2.5e-300, 1.0 / 3.0, 6.02214076e23, 0.0, std::numeric_limits<double>::denorm_min()}) {
    CAPTURE(v);
    double back = 0.0;
    const std::string text = format_double(v);
    std::from_chars(text.data(), text.data() + text.size(), back);
    CHECK(back == v);
  }
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("mesh round trip is exact") {
  auto m = build_disk_mesh(2);
  std::stringstream ss;
  write_mesh(ss, *m);
  auto r = read_mesh(ss);
  REQUIRE(r->num_vertices() == m->num_vertices());
  REQUIRE(r->num_triangles() == m->num_triangles());
  REQUIRE(r->boundary_edges().size() == m->boundary_edges().size());
  CHECK(r->level() == 2);
  for (std::size_t i = 0; i < m->num_vertices(); ++i) {
    CHECK(r->vertices()[i].x() == m->vertices()[i].x());
    CHECK(r->vertices()[i].y() == m->vertices()[i].y());
  }
  for (std::size_t t = 0; t < m->num_triangles(); ++t) CHECK(r->triangles()[t] == m->triangles()[t]);
  for (std::size_t e = 0; e < m->boundary_edges().size(); ++e) {
    CHECK(r->boundary_edges()[e].v == m->boundary_edges()[e].v);
    CHECK(r->boundary_edges()[e].cell == m->boundary_edges()[e].cell);
    CHECK(r->boundary_edges()[e].angle == doctest::Approx(m->boundary_edges()[e].angle).epsilon(1e-14));
  }
  CHECK(r->h() == m->h());
}

TEST_CASE("mesh parse errors carry line numbers") {
  auto m = build_disk_mesh(1);
  std::stringstream ss;
  write_mesh(ss, *m);
  const auto lines = lines_of(ss.str());

  auto parse = [](const std::string& text) {
    std::istringstream is(text);
    return read_mesh(is);
  };
  SUBCASE("bad header") {
    auto l = lines;
    l[0] = "diskmesh v2";
    CHECK(parse_error_line([&] { parse(join(l)); }) == 1);
  }
  SUBCASE("malformed vertex") {
    auto l = lines;
    l[4] = "0.5 abc";
    CHECK(parse_error_line([&] { parse(join(l)); }) == 5);
  }
  SUBCASE("index out of range") {
    auto l = lines;
    const std::size_t tri_line = 2 + m->num_vertices();
    l[tri_line] = "0 1 999";
    CHECK(parse_error_line([&] { parse(join(l)); }) == static_cast<int>(tri_line + 1));
  }
  SUBCASE("clockwise triangle") {
    auto l = lines;
    const std::size_t tri_line = 2 + m->num_vertices();
    const auto& t = m->triangles()[0];
    l[tri_line] = std::to_string(t[0]) + " " + std::to_string(t[2]) + " " + std::to_string(t[1]);
    CHECK(parse_error_line([&] { parse(join(l)); }) == static_cast<int>(tri_line + 1));
  }
  SUBCASE("truncated") {
    auto l = lines;
    l.resize(10);
    CHECK(parse_error_line([&] { parse(join(l)); }) == 11);
  }
}

TEST_CASE("field round trips are exact") {
  auto m = build_disk_mesh(2);
  ScalarField f = interpolate(m, [](const Vec2& p) { return std::sin(3 * p.x()) / 7.0 + p.y(); });
  Eigen::VectorXd fv = f.values();
  fv[1] = std::numeric_limits<double>::denorm_min();
  f = ScalarField(m, fv);
  CellVectorField g = sample_cells(m, [](const Vec2& p) -> Vec2 { return Vec2(p.y() / 3.0, std::exp(p.x())); });
  std::stringstream sf, sg;
  write_field(sf, f);
  write_field(sg, g);
  CHECK(read_scalar_field(sf, m).values() == f.values());
  const auto rg = read_cell_field(sg, m);
  for (std::size_t t = 0; t < m->num_triangles(); ++t) CHECK(rg[t] == g[t]);
}

TEST_CASE("field parse errors") {
  auto m = build_disk_mesh(1);
  auto coarse = build_disk_mesh(0);
  std::stringstream sf;
  write_field(sf, ScalarField(m));
  const std::string text = sf.str();
  {
    std::istringstream is(text);
    CHECK(parse_error_line([&] { read_cell_field(is, m); }) == 2);
  }
  {
    std::istringstream is(text);
    CHECK(parse_error_line([&] { read_scalar_field(is, coarse); }) == 2);
  }
  auto l = lines_of(text);
  l[7] = "nan";
  {
    std::istringstream is(join(l));
    CHECK(parse_error_line([&] { read_scalar_field(is, m); }) == 8);
  }
}

TEST_CASE("grid round trip") {
  PeriodicGrid g{3.0, 16};
  GridField f = sample_grid(g, [](const Vec2& p) { return p.x() - 2 * p.y(); });
  std::stringstream ss;
  write_grid(ss, f);
  GridField r = read_grid(ss);
  CHECK(r.grid.N == 16);
  CHECK(r.grid.L == 3.0);
  CHECK(r.data == f.data);

  std::string bytes = ss.str();
  std::istringstream cut(bytes.substr(0, bytes.size() / 2));
  CHECK_THROWS_AS(read_grid(cut), ParseError);
  std::istringstream empty("");
  CHECK_THROWS_AS(read_grid(empty), ParseError);
}

TEST_CASE("csv writers") {
  HardyReport r;
  r.l1 = 1.5;
  r.riesz_l1 = {0.25, 0.125};
  r.total = 1.875;
  r.grid = PeriodicGrid{4.0, 64};
  CHECK(hardy_csv_header() == "l1,riesz1_l1,riesz2_l1,total,mean,L,N");
  CHECK(hardy_csv_row(r) == "1.5,0.25,0.125,1.875,0,4,64");

  std::stringstream ss;
  write_trace_csv(ss, {{0.5, 0.25, 0.1}, {0.01, 0.02, 0.03}});
  CHECK(ss.str() == "iter,dAtilde_inf,dB_h1,residual_ab\n1,0.5,0.25,0.1\n2,0.01,0.02,0.03\n");
}

TEST_CASE("problem bundle round trip") {
  auto m = build_disk_mesh(2);
  const auto nb = static_cast<Eigen::Index>(m->boundary_vertices().size());
  BoundaryValues g(nb);
  for (Eigen::Index k = 0; k < nb; ++k) g[k] = 0.1 * static_cast<double>(k) - 0.3;
  DualVector f = DualVector::LinSpaced(static_cast<Eigen::Index>(m->num_vertices()), -1.0, 2.0);
  DriftProblem prob{sample_cells(m, [](const Vec2& p) -> Vec2 { return Vec2(p.y(), -p.x() / 3); }), g, f};

  const fs::path dir = scratch("bundle");
  write_bundle(dir, prob);
  for (const char* name : {"mesh.txt", "b.field", "g.csv", "f.field"}) CHECK(fs::exists(dir / name));
  ProblemBundle r = read_bundle(dir);
  CHECK(r.mesh->num_vertices() == m->num_vertices());
  CHECK(r.problem.g == g);
  REQUIRE(r.problem.f.has_value());
  CHECK(*r.problem.f == f);
  for (std::size_t t = 0; t < m->num_triangles(); ++t) CHECK(r.problem.b[t] == prob.b[t]);

  SUBCASE("without source") {
    fs::remove(dir / "f.field");
    CHECK_FALSE(read_bundle(dir).problem.f.has_value());
  }
  SUBCASE("interior vertex in g.csv") {
    std::ofstream(dir / "g.csv", std::ios::app) << "0,1.0\n";
    CHECK(parse_error_line([&] { read_bundle(dir); }) == static_cast<int>(nb) + 2);
  }
  SUBCASE("malformed value") {
    std::ofstream(dir / "g.csv") << "vertex,value\n" << m->boundary_vertices()[0] << ",oops\n";
    CHECK(parse_error_line([&] { read_bundle(dir); }) == 2);
  }
  SUBCASE("missing boundary vertex") {
    std::ofstream(dir / "g.csv") << "vertex,value\n";
    CHECK_THROWS_AS(read_bundle(dir), ParseError);
  }
  SUBCASE("missing directory") { CHECK_THROWS_AS(read_bundle(scratch("nowhere")), IoError); }
  fs::remove_all(dir);
}
