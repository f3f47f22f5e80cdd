#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "bodyfit/error.hpp"
#include "bodyfit/laplacian.hpp"
#include "bodyfit/mesh.hpp"
#include "bodyfit/mesh_io.hpp"
#include "bodyfit/primitives.hpp"
#include "bodyfit/random.hpp"
#include "support/fixtures.hpp"

using namespace bodyfit;
namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::Parse;
}

Eigen::Matrix3d random_rotation(Rng& rng) {
  const Vec3 axis = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
  return Eigen::AngleAxisd(rng.uniform(0.0, 6.28), axis).toRotationMatrix();
}

}  // namespace

TEST_CASE("TriMesh rejects broken index data") {
  CHECK(kind_of([] { TriMesh({}, {}); }) == ErrorKind::InvalidMesh);
  CHECK(kind_of([] { TriMesh({Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY()}, {{0, 1, 5}}); }) ==
        ErrorKind::IndexOutOfRange);
  CHECK(kind_of([] { TriMesh({Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY()}, {{0, 0, 1}}); }) ==
        ErrorKind::InvalidMesh);
  const TriMesh ok({Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY()}, {{0, 1, 2}});
  CHECK_FALSE(ok.has_normals());
  CHECK(kind_of([&] { (void)ok.normals(); }) == ErrorKind::InvalidMesh);
}

TEST_CASE("OBJ loading") {
  const fs::path dir = fixtures::scratch_dir("obj");

  SUBCASE("single triangle") {
    write_text(dir / "tri.obj", "# one face\nv 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n");
    const TriMesh m = load_mesh(dir / "tri.obj");
    CHECK(m.num_vertices() == 3);
    CHECK(m.num_faces() == 1);
  }
  SUBCASE("quads are fan split and slash records accepted") {
    write_text(dir / "quad.obj", "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nvn 0 0 1\nf 1//1 2//1 3//1 4//1\n");
    const TriMesh m = load_mesh(dir / "quad.obj");
    REQUIRE(m.num_faces() == 2);
    CHECK(m.faces()[0] == Face{0, 1, 2});
    CHECK(m.faces()[1] == Face{0, 2, 3});
  }
  SUBCASE("negative indices count back from the last vertex") {
    write_text(dir / "neg.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n");
    CHECK(load_mesh(dir / "neg.obj").faces()[0] == Face{0, 1, 2});
  }
  SUBCASE("index out of range names the line") {
    write_text(dir / "bad.obj", "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 99\n");
    try {
      (void)load_mesh(dir / "bad.obj");
      FAIL("no error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::IndexOutOfRange);
      CHECK(std::string(e.what()).find("bad.obj:4") != std::string::npos);
    }
  }
  SUBCASE("garbage and empty files") {
    write_text(dir / "junk.obj", "v 0 zero 0\n");
    CHECK(kind_of([&] { (void)load_mesh(dir / "junk.obj"); }) == ErrorKind::Parse);
    write_text(dir / "empty.obj", "# nothing\n");
    CHECK(kind_of([&] { (void)load_mesh(dir / "empty.obj"); }) == ErrorKind::InvalidMesh);
    CHECK(kind_of([&] { (void)load_mesh(dir / "missing.obj"); }) == ErrorKind::Io);
  }
}

TEST_CASE("save and reload keeps vertex and face data bit-exact") {
  const fs::path dir = fixtures::scratch_dir("roundtrip");
  Rng rng(7);
  std::vector<Vec3> v;
  for (const Vec3& p : make_icosphere(2, 0.9).vertices()) v.push_back(p + Vec3(rng.normal(), rng.normal(), rng.normal()) * 1e-3);
  const TriMesh m(v, make_icosphere(2, 0.9).faces());
  for (const char* name : {"m.obj", "m.ply"}) {
    save_mesh(m, dir / name);
    const TriMesh back = load_mesh(dir / name);
    CHECK(back.faces() == m.faces());
    CHECK(back.vertices() == m.vertices());
  }
  save_ply(m, dir / "ascii.ply", false);
  const TriMesh ascii = load_mesh(dir / "ascii.ply");
  CHECK(ascii.faces() == m.faces());
  CHECK(ascii.vertices() == m.vertices());

  save_mesh(m, dir / "again.obj");
  save_mesh(load_mesh(dir / "again.obj"), dir / "again2.obj");
  std::ifstream a(dir / "again.obj"), b(dir / "again2.obj");
  const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
  CHECK(sa == sb);
}

TEST_CASE("vertex normals") {
  SUBCASE("flat grid points up") {
    const TriMesh g = compute_vertex_normals(make_grid(5, 4, 2.0, 1.0));
    for (const Vec3& n : g.normals()) CHECK((n - Vec3::UnitZ()).norm() < 1e-12);
  }
  SUBCASE("octahedron normals are radial") {
    const TriMesh o = compute_vertex_normals(make_octahedron(1.0));
    for (std::size_t i = 0; i < o.num_vertices(); ++i) {
      CHECK((o.normals()[i] - o.vertices()[i].normalized()).norm() < 1e-12);
    }
  }
  SUBCASE("icosphere normals follow the position direction") {
    // Area weighting is first-order accurate; the 1e-3 rad bound is first met at level 7.
    const TriMesh s = compute_vertex_normals(make_icosphere(7, 1.0));
    double worst = 0.0;
    for (std::size_t i = 0; i < s.num_vertices(); ++i) {
      const double c = std::clamp(s.normals()[i].dot(s.vertices()[i].normalized()), -1.0, 1.0);
      worst = std::max(worst, std::acos(c));
    }
    CHECK(worst < 1e-3);
  }
  SUBCASE("unit length, translation invariant, rotation equivariant") {
    Rng rng(3);
    const TriMesh base = compute_vertex_normals(fixtures::body_template().mesh);
    for (const Vec3& n : base.normals()) REQUIRE(std::abs(n.norm() - 1.0) < 1e-6);
    const TriMesh moved = compute_vertex_normals(translated(base, Vec3(3, -2, 1)));
    const Eigen::Matrix3d r = random_rotation(rng);
    const TriMesh turned = compute_vertex_normals(transformed(base, r, Vec3::Zero()));
    double dt = 0.0, dr = 0.0;
    for (std::size_t i = 0; i < base.num_vertices(); ++i) {
      dt = std::max(dt, (moved.normals()[i] - base.normals()[i]).norm());
      dr = std::max(dr, (turned.normals()[i] - r * base.normals()[i]).norm());
    }
    CHECK(dt < 1e-6);
    CHECK(dr < 1e-6);
  }
  SUBCASE("isolated vertex gets +z and degenerate faces add nothing") {
    const TriMesh m = compute_vertex_normals(
        TriMesh({Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY(), Vec3(5, 5, 5), Vec3(2, 0, 0)}, {{0, 1, 2}, {0, 1, 4}}));
    CHECK(m.normals()[3] == Vec3::UnitZ());
    CHECK((m.normals()[4] - Vec3::UnitZ()).norm() < 1e-12);
  }
}

TEST_CASE("midpoint subdivision") {
  SUBCASE("single triangle") {
    const TriMesh s = subdivide_midpoint(TriMesh({Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY()}, {{0, 1, 2}}));
    CHECK(s.num_vertices() == 6);
    CHECK(s.num_faces() == 4);
  }
  SUBCASE("V + E and 4F on closed meshes") {
    for (const TriMesh& m : {make_octahedron(), make_icosphere(2), make_cube(), make_uv_sphere(6, 9)}) {
      const std::size_t e = unique_edges(m).size();
      const TriMesh s = subdivide_midpoint(m);
      CHECK(s.num_vertices() == m.num_vertices() + e);
      CHECK(s.num_faces() == 4 * m.num_faces());
    }
  }
  SUBCASE("template counts") {
    const TriMesh& t = fixtures::body_template().mesh;
    CHECK(t.num_vertices() == 6890);
    CHECK(t.num_faces() == 13776);
    CHECK(unique_edges(t).size() == 20664);
    const TriMesh s = subdivide_midpoint(t);
    CHECK(s.num_vertices() == 27554);
    CHECK(s.num_faces() == 55104);
  }
  SUBCASE("originals kept, midpoints exact, winding kept") {
    const TriMesh m = make_icosphere(1, 2.0);
    const TriMesh s = subdivide_midpoint(m);
    const auto edges = unique_edges(m);
    for (std::size_t i = 0; i < m.num_vertices(); ++i) CHECK(s.vertices()[i] == m.vertices()[i]);
    for (std::size_t k = 0; k < edges.size(); ++k) {
      const auto [a, b] = edges[k];
      const Vec3 mid = 0.5 * (m.vertices()[static_cast<std::size_t>(a)] + m.vertices()[static_cast<std::size_t>(b)]);
      CHECK((s.vertices()[m.num_vertices() + k] - mid).norm() == 0.0);
    }
    for (std::size_t f = 0; f < s.num_faces(); ++f) {
      const Vec3 c = (s.vertices()[static_cast<std::size_t>(s.faces()[f][0])] +
                      s.vertices()[static_cast<std::size_t>(s.faces()[f][1])] +
                      s.vertices()[static_cast<std::size_t>(s.faces()[f][2])]) / 3.0;
      CHECK(face_normal(s, f).dot(c) > 0.0);
    }
  }
}

TEST_CASE("uniform Laplacian") {
  SUBCASE("matches the dense oracle built from edges") {
    const TriMesh m = make_icosphere(1);
    const auto edges = unique_edges(m);
    const Eigen::MatrixXd oracle = fixtures::dense_laplacian(m.num_vertices(), edges);
    const Eigen::MatrixXd got = Eigen::MatrixXd(build_laplacian(m).matrix());
    CHECK((got - oracle).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(got.rowwise().sum().cwiseAbs().maxCoeff() < 1e-14);
    // Pattern equals edge connectivity.
    std::set<std::pair<int, int>> pattern;
    for (Eigen::Index i = 0; i < got.rows(); ++i) {
      for (Eigen::Index j = 0; j < got.cols(); ++j) {
        if (i < j && got(i, j) != 0.0) pattern.emplace(static_cast<int>(i), static_cast<int>(j));
      }
    }
    CHECK(pattern == std::set<std::pair<int, int>>(edges.begin(), edges.end()));
  }
  SUBCASE("collinear path has zero middle delta") {
    const auto op = LaplacianOperator::from_edges(3, {{0, 1}, {1, 2}});
    const auto d = op.apply({Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(2, 0, 0)});
    CHECK(d[1].norm() == 0.0);
  }
  SUBCASE("neighbor mean minus delta reconstructs positions") {
    const TriMesh& t = fixtures::body_template().mesh;
    const LaplacianOperator op = build_laplacian(t);
    const auto d = op.apply(t.vertices());
    double worst = 0.0;
    for (std::size_t i = 0; i < t.num_vertices(); ++i) {
      Vec3 mean = Vec3::Zero();
      for (int j : op.neighbors()[i]) mean += t.vertices()[static_cast<std::size_t>(j)];
      mean /= static_cast<double>(op.neighbors()[i].size());
      worst = std::max(worst, (mean - d[i] - t.vertices()[i]).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-12);
  }
  SUBCASE("delta coordinates are translation invariant") {
    const TriMesh& t = fixtures::body_template().mesh;
    const LaplacianOperator op = build_laplacian(t);
    const auto a = op.apply(t.vertices());
    const auto b = op.apply(translated(t, Vec3(0.7, -1.3, 2.1)).vertices());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, (a[i] - b[i]).cwiseAbs().maxCoeff());
    CHECK(worst < 1e-9);
  }
  SUBCASE("isolated vertex is rejected") {
    CHECK(kind_of([] { (void)LaplacianOperator::from_edges(4, {{0, 1}, {1, 2}}); }) == ErrorKind::IsolatedVertex);
    const TriMesh m({Vec3::Zero(), Vec3::UnitX(), Vec3::UnitY(), Vec3(4, 4, 4)}, {{0, 1, 2}});
    CHECK(kind_of([&] { (void)build_laplacian(m); }) == ErrorKind::IsolatedVertex);
  }
}
