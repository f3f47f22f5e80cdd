#include <doctest.h>

#include <fstream>
#include <limits>
#include <set>

#include "bodyfit/error.hpp"
#include "bodyfit/handles.hpp"
#include "bodyfit/kmeans.hpp"
#include "bodyfit/random.hpp"
#include "bodyfit/spatial_index.hpp"
#include "support/fixtures.hpp"

using namespace bodyfit;
using nlohmann::json;

namespace {

// Square pyramid: 5 vertices, 6 faces, closed.
TriMesh pyramid(const Vec3& at) {
  std::vector<Vec3> v = {Vec3(-0.5, -0.5, 0), Vec3(0.5, -0.5, 0), Vec3(0.5, 0.5, 0), Vec3(-0.5, 0.5, 0), Vec3(0, 0, 0.8)};
  for (Vec3& p : v) p += at;
  return TriMesh(v, {{0, 2, 1}, {0, 3, 2}, {0, 1, 4}, {1, 2, 4}, {2, 3, 4}, {3, 0, 4}});
}

Eigen::MatrixXd features(const TriMesh& m) {
  Eigen::MatrixXd f(static_cast<Eigen::Index>(m.num_vertices()), 6);
  for (std::size_t i = 0; i < m.num_vertices(); ++i) {
    f.row(static_cast<Eigen::Index>(i)) << m.vertices()[i].transpose(), m.normals()[i].transpose();
  }
  return f;
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

json builtin_metadata_json() { return template_metadata_to_json(fixtures::body_template().metadata); }

}  // namespace

TEST_CASE("two separated clusters: k-means agrees with exhaustive 2-means") {
  const TriMesh m = compute_vertex_normals(merge(pyramid(Vec3::Zero()), pyramid(Vec3(10, 0, 0))));
  REQUIRE(m.num_vertices() == 10);
  const Eigen::MatrixXd f = features(m);

  // Oracle: every 2-partition, minimum within-cluster sum of squares.
  double best = std::numeric_limits<double>::infinity();
  unsigned best_mask = 0;
  for (unsigned mask = 1; mask < (1u << 10) - 1; ++mask) {
    Eigen::RowVectorXd c[2] = {Eigen::RowVectorXd::Zero(6), Eigen::RowVectorXd::Zero(6)};
    int n[2] = {0, 0};
    for (int i = 0; i < 10; ++i) {
      const int s = (mask >> i) & 1u;
      c[s] += f.row(i);
      ++n[s];
    }
    c[0] /= n[0];
    c[1] /= n[1];
    double sse = 0.0;
    for (int i = 0; i < 10; ++i) sse += (f.row(i) - c[(mask >> i) & 1u]).squaredNorm();
    if (sse < best) {
      best = sse;
      best_mask = mask;
    }
  }

  const KMeansResult km = kmeans(f, 2, KMeansOptions{300, 1e-7, 5});
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const bool same_oracle = ((best_mask >> i) & 1u) == ((best_mask >> j) & 1u);
      CHECK((km.assignment[static_cast<std::size_t>(i)] == km.assignment[static_cast<std::size_t>(j)]) == same_oracle);
    }
  }

  const auto anchors = select_anchor_handles(m, {}, 2, 5);
  REQUIRE(anchors.size() == 2);
  const bool left0 = anchors[0].vertex_index < 5;
  const bool left1 = anchors[1].vertex_index < 5;
  CHECK(left0 != left1);
}

TEST_CASE("anchor selection edge cases") {
  const TriMesh m = compute_vertex_normals(merge(pyramid(Vec3::Zero()), pyramid(Vec3(3, 1, 0))));
  SUBCASE("k equals the number of eligible vertices") {
    const std::vector<int> excluded = {1, 7};
    const auto a = select_anchor_handles(m, excluded, 8, 2);
    std::set<int> got;
    for (const auto& h : a) got.insert(h.vertex_index);
    CHECK(got == std::set<int>{0, 2, 3, 4, 5, 6, 8, 9});
  }
  SUBCASE("too few eligible vertices") {
    CHECK(kind_of([&] { (void)select_anchor_handles(m, {0, 1, 2}, 8, 0); }) == ErrorKind::InvalidArgument);
  }
  SUBCASE("normals are required") {
    CHECK_THROWS_AS((void)select_anchor_handles(merge(pyramid(Vec3::Zero()), pyramid(Vec3(3, 1, 0))), {}, 2, 0), Error);
  }
}

TEST_CASE("anchors on the body template") {
  const BodyTemplate& t = fixtures::body_template();
  const TriMesh m = compute_vertex_normals(t.mesh);
  const auto a200 = select_anchor_handles(m, t.metadata.excluded, 200, 0);
  REQUIRE(a200.size() == 200);

  const std::set<int> excluded(t.metadata.excluded.begin(), t.metadata.excluded.end());
  std::set<int> ids;
  for (const AnchorHandle& a : a200) {
    ids.insert(a.vertex_index);
    CHECK(excluded.count(a.vertex_index) == 0);
    CHECK(std::abs(a.constraint_normal.norm() - 1.0) < 1e-6);
    CHECK_FALSE(a.active);
    CHECK(a.movement == 0.0);
  }
  CHECK(ids.size() == 200);

  CHECK(select_anchor_handles(m, t.metadata.excluded, 200, 0) == a200);
  CHECK(anchors_to_json(select_anchor_handles(m, t.metadata.excluded, 200, 0)).dump() == anchors_to_json(a200).dump());

  // Coverage radius does not grow when going from 100 to 200 anchors.
  auto coverage = [&](const std::vector<AnchorHandle>& anchors) {
    std::vector<Vec3> pts;
    for (const auto& a : anchors) pts.push_back(m.vertices()[static_cast<std::size_t>(a.vertex_index)]);
    const KdTree tree(pts);
    double worst = 0.0;
    for (const Vec3& p : m.vertices()) worst = std::max(worst, tree.nearest(p).squared_distance);
    return std::sqrt(worst);
  };
  const double r100 = coverage(select_anchor_handles(m, t.metadata.excluded, 100, 0));
  const double r200 = coverage(a200);
  CHECK(std::isfinite(r100));
  CHECK(r200 <= r100);
}

TEST_CASE("joint positions") {
  const TriMesh m({Vec3(0, 0, 0), Vec3(2, 0, 0), Vec3(0, 3, 0), Vec3(1, 1, 4)}, {{0, 1, 2}, {0, 1, 3}});
  const std::vector<JointHandleGroup> groups = {{"head", {0, 1}}, {"waist", {3}}};
  const auto p = joint_positions(m, groups);
  CHECK(p[0] == Vec3(1, 0, 0));
  CHECK(p[1] == Vec3(1, 1, 4));
  CHECK(kind_of([&] { (void)joint_positions(m, {{"head", {}}}); }) == ErrorKind::InvalidArgument);
  CHECK(kind_of([&] { (void)joint_positions(m, {{"head", {9}}}); }) == ErrorKind::IndexOutOfRange);

  const BodyTemplate& t = fixtures::body_template();
  const Eigen::Matrix3d r = Eigen::AngleAxisd(0.7, Vec3(1, 2, 3).normalized()).toRotationMatrix();
  const Vec3 off(0.3, -1.0, 2.0);
  const auto base = joint_positions(t.mesh, t.metadata.joints);
  const auto moved = joint_positions(transformed(t.mesh, r, off), t.metadata.joints);
  for (std::size_t j = 0; j < base.size(); ++j) CHECK((moved[j] - (r * base[j] + off)).norm() < 1e-12);
}

TEST_CASE("template metadata") {
  const BodyTemplate& t = fixtures::body_template();
  const std::size_t nv = t.mesh.num_vertices();

  SUBCASE("built-in metadata: 10 disjoint groups in vocabulary order") {
    REQUIRE(t.metadata.joints.size() == kNumJoints);
    std::set<int> seen;
    for (std::size_t j = 0; j < kNumJoints; ++j) {
      CHECK(t.metadata.joints[j].joint_name == kJointNames[j]);
      CHECK(t.metadata.joints[j].vertex_indices.size() >= 10);
      CHECK(t.metadata.joints[j].vertex_indices.size() <= 30);
      for (int v : t.metadata.joints[j].vertex_indices) CHECK(seen.insert(v).second);
    }
    CHECK_FALSE(t.metadata.excluded.empty());
  }
  SUBCASE("JSON round trip and file loading") {
    const auto parsed = parse_template_metadata(builtin_metadata_json(), nv);
    CHECK(parsed.joints == t.metadata.joints);
    CHECK(parsed.excluded == t.metadata.excluded);
    const auto path = fixtures::scratch_dir("meta") / "meta.json";
    std::ofstream(path) << builtin_metadata_json().dump();
    CHECK(load_template_metadata(path, nv).joints == t.metadata.joints);
  }
  SUBCASE("nine joints") {
    json doc = builtin_metadata_json();
    doc["joints"].erase("knee_l");
    CHECK(kind_of([&] { (void)parse_template_metadata(doc, nv); }) == ErrorKind::MissingJoint);
  }
  SUBCASE("index out of range") {
    json doc = builtin_metadata_json();
    doc["joints"]["head"].push_back(static_cast<int>(nv));
    CHECK(kind_of([&] { (void)parse_template_metadata(doc, nv); }) == ErrorKind::IndexOutOfRange);
  }
  SUBCASE("vertex shared by two groups") {
    json doc = builtin_metadata_json();
    doc["joints"]["waist"].push_back(doc["joints"]["head"][0]);
    CHECK(kind_of([&] { (void)parse_template_metadata(doc, nv); }) == ErrorKind::DuplicateVertex);
  }
  SUBCASE("unknown joint name") {
    json doc = builtin_metadata_json();
    doc["joints"]["tail"] = json::array({0});
    CHECK(kind_of([&] { (void)parse_template_metadata(doc, nv); }) == ErrorKind::Parse);
  }
}

TEST_CASE("anchor normals follow the current mesh") {
  const TriMesh m = compute_vertex_normals(pyramid(Vec3::Zero()));
  std::vector<AnchorHandle> anchors = {{4, Vec3::UnitX(), false, 0.0}};
  refresh_anchor_normals(m, anchors);
  CHECK((anchors[0].constraint_normal - m.normals()[4]).norm() < 1e-15);
}
