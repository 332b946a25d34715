#include "rrsplit/mesh.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace rrsplit;

namespace {

double part_area(const CoupledMesh& m, Subdomain s) {
  double a = 0.0;
  for (const auto& t : m.triangles(s)) a += signed_area(m.nodes[t[0]], m.nodes[t[1]], m.nodes[t[2]]);
  return a;
}

bool touches(const CoupledMesh& m, Subdomain s, Index v) {
  return std::any_of(m.triangles(s).begin(), m.triangles(s).end(),
                     [&](const auto& t) { return std::find(t.begin(), t.end(), v) != t.end(); });
}

}  // namespace

TEST(UniformSplitMesh, FourByFourInterface) {
  const auto m = uniform_split_mesh(4);
  ASSERT_EQ(m.interface_nodes.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) {
    const Point& p = m.nodes[m.interface_nodes[k]];
    EXPECT_DOUBLE_EQ(p.y, 0.75);
    EXPECT_DOUBLE_EQ(p.x, 0.25 * static_cast<double>(k));
    EXPECT_TRUE(touches(m, Subdomain::fluid, m.interface_nodes[k]));
    EXPECT_TRUE(touches(m, Subdomain::solid, m.interface_nodes[k]));
  }
  EXPECT_NEAR(part_area(m, Subdomain::fluid), 0.75, 1e-15);
  EXPECT_NEAR(part_area(m, Subdomain::solid), 0.25, 1e-15);
  EXPECT_TRUE(validate(m).empty());
}

TEST(UniformSplitMesh, HmaxIsCellDiagonal) {
  EXPECT_NEAR(uniform_split_mesh(8).h_max, std::sqrt(2.0) / 8.0, 1e-15);
  EXPECT_NEAR(uniform_split_mesh(64).h_max, std::sqrt(2.0) / 64.0, 1e-15);
}

TEST(UniformSplitMesh, InterfaceRowForAnyN) {
  for (Index n : {2, 3, 5, 6, 7, 9, 13}) {
    const auto m = uniform_split_mesh(n);
    EXPECT_TRUE(validate(m).empty()) << "n = " << n;
    EXPECT_EQ(m.interface_nodes.size(), static_cast<std::size_t>(n + 1));
  }
}

TEST(UniformSplitMesh, RejectsSmallN) {
  EXPECT_THROW(uniform_split_mesh(1), std::invalid_argument);
  EXPECT_THROW(uniform_split_mesh(0), std::invalid_argument);
}

TEST(UniformSplitMesh, CounterclockwiseTriangles) {
  const auto m = uniform_split_mesh(6);
  for (auto s : {Subdomain::fluid, Subdomain::solid}) {
    for (const auto& t : m.triangles(s)) EXPECT_GT(signed_area(m.nodes[t[0]], m.nodes[t[1]], m.nodes[t[2]]), 0.0);
  }
}

TEST(UniformSplitMesh, DirichletSetsMeetInterfaceOnlyAtEndpoints) {
  const auto m = uniform_split_mesh(8);
  const Index first = m.interface_nodes.front();
  const Index last = m.interface_nodes.back();
  for (const auto* set : {&m.dirichlet_f, &m.dirichlet_s}) {
    for (Index v : m.interface_nodes) {
      const bool in = std::binary_search(set->begin(), set->end(), v);
      EXPECT_EQ(in, v == first || v == last);
    }
  }
}

TEST(SlantedInterfaceMesh, HmaxNearReferenceList) {
  // reference h_max per level; generator freedom allows +-50%
  const double ref[] = {0.3125, 0.1574, 0.0794, 0.0398, 0.0199};
  for (Index level = 0; level < 5; ++level) {
    const auto m = slanted_interface_mesh(level);
    EXPECT_GE(m.h_max, 0.5 * ref[level]) << "level " << level;
    EXPECT_LE(m.h_max, 1.5 * ref[level]) << "level " << level;
  }
}

TEST(SlantedInterfaceMesh, NodesOnTheLineAndValid) {
  for (Index level = 0; level <= 4; ++level) {
    const auto m = slanted_interface_mesh(level);
    for (Index v : m.interface_nodes) {
      const Point& p = m.nodes[v];
      EXPECT_LE(std::abs(p.y - (0.5 * p.x + 0.25)), 1e-12);
    }
    EXPECT_TRUE(validate(m).empty()) << "level " << level;
  }
}

TEST(SlantedInterfaceMesh, RefinementHalvesHmax) {
  double prev = slanted_interface_mesh(0).h_max;
  for (Index level = 1; level <= 6; ++level) {
    const double h = slanted_interface_mesh(level).h_max;
    EXPECT_GE(prev / h, 1.6);
    EXPECT_LE(prev / h, 2.6);
    prev = h;
  }
}

TEST(SlantedInterfaceMesh, InterfaceLength) {
  const auto m = slanted_interface_mesh(2);
  double len = 0.0;
  for (const auto& s : m.interface_segments) {
    len += std::hypot(m.nodes[s[1]].x - m.nodes[s[0]].x, m.nodes[s[1]].y - m.nodes[s[0]].y);
  }
  EXPECT_NEAR(len, std::sqrt(1.25), 1e-12);
}

TEST(SlantedInterfaceMesh, LevelRange) {
  EXPECT_THROW(slanted_interface_mesh(-1), std::invalid_argument);
  EXPECT_THROW(slanted_interface_mesh(11), std::invalid_argument);
}

TEST(Validate, FlippedTriangleReported) {
  auto m = uniform_split_mesh(4);
  std::swap(m.triangles_f[3][1], m.triangles_f[3][2]);
  const auto v = validate(m);
  ASSERT_FALSE(v.empty());
  EXPECT_NE(v.front().find("nonpositive area"), std::string::npos);
}

TEST(Validate, PerturbedInterfaceNodeReported) {
  auto m = uniform_split_mesh(4);
  m.nodes[m.interface_nodes[2]].y += 1e-6;
  const auto v = validate(m);
  EXPECT_TRUE(std::any_of(v.begin(), v.end(), [](const std::string& s) { return s.find("off the interface") != std::string::npos; }));
}

TEST(Validate, DroppedTriangleBreaksTiling) {
  auto m = uniform_split_mesh(4);
  m.triangles_s.pop_back();
  const auto v = validate(m);
  EXPECT_TRUE(std::any_of(v.begin(), v.end(), [](const std::string& s) { return s.find("areas sum") != std::string::npos; }));
}

TEST(InterfaceGeometry, RejectsLinesMissingTheSides) {
  EXPECT_THROW(InterfaceGeometry::horizontal(1.0), std::invalid_argument);
  EXPECT_THROW(InterfaceGeometry::slanted(1.0, 0.25), std::invalid_argument);
  const auto g = InterfaceGeometry::slanted(0.5, 0.25);
  const Point n = g.normal_fluid();
  EXPECT_NEAR(n.x * n.x + n.y * n.y, 1.0, 1e-15);
  EXPECT_NEAR(n.x * 1.0 + n.y * 0.5, 0.0, 1e-15);  // orthogonal to the direction (1, 1/2)
  EXPECT_GT(n.y, 0.0);
}

TEST(WriteMesh, OneRecordPerLine) {
  const auto m = uniform_split_mesh(2);
  std::ostringstream os;
  write_mesh(os, m);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "# nodes " + std::to_string(m.nodes.size()));
  std::getline(is, line);
  EXPECT_EQ(line, "0 0 0");
}
