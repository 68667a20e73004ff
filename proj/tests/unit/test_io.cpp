#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "elasmatch/shapes/io.hpp"
#include "support/test_shapes.hpp"

using namespace elasmatch;

namespace {

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "elasmatch_test_io";
  std::filesystem::create_directories(dir);
  return dir;
}

PointList<2> irregular_points(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  PointList<2> v;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    const double r = 1.0 + 0.01 * u(rng);
    v.emplace_back(r * std::cos(t) / 3.0, r * std::sin(t) / 7.0);
  }
  return v;
}

}  // namespace

TEST(ObjIo, MinimalTriangle) {
  std::istringstream in("# a comment\nv 0 0 0\nv 1 0 0\nvn 0 0 1\nvt 0 0\nv 0 1 0\nf 1/1/1 2//1 3\n");
  const TriMesh m = read_obj(in);
  EXPECT_EQ(m.vertex_count(), 3u);
  EXPECT_EQ(m.cell_count(), 1u);
  EXPECT_EQ(m.faces()[0], (Face{0, 1, 2}));
  EXPECT_FALSE(m.signal());
}

TEST(ObjIo, NegativeIndices) {
  std::istringstream in("v 0 0 0\nv 1 0 0\nv 0 1 0\nf -3 -2 -1\n");
  EXPECT_EQ(read_obj(in).faces()[0], (Face{0, 1, 2}));
}

TEST(ObjIo, FaceIndexOutOfRangeNamesLine) {
  std::istringstream in("v 0 0 0\nv 1 0 0\nv 0 1 0\n\nf 1 2 4\n");
  try {
    read_obj(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    ASSERT_TRUE(e.line());
    EXPECT_EQ(*e.line(), 5u);
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
  }
}

TEST(ObjIo, RejectsQuads) {
  std::istringstream in("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n");
  EXPECT_THROW(read_obj(in), ParseError);
}

TEST(ObjIo, RoundTripWithSignal) {
  const auto sphere = fixtures::icosphere(1);
  std::vector<double> sig;
  for (std::size_t f = 0; f < sphere.cell_count(); ++f) sig.push_back(std::sin(0.37 * static_cast<double>(f)));
  const TriMesh m = sphere.with_signal(sig);
  std::stringstream buf;
  write_obj(m, buf);
  const TriMesh back = read_obj(buf);
  EXPECT_EQ(back, m);
}

TEST(CsvIo, ClosedRoundTripIsBitwise) {
  std::mt19937_64 rng(1);
  const Polyline c(irregular_points(100, rng), true);
  std::stringstream buf;
  write_polyline_csv(c, buf);
  const Polyline back = read_polyline_csv(buf);
  EXPECT_TRUE(back.closed());
  ASSERT_EQ(back.vertex_count(), 100u);
  for (std::size_t i = 0; i < 100; ++i) {
    EXPECT_EQ(back.vertices()[i].x(), c.vertices()[i].x());
    EXPECT_EQ(back.vertices()[i].y(), c.vertices()[i].y());
  }
}

TEST(CsvIo, OpenCurveSignalLeavesLastRowEmpty) {
  const Polyline c({{0, 0}, {1, 0}, {1, 1}}, false, std::vector<double>{0.25, -3.0});
  std::stringstream buf;
  write_polyline_csv(c, buf);
  EXPECT_EQ(buf.str(), "# closed=false\nx,y,signal\n0,0,0.25\n1,0,-3\n1,1,\n");
  EXPECT_EQ(read_polyline_csv(buf), c);
}

TEST(CsvIo, Errors) {
  {
    std::istringstream in("x,y\n0,0\n1,0\n");
    EXPECT_THROW(read_polyline_csv(in), ParseError);
  }
  {
    std::istringstream in("# closed=false\nx,y,z\n0,0,0\n1,0,0\n");
    try {
      read_polyline_csv(in);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::UnsupportedShape);
    }
  }
  {
    std::istringstream in("# closed=false\nx,y\n0,0\n1,abc\n");
    try {
      read_polyline_csv(in);
      FAIL();
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line().value_or(0), 4u);
    }
  }
  {
    std::istringstream in("# closed=true\nx,y\n0,0\n1,0\n");
    EXPECT_THROW(read_polyline_csv(in), ParseError);
  }
}

TEST(JsonIo, RoundTripWithSignal) {
  std::mt19937_64 rng(2);
  const auto base = fixtures::random_closed_curve(rng, 40);
  std::vector<double> sig(base.cell_count());
  for (std::size_t i = 0; i < sig.size(); ++i) sig[i] = i % 2 ? 1.0 / 3.0 : 0.0;
  const Polyline c = base.with_signal(sig);
  std::stringstream buf;
  write_polyline_json(c, buf);
  EXPECT_EQ(read_polyline_json(buf), c);
}

TEST(JsonIo, Errors) {
  {
    std::istringstream in("{\"vertices\": [[0, 0], [1, 0, 2]], \"closed\": false}");
    try {
      read_polyline_json(in);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::UnsupportedShape);
    }
  }
  {
    std::istringstream in("{\n\"vertices\": [[0, 0],\n [1, 0]\n\"closed\": false}");
    try {
      read_polyline_json(in);
      FAIL();
    } catch (const ParseError& e) {
      EXPECT_EQ(e.line().value_or(0), 4u);
    }
  }
  {
    std::istringstream in("{\"vertices\": [[0, 0], [1, 0]]}");
    EXPECT_THROW(read_polyline_json(in), ParseError);
  }
}

TEST(ShapeIo, FormatDetectionAndFiles) {
  EXPECT_EQ(format_from_path("a/b.csv"), ShapeFormat::PolylineCsv);
  EXPECT_EQ(format_from_path("b.JSON"), ShapeFormat::PolylineJson);
  EXPECT_EQ(format_from_path("c.obj"), ShapeFormat::Obj);
  try {
    format_from_path("mesh.ply");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedFormat);
  }

  const auto dir = temp_dir();
  const AnyShape curve = fixtures::circle(12);
  write_shape(curve, dir / "c.json");
  write_shape(curve, dir / "c.csv");
  EXPECT_EQ(std::get<Polyline>(read_shape(dir / "c.json")), std::get<Polyline>(curve));
  EXPECT_EQ(std::get<Polyline>(read_shape(dir / "c.csv")), std::get<Polyline>(curve));
  EXPECT_THROW(write_shape(curve, dir / "c.obj"), Error);

  const AnyShape mesh = fixtures::icosphere(0);
  write_shape(mesh, dir / "m.obj");
  EXPECT_EQ(std::get<TriMesh>(read_shape(dir / "m.obj")), std::get<TriMesh>(mesh));
  EXPECT_THROW(write_shape(mesh, dir / "m.csv"), Error);

  EXPECT_THROW(read_shape(dir / "does_not_exist.json"), ParseError);
}
