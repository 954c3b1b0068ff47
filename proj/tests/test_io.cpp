#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bssn/experiments.hpp"
#include "bssn/io.hpp"

using namespace bssn;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("bssn_io_test_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("format_sci uses six significant digits") {
  CHECK(format_sci(1.0) == "1.00000e+00");
  CHECK(format_sci(-0.000123456789) == "-1.23457e-04");
  CHECK(format_sci(12345.6789) == "1.23457e+04");
}

TEST_CASE("vector csv round trip") {
  TempDir tmp;
  Rng rng(3);
  const Vec v = rng.normal_vector(40);
  write_vector_csv(tmp.path / "v.csv", v);
  const Vec back = read_vector_csv(tmp.path / "v.csv");
  REQUIRE(back.size() == v.size());
  CHECK((back - v).lpNorm<Eigen::Infinity>() == 0.0);  // full precision
  CHECK_THROWS_AS(read_vector_csv(tmp.path / "missing.csv"), InvalidArgument);
}

TEST_CASE("matrix csv round trip") {
  TempDir tmp;
  Rng rng(5);
  Mat m(7, 4);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = rng.normal();
  write_matrix_csv(tmp.path / "m.csv", m);
  const Mat back = read_matrix_csv(tmp.path / "m.csv");
  REQUIRE(back.rows() == 7);
  REQUIRE(back.cols() == 4);
  CHECK((back - m).lpNorm<Eigen::Infinity>() == 0.0);

  std::ofstream(tmp.path / "ragged.csv") << "1,2\n3\n";
  CHECK_THROWS_AS(read_matrix_csv(tmp.path / "ragged.csv"), InvalidArgument);
}

TEST_CASE("pgm round trip preserves ranking") {
  TempDir tmp;
  const int n = 12;
  const Vec img = make_sparse_test_image(n, 0.2, 9);
  write_pgm(tmp.path / "img.pgm", img, n);
  int side = 0;
  const Vec back = read_pgm(tmp.path / "img.pgm", side);
  CHECK(side == n);
  REQUIRE(back.size() == img.size());
  // 8-bit quantization: exact values are lost but scale is preserved
  const double hi = img.maxCoeff();
  for (int k = 0; k < n * n; ++k) {
    CHECK(std::abs(back(k) * hi - img(k)) <= hi / 255.0 + 1e-12);
  }
  CHECK_THROWS_AS(write_pgm(tmp.path / "bad.pgm", img, n + 1), InvalidArgument);
  CHECK_THROWS_AS(read_pgm(tmp.path / "none.pgm", side), InvalidArgument);
}

TEST_CASE("history files") {
  TempDir tmp;
  std::vector<IterationRecord> recs(3);
  recs[0].j = 0;
  recs[0].residual_norm = 2.5;
  recs[0].objective = 10.0;
  recs[1].j = 1;
  recs[1].residual_norm = 0.5;
  recs[1].objective = 4.0;
  recs[1].step = 1.0;
  recs[1].lcp_size = 2;
  recs[1].sle_size = 5;
  recs[1].sle_count = 4;
  recs[2] = recs[1];
  recs[2].j = 2;
  recs[2].residual_norm = 1e-9;

  write_history_csv(tmp.path / "h.csv", recs);
  std::ifstream is(tmp.path / "h.csv");
  std::string line;
  std::getline(is, line);
  CHECK(line == "j,residual_norm,objective,step,lcp_size,sle_size,sle_count");
  std::getline(is, line);
  CHECK(line == "0,2.50000e+00,1.00000e+01,-,-,-,-");
  std::getline(is, line);
  CHECK(line == "1,5.00000e-01,4.00000e+00,1.00000e+00,2,5,4");

  write_history_dat(tmp.path / "h.dat", recs);
  std::ifstream is2(tmp.path / "h.dat");
  std::getline(is2, is2.peek() == 'j' ? line : line);
  CHECK(line == "j residual_norm objective step lcp_size sle_size sle_count");
  std::getline(is2, line);
  CHECK(line == "0 2.50000e+00 1.00000e+01 - - - -");
}
