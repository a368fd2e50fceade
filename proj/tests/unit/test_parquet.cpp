#include <cstdlib>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "support/support.hpp"
#include "teleop/recorder/parquet.hpp"

namespace teleop::parquet {
namespace {

Table sample_table(std::size_t rows) {
  Table t;
  Column f{"timestamp", ColumnKind::float64, {}, {}, {}};
  Column u32{"frame_index", ColumnKind::uint32, {}, {}, {}};
  Column u64{"index", ColumnKind::uint64, {}, {}, {}};
  Column list{"observation.state", ColumnKind::float32_list, {}, {}, {}};
  for (std::size_t i = 0; i < rows; ++i) {
    f.f64.push_back(0.05 * static_cast<double>(i));
    u32.ints.push_back(i);
    u64.ints.push_back((uint64_t{1} << 40) + i);
    list.lists.push_back({static_cast<float>(i), -1.5f, 3.25f});
  }
  t.columns = {f, u32, u64, list};
  return t;
}

TEST(Parquet, RoundTrip) {
  for (std::size_t rows : {0u, 1u, 7u, 1000u}) {
    const Table t = sample_table(rows);
    const Bytes b = write(t);
    ASSERT_GE(b.size(), 8u);
    EXPECT_EQ(std::string(b.begin(), b.begin() + 4), "PAR1");
    EXPECT_EQ(std::string(b.end() - 4, b.end()), "PAR1");
    EXPECT_EQ(read(b), t) << rows;
  }
}

TEST(Parquet, WriteIsDeterministic) { EXPECT_EQ(write(sample_table(50)), write(sample_table(50))); }

TEST(Parquet, WriteRejectsInconsistentTables) {
  Table t = sample_table(3);
  t.columns[0].f64.pop_back();
  EXPECT_THROW(write(t), ParquetError);
  Table big = sample_table(1);
  big.columns[1].ints[0] = uint64_t{1} << 33;
  EXPECT_THROW(write(big), ParquetError);
}

TEST(Parquet, ReadRejectsGarbage) {
  EXPECT_THROW(read(Bytes{}), ParquetError);
  EXPECT_THROW(read(Bytes{'P', 'A', 'R', '1'}), ParquetError);
  Bytes b = write(sample_table(10));
  b[b.size() - 6] ^= 0x7f;  // footer length
  EXPECT_THROW(read(b), ParquetError);
  std::mt19937 rng(3);
  for (int i = 0; i < 200; ++i) {
    Bytes c = write(sample_table(10));
    c.resize(rng() % c.size());
    EXPECT_THROW(read(c), ParquetError);
  }
}

TEST(Parquet, ColumnLookup) {
  const Table t = sample_table(2);
  EXPECT_TRUE(t.has("index"));
  EXPECT_FALSE(t.has("nope"));
  EXPECT_THROW(t.column("nope"), ParquetError);
}

// Cross-check against an independent reader when one is installed.
TEST(Parquet, ReadableByPyarrow) {
  if (std::system("python3 -c 'import pyarrow.parquet' >/dev/null 2>&1") != 0) {
    GTEST_SKIP() << "pyarrow not available";
  }
  test::TempDir dir("pq");
  const auto file = dir / "t.parquet";
  {
    const Bytes b = write(sample_table(5));
    std::ofstream(file, std::ios::binary).write(reinterpret_cast<const char*>(b.data()),
                                                static_cast<std::streamsize>(b.size()));
  }
  const std::string script =
      "import pyarrow.parquet as pq, sys\n"
      "t = pq.read_table(sys.argv[1])\n"
      "assert t.num_rows == 5, t.num_rows\n"
      "assert t.column('index').to_pylist()[4] == (1 << 40) + 4\n"
      "assert t.column('observation.state').to_pylist()[3] == [3.0, -1.5, 3.25]\n"
      "assert abs(t.column('timestamp').to_pylist()[2] - 0.1) < 1e-12\n"
      "assert str(t.schema.field('frame_index').type) == 'uint32'\n";
  const auto py = dir / "check.py";
  std::ofstream(py) << script;
  EXPECT_EQ(std::system(("python3 " + py.string() + " " + file.string()).c_str()), 0);
}

}  // namespace
}  // namespace teleop::parquet
