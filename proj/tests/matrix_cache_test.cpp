#include "kianc/matrix_cache.hpp"

#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "support/oracles.hpp"

namespace kianc {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const char* name) {
  const fs::path p = fs::temp_directory_path() / "kianc_matrix_cache_test" / name;
  fs::create_directories(p.parent_path());
  fs::remove(p);
  return p;
}

TEST(MatrixBundle, RoundTripIsBitExact) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    MatrixBundle b = {{"A", oracle::random_complex(5, 5, seed)},
                      {"A_yd", oracle::random_complex(3, 7, seed + 1)},
                      {"empty", CMat()}};
    const fs::path p = scratch("round_trip.kmat");
    save_matrix_bundle(p, b);
    const auto loaded = load_matrix_bundle(p);
    ASSERT_TRUE(loaded.has_value());
    ASSERT_EQ(loaded->size(), b.size());
    for (const auto& [name, m] : b) {
      ASSERT_EQ(loaded->at(name).rows(), m.rows());
      ASSERT_EQ(loaded->at(name).cols(), m.cols());
      EXPECT_EQ(loaded->at(name), m) << name;
    }
  }
}

TEST(MatrixBundle, MissingFileIsNullopt) {
  EXPECT_FALSE(load_matrix_bundle(scratch("nope.kmat")).has_value());
}

TEST(MatrixBundle, CorruptFilesRejected) {
  const fs::path bad = scratch("bad.kmat");
  std::ofstream(bad) << "not a sidecar";
  EXPECT_THROW(load_matrix_bundle(bad), std::runtime_error);

  const fs::path cut = scratch("cut.kmat");
  save_matrix_bundle(cut, {{"A", oracle::random_complex(4, 4, 1)}});
  fs::resize_file(cut, fs::file_size(cut) - 8);
  EXPECT_THROW(load_matrix_bundle(cut), std::runtime_error);
}

}  // namespace
}  // namespace kianc
