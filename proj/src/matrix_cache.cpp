#include "kianc/matrix_cache.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace kianc {
namespace {

static_assert(std::endian::native == std::endian::little,
              "matrix sidecars are written in native little-endian order");

constexpr std::array<char, 8> kMagic = {'K', 'I', 'A', 'N', 'C', 'M', 'A', 'T'};

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("matrix sidecar truncated: " + path.string());
  return value;
}

}  // namespace

void save_matrix_bundle(const std::filesystem::path& path,
                        const MatrixBundle& bundle) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  // Write to a sibling and rename so concurrent readers never see a partial file.
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write matrix sidecar: " + tmp.string());
    out.write(kMagic.data(), kMagic.size());
    put<std::uint32_t>(out, kMatrixBundleVersion);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(bundle.size()));
    for (const auto& [name, m] : bundle) {
      put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
      out.write(name.data(), static_cast<std::streamsize>(name.size()));
      put<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
      put<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
      for (Eigen::Index i = 0; i < m.size(); ++i) {
        put<double>(out, m.data()[i].real());
        put<double>(out, m.data()[i].imag());
      }
    }
    if (!out) throw std::runtime_error("failed writing matrix sidecar: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::optional<MatrixBundle> load_matrix_bundle(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;

  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic)
    throw std::runtime_error("not a matrix sidecar: " + path.string());
  const auto version = get<std::uint32_t>(in, path);
  if (version != kMatrixBundleVersion)
    throw std::runtime_error("unsupported matrix sidecar version in " + path.string());

  MatrixBundle bundle;
  const auto count = get<std::uint32_t>(in, path);
  for (std::uint32_t n = 0; n < count; ++n) {
    const auto len = get<std::uint32_t>(in, path);
    std::string name(len, '\0');
    in.read(name.data(), len);
    const auto rows = get<std::uint64_t>(in, path);
    const auto cols = get<std::uint64_t>(in, path);
    if (rows > (1u << 24) || cols > (1u << 24))
      throw std::runtime_error("implausible matrix size in " + path.string());
    CMat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double re = get<double>(in, path);
      const double im = get<double>(in, path);
      m.data()[i] = Complex(re, im);
    }
    bundle.emplace(std::move(name), std::move(m));
  }
  return bundle;
}

}  // namespace kianc
