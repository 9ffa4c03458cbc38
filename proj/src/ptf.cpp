#include "lggnet/ptf.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace lggnet {
namespace {

constexpr std::size_t kMaxRank = 8;
constexpr std::size_t kMaxHeader = 256;

template <typename Word>
Word to_little_endian(Word w) {
  if constexpr (std::endian::native == std::endian::big) {
    Word r = 0;
    for (std::size_t i = 0; i < sizeof(Word); ++i) {
      r = (r << 8) | (w & 0xff);
      w >>= 8;
    }
    return r;
  } else {
    return w;
  }
}

template <typename Stored, typename Word, typename T>
void write_payload(std::ostream& out, const Tensor<T>& tensor) {
  std::vector<char> buffer(tensor.size() * sizeof(Word));
  for (std::size_t i = 0; i < tensor.size(); ++i) {
    const Word w = to_little_endian(std::bit_cast<Word>(static_cast<Stored>(tensor[i])));
    std::memcpy(buffer.data() + i * sizeof(Word), &w, sizeof(Word));
  }
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
}

template <typename Stored, typename Word, typename T>
std::vector<T> read_payload(std::istream& in, std::size_t count, std::string_view source) {
  std::vector<char> buffer(count * sizeof(Word));
  in.read(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  if (static_cast<std::size_t>(in.gcount()) != buffer.size()) {
    throw CheckpointError(CheckpointError::Kind::Corrupt,
                          std::string(source) + ": truncated tensor payload");
  }
  std::vector<T> values(count);
  for (std::size_t i = 0; i < count; ++i) {
    Word w;
    std::memcpy(&w, buffer.data() + i * sizeof(Word), sizeof(Word));
    values[i] = static_cast<T>(std::bit_cast<Stored>(to_little_endian(w)));
  }
  return values;
}

[[noreturn]] void corrupt(std::string_view source, const std::string& why) {
  throw CheckpointError(CheckpointError::Kind::Corrupt, std::string(source) + ": " + why);
}

}  // namespace

template <typename T>
void write_ptf(std::ostream& out, const Tensor<T>& tensor) {
  out << "PTF1 " << (std::is_same_v<T, float> ? "f32" : "f64") << ' ' << tensor.rank();
  for (std::size_t d : tensor.shape()) out << ' ' << d;
  out << '\n';
  if constexpr (std::is_same_v<T, float>) {
    write_payload<float, std::uint32_t>(out, tensor);
  } else {
    write_payload<double, std::uint64_t>(out, tensor);
  }
}

template <typename T>
Tensor<T> read_ptf(std::istream& in, std::string_view source) {
  std::string header;
  char c;
  while (in.get(c) && c != '\n') {
    header.push_back(c);
    if (header.size() > kMaxHeader) corrupt(source, "header line too long");
  }
  if (!in) corrupt(source, "missing header line");

  std::istringstream fields(header);
  std::string magic, dtype;
  std::size_t rank = 0;
  if (!(fields >> magic >> dtype >> rank) || magic != "PTF1") corrupt(source, "bad PTF header");
  if (dtype != "f32" && dtype != "f64") corrupt(source, "unknown dtype '" + dtype + "'");
  if (rank == 0 || rank > kMaxRank) corrupt(source, "unsupported rank");
  Shape shape(rank);
  for (auto& extent : shape) {
    if (!(fields >> extent) || extent == 0) corrupt(source, "bad extent in header");
  }
  std::string trailing;
  if (fields >> trailing) corrupt(source, "unexpected header field '" + trailing + "'");

  const std::size_t count = shape_size(shape);
  std::vector<T> values = dtype == "f32" ? read_payload<float, std::uint32_t, T>(in, count, source)
                                         : read_payload<double, std::uint64_t, T>(in, count, source);
  if (in.peek() != std::char_traits<char>::eof()) corrupt(source, "trailing bytes after payload");
  return Tensor<T>(std::move(shape), std::move(values));
}

template <typename T>
void save_ptf(const std::filesystem::path& path, const Tensor<T>& tensor) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  write_ptf(out, tensor);
  if (!out) throw Error("failed writing " + path.string());
}

template <typename T>
Tensor<T> load_ptf(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CheckpointError(CheckpointError::Kind::NotFound, "tensor file not found: " + path.string());
  }
  return read_ptf<T>(in, path.string());
}

template void write_ptf<float>(std::ostream&, const Tensor<float>&);
template void write_ptf<double>(std::ostream&, const Tensor<double>&);
template Tensor<float> read_ptf<float>(std::istream&, std::string_view);
template Tensor<double> read_ptf<double>(std::istream&, std::string_view);
template void save_ptf<float>(const std::filesystem::path&, const Tensor<float>&);
template void save_ptf<double>(const std::filesystem::path&, const Tensor<double>&);
template Tensor<float> load_ptf<float>(const std::filesystem::path&);
template Tensor<double> load_ptf<double>(const std::filesystem::path&);

}  // namespace lggnet
