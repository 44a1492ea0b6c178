// SPDX-License-Identifier: Apache-2.0
#include "saltubes/npy.hpp"

#include <array>
#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "saltubes/error.hpp"

namespace saltubes {

static_assert(std::endian::native == std::endian::little,
              "NPY payloads are read and written in host byte order");

namespace {

constexpr std::array<char, 6> kMagic = {'\x93', 'N', 'U', 'M', 'P', 'Y'};
constexpr std::size_t kPreambleSize = 10;  // magic + version + u16 header length
constexpr std::size_t kAlignment = 64;

struct Header {
  std::string descr;
  bool fortran_order = false;
  Shape shape;
};

class HeaderParser {
 public:
  explicit HeaderParser(std::string_view text) : text_(text) {}

  Header parse() {
    Header header;
    bool has_descr = false, has_order = false, has_shape = false;
    skip_ws();
    expect('{');
    while (true) {
      skip_ws();
      if (peek() == '}') break;
      const std::string key = quoted();
      skip_ws();
      expect(':');
      skip_ws();
      if (key == "descr") {
        header.descr = quoted();
        has_descr = true;
      } else if (key == "fortran_order") {
        header.fortran_order = boolean();
        has_order = true;
      } else if (key == "shape") {
        header.shape = tuple();
        has_shape = true;
      } else {
        fail("unexpected header key '" + key + "'");
      }
      skip_ws();
      if (peek() == ',') {
        ++pos_;
        continue;
      }
      skip_ws();
      if (peek() != '}') fail("expected ',' or '}'");
    }
    if (!has_descr || !has_order || !has_shape) fail("header lacks descr, fortran_order or shape");
    return header;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::Format, "malformed NPY header: " + what);
  }
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  void expect(char c) {
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  std::string quoted() {
    const char q = peek();
    if (q != '\'' && q != '"') fail("expected quoted string");
    const auto end = text_.find(q, pos_ + 1);
    if (end == std::string_view::npos) fail("unterminated string");
    std::string out(text_.substr(pos_ + 1, end - pos_ - 1));
    pos_ = end + 1;
    return out;
  }
  bool boolean() {
    if (text_.substr(pos_, 4) == "True") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "False") {
      pos_ += 5;
      return false;
    }
    fail("expected True or False");
  }
  Shape tuple() {
    Shape shape;
    expect('(');
    while (true) {
      skip_ws();
      if (peek() == ')') {
        ++pos_;
        return shape;
      }
      if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected integer extent");
      std::size_t value = 0;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        value = value * 10 + static_cast<std::size_t>(text_[pos_++] - '0');
      }
      shape.push_back(value);
      skip_ws();
      if (peek() == ',') ++pos_;
      else if (peek() != ')') fail("expected ',' or ')' in shape");
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string shape_literal(const Shape& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(shape[i]);
  }
  if (shape.size() == 1) out += ",";
  out += ")";
  return out;
}

}  // namespace

DenseTensor read_npy(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < kPreambleSize || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(ErrorKind::Format, path.string() + " is not an NPY file (bad magic)");
  }
  const auto major = static_cast<unsigned char>(bytes[6]);
  const auto minor = static_cast<unsigned char>(bytes[7]);
  if (major != 1 || minor != 0) {
    throw Error(ErrorKind::Format, path.string() + ": only NPY version 1.0 is supported, got " +
                                       std::to_string(major) + "." + std::to_string(minor));
  }
  const std::size_t header_len = static_cast<unsigned char>(bytes[8]) |
                                 (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
  if (bytes.size() < kPreambleSize + header_len) {
    throw Error(ErrorKind::CorruptFile, path.string() + ": header truncated");
  }
  const Header header =
      HeaderParser(std::string_view(bytes).substr(kPreambleSize, header_len)).parse();

  if (header.fortran_order) {
    throw Error(ErrorKind::UnsupportedLayout, path.string() + ": fortran_order arrays are not supported");
  }
  std::size_t item_size = 0;
  if (header.descr == "<f8") item_size = 8;
  else if (header.descr == "<f4") item_size = 4;
  else throw Error(ErrorKind::UnsupportedDtype, path.string() + ": unsupported dtype '" + header.descr + "'");

  validate_shape(header.shape);
  const std::size_t count = shape_product(header.shape);
  const std::size_t payload = bytes.size() - kPreambleSize - header_len;
  if (payload != count * item_size) {
    throw Error(ErrorKind::CorruptFile,
                path.string() + ": header declares " + std::to_string(count) +
                    " elements but payload holds " + std::to_string(payload) + " bytes");
  }

  std::vector<double> data(count);
  const char* src = bytes.data() + kPreambleSize + header_len;
  if (item_size == 8) {
    std::memcpy(data.data(), src, count * 8);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      float v;
      std::memcpy(&v, src + i * 4, 4);
      data[i] = v;
    }
  }
  DenseTensor tensor(header.shape, std::move(data));
  tensor.require_finite();
  return tensor;
}

void write_npy(const DenseTensor& tensor, const std::filesystem::path& path) {
  validate_shape(tensor.shape());
  std::string header = "{'descr': '<f8', 'fortran_order': False, 'shape': " +
                       shape_literal(tensor.shape()) + ", }";
  const std::size_t unpadded = kPreambleSize + header.size() + 1;
  header.append((kAlignment - unpadded % kAlignment) % kAlignment, ' ');
  header.push_back('\n');

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  const auto len = static_cast<std::uint16_t>(header.size());
  out.write(kMagic.data(), kMagic.size());
  out.put('\x01');
  out.put('\x00');
  out.put(static_cast<char>(len & 0xff));
  out.put(static_cast<char>(len >> 8));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(tensor.data().data()),
            static_cast<std::streamsize>(tensor.size() * sizeof(double)));
  out.flush();
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

}  // namespace saltubes
