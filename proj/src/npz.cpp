#include "amptcr/npz.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>
#include <zlib.h>

#include "amptcr/error.hpp"

namespace amptcr {

static_assert(std::endian::native == std::endian::little, "archive code assumes a little-endian host");

namespace {

constexpr std::uint8_t kNpyMagic[] = {0x93, 'N', 'U', 'M', 'P', 'Y'};

std::string shape_text(const std::vector<std::size_t>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  if (shape.size() == 1) s += ",";
  return s + ")";
}

FormatError member_error(std::string_view member, const std::string& what) {
  return FormatError(member.empty() ? what : std::string(member) + ": " + what);
}

// Minimal reader for the python-literal header dict numpy writes.
struct HeaderDict {
  std::string descr;
  bool fortran_order = false;
  std::vector<std::size_t> shape;
};

HeaderDict parse_header(std::string_view h, std::string_view member) {
  auto find_value = [&](std::string_view key) {
    const std::string quoted = "'" + std::string(key) + "'";
    auto pos = h.find(quoted);
    if (pos == std::string_view::npos) throw member_error(member, "npy header lacks " + quoted);
    pos = h.find(':', pos + quoted.size());
    if (pos == std::string_view::npos) throw member_error(member, "malformed npy header");
    ++pos;
    while (pos < h.size() && h[pos] == ' ') ++pos;
    return pos;
  };
  HeaderDict d;
  {
    auto pos = find_value("descr");
    if (pos >= h.size() || h[pos] != '\'') throw member_error(member, "malformed descr");
    auto end = h.find('\'', pos + 1);
    if (end == std::string_view::npos) throw member_error(member, "malformed descr");
    d.descr = std::string(h.substr(pos + 1, end - pos - 1));
  }
  {
    auto pos = find_value("fortran_order");
    if (h.substr(pos, 4) == "True") d.fortran_order = true;
    else if (h.substr(pos, 5) != "False") throw member_error(member, "malformed fortran_order");
  }
  {
    auto pos = find_value("shape");
    if (pos >= h.size() || h[pos] != '(') throw member_error(member, "malformed shape");
    auto end = h.find(')', pos);
    if (end == std::string_view::npos) throw member_error(member, "malformed shape");
    std::string_view body = h.substr(pos + 1, end - pos - 1);
    std::size_t i = 0;
    while (i < body.size()) {
      while (i < body.size() && (body[i] == ' ' || body[i] == ',')) ++i;
      if (i >= body.size()) break;
      std::size_t v = 0, digits = 0;
      while (i < body.size() && body[i] >= '0' && body[i] <= '9') {
        v = v * 10 + static_cast<std::size_t>(body[i] - '0');
        ++i;
        ++digits;
      }
      if (!digits) throw member_error(member, "malformed shape");
      d.shape.push_back(v);
    }
  }
  return d;
}

void put16(Bytes& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put32(Bytes& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint64_t get_le(std::span<const std::uint8_t> b, std::size_t off, int width) {
  if (off + static_cast<std::size_t>(width) > b.size()) throw FormatError("truncated zip archive");
  std::uint64_t v = 0;
  for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(b[off + static_cast<std::size_t>(i)]) << (8 * i);
  return v;
}

std::uint32_t crc_of(std::span<const std::uint8_t> data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t done = 0;
  while (done < data.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(data.size() - done, 1u << 30));
    crc = crc32(crc, data.data() + done, chunk);
    done += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

Bytes inflate_raw(std::span<const std::uint8_t> in, std::size_t expected, const std::string& member) {
  Bytes out(expected);
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw FormatError(member + ": inflate init failed");
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  const auto produced = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || produced != expected) throw FormatError(member + ": corrupt deflate stream");
  return out;
}

}  // namespace

std::size_t NpyArray::element_count() const noexcept {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::size_t NpyArray::element_size() const {
  if (descr == "<f4") return 4;
  if (descr == "<f8") return 8;
  throw FormatError("unsupported dtype " + descr);
}

std::vector<double> NpyArray::to_doubles() const {
  std::vector<double> out(element_count());
  if (descr == "<f4") {
    for (std::size_t i = 0; i < out.size(); ++i) {
      float f;
      std::memcpy(&f, data.data() + 4 * i, 4);
      out[i] = f;
    }
  } else if (descr == "<f8") {
    std::memcpy(out.data(), data.data(), 8 * out.size());
  } else {
    throw FormatError("unsupported dtype " + descr);
  }
  return out;
}

NpyArray make_f4_array(std::span<const double> values, std::vector<std::size_t> shape) {
  NpyArray a;
  a.descr = "<f4";
  a.shape = std::move(shape);
  if (a.element_count() != values.size()) throw PreconditionError("array shape does not match value count");
  a.data.resize(4 * values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto f = static_cast<float>(values[i]);
    std::memcpy(a.data.data() + 4 * i, &f, 4);
  }
  return a;
}

NpyArray make_f8_array(std::span<const double> values, std::vector<std::size_t> shape) {
  NpyArray a;
  a.descr = "<f8";
  a.shape = std::move(shape);
  if (a.element_count() != values.size()) throw PreconditionError("array shape does not match value count");
  a.data.resize(8 * values.size());
  std::memcpy(a.data.data(), values.data(), a.data.size());
  return a;
}

Bytes encode_npy(const NpyArray& array) {
  if (array.data.size() != array.element_count() * array.element_size())
    throw PreconditionError("array byte count does not match its shape");
  std::string header =
      "{'descr': '" + array.descr + "', 'fortran_order': False, 'shape': " + shape_text(array.shape) + ", }";
  const std::size_t unpadded = sizeof(kNpyMagic) + 2 + 2 + header.size() + 1;
  header.append((64 - unpadded % 64) % 64, ' ');
  header.push_back('\n');
  if (header.size() > 0xffff) throw PreconditionError("npy header too long for format 1.0");

  Bytes out(std::begin(kNpyMagic), std::end(kNpyMagic));
  out.push_back(1);
  out.push_back(0);
  put16(out, static_cast<std::uint16_t>(header.size()));
  out.insert(out.end(), header.begin(), header.end());
  out.insert(out.end(), array.data.begin(), array.data.end());
  return out;
}

NpyArray decode_npy(std::span<const std::uint8_t> bytes, std::string_view member) {
  if (bytes.size() < 10 || !std::equal(std::begin(kNpyMagic), std::end(kNpyMagic), bytes.begin()))
    throw member_error(member, "bad npy magic");
  if (bytes[6] != 1 || bytes[7] != 0)
    throw member_error(member, "unsupported npy version " + std::to_string(bytes[6]) + "." + std::to_string(bytes[7]));
  const std::size_t header_len = bytes[8] | (static_cast<std::size_t>(bytes[9]) << 8);
  if (10 + header_len > bytes.size()) throw member_error(member, "truncated npy header");
  const std::string_view header(reinterpret_cast<const char*>(bytes.data() + 10), header_len);
  const HeaderDict d = parse_header(header, member);
  if (d.fortran_order) throw member_error(member, "fortran-ordered arrays are not supported");

  NpyArray a;
  a.descr = d.descr;
  a.shape = d.shape;
  if (a.descr != "<f4" && a.descr != "<f8") throw member_error(member, "unsupported dtype " + a.descr);
  const std::size_t expected = a.element_count() * a.element_size();
  if (bytes.size() - 10 - header_len != expected) throw member_error(member, "data size does not match shape");
  a.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(10 + header_len), bytes.end());
  return a;
}

Bytes build_zip(const std::vector<ZipMember>& members) {
  constexpr std::uint16_t kTime = 0, kDate = (0 << 9) | (1 << 5) | 1;  // 1980-01-01 00:00
  Bytes out, central;
  for (const auto& m : members) {
    if (m.data.size() >= 0xffffffffULL || out.size() >= 0xffffffffULL)
      throw PreconditionError("archive member too large for a plain zip");
    const auto offset = static_cast<std::uint32_t>(out.size());
    const auto crc = crc_of(m.data);
    const auto size = static_cast<std::uint32_t>(m.data.size());
    const auto name_len = static_cast<std::uint16_t>(m.name.size());

    put32(out, 0x04034b50);
    put16(out, 20);
    put16(out, 0);  // flags
    put16(out, 0);  // stored
    put16(out, kTime);
    put16(out, kDate);
    put32(out, crc);
    put32(out, size);
    put32(out, size);
    put16(out, name_len);
    put16(out, 0);
    out.insert(out.end(), m.name.begin(), m.name.end());
    out.insert(out.end(), m.data.begin(), m.data.end());

    put32(central, 0x02014b50);
    put16(central, 20);  // made by
    put16(central, 20);  // needed
    put16(central, 0);
    put16(central, 0);
    put16(central, kTime);
    put16(central, kDate);
    put32(central, crc);
    put32(central, size);
    put32(central, size);
    put16(central, name_len);
    put16(central, 0);  // extra
    put16(central, 0);  // comment
    put16(central, 0);  // disk
    put16(central, 0);  // internal attrs
    put32(central, 0);  // external attrs
    put32(central, offset);
    central.insert(central.end(), m.name.begin(), m.name.end());
  }
  const auto cd_offset = static_cast<std::uint32_t>(out.size());
  out.insert(out.end(), central.begin(), central.end());
  put32(out, 0x06054b50);
  put16(out, 0);
  put16(out, 0);
  put16(out, static_cast<std::uint16_t>(members.size()));
  put16(out, static_cast<std::uint16_t>(members.size()));
  put32(out, static_cast<std::uint32_t>(central.size()));
  put32(out, cd_offset);
  put16(out, 0);
  return out;
}

std::vector<ZipMember> parse_zip(std::span<const std::uint8_t> b) {
  if (b.size() < 22) throw FormatError("not a zip archive: too short");
  // End of central directory: scan back over a possible comment.
  std::size_t eocd = std::string::npos;
  for (std::size_t i = b.size() - 22 + 1; i-- > 0 && b.size() - i <= 22 + 0xffff;)
    if (get_le(b, i, 4) == 0x06054b50) {
      eocd = i;
      break;
    }
  if (eocd == std::string::npos) throw FormatError("not a zip archive: no end-of-directory record");
  std::uint64_t count = get_le(b, eocd + 10, 2);
  std::uint64_t cd_offset = get_le(b, eocd + 16, 4);
  if (cd_offset == 0xffffffffULL || count == 0xffff) {
    // zip64 end-of-directory locator sits just before.
    if (eocd < 20 || get_le(b, eocd - 20, 4) != 0x07064b50) throw FormatError("zip64 locator missing");
    const auto rec = get_le(b, eocd - 20 + 8, 8);
    if (get_le(b, rec, 4) != 0x06064b50) throw FormatError("zip64 end-of-directory record missing");
    count = get_le(b, rec + 32, 8);
    cd_offset = get_le(b, rec + 48, 8);
  }

  std::vector<ZipMember> members;
  std::size_t p = cd_offset;
  for (std::uint64_t e = 0; e < count; ++e) {
    if (get_le(b, p, 4) != 0x02014b50) throw FormatError("corrupt zip central directory");
    const auto flags = get_le(b, p + 8, 2);
    const auto method = get_le(b, p + 10, 2);
    const auto crc = static_cast<std::uint32_t>(get_le(b, p + 16, 4));
    std::uint64_t csize = get_le(b, p + 20, 4), usize = get_le(b, p + 24, 4);
    const auto name_len = get_le(b, p + 28, 2), extra_len = get_le(b, p + 30, 2), comment_len = get_le(b, p + 32, 2);
    std::uint64_t local = get_le(b, p + 42, 4);
    if (p + 46 + name_len > b.size()) throw FormatError("truncated zip central directory");
    std::string name(reinterpret_cast<const char*>(b.data() + p + 46), name_len);

    // zip64 extra field replaces saturated values in fixed order.
    std::size_t x = p + 46 + name_len;
    const std::size_t x_end = x + extra_len;
    while (x + 4 <= x_end) {
      const auto id = get_le(b, x, 2), len = get_le(b, x + 2, 2);
      if (id == 0x0001) {
        std::size_t q = x + 4;
        if (usize == 0xffffffffULL) usize = get_le(b, q, 8), q += 8;
        if (csize == 0xffffffffULL) csize = get_le(b, q, 8), q += 8;
        if (local == 0xffffffffULL) local = get_le(b, q, 8);
      }
      x += 4 + len;
    }
    if (flags & 1U) throw FormatError(name + ": encrypted members are not supported");

    if (get_le(b, local, 4) != 0x04034b50) throw FormatError(name + ": bad local header");
    const auto data_off = local + 30 + get_le(b, local + 26, 2) + get_le(b, local + 28, 2);
    if (data_off + csize > b.size()) throw FormatError(name + ": truncated member data");
    const auto raw = b.subspan(data_off, csize);

    ZipMember m;
    m.name = std::move(name);
    if (method == 0) {
      if (csize != usize) throw FormatError(m.name + ": stored member size mismatch");
      m.data.assign(raw.begin(), raw.end());
    } else if (method == 8) {
      m.data = inflate_raw(raw, usize, m.name);
    } else {
      throw FormatError(m.name + ": unsupported compression method " + std::to_string(method));
    }
    if (crc_of(m.data) != crc) throw FormatError(m.name + ": CRC mismatch");
    members.push_back(std::move(m));
    p += 46 + name_len + extra_len + comment_len;
  }
  return members;
}

Bytes read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view text) {
  write_file_atomic(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace amptcr
