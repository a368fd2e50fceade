#include "teleop/recorder/parquet.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <limits>
#include <optional>

#include <fmt/format.h>

namespace teleop::parquet {

namespace {

static_assert(std::endian::native == std::endian::little, "PLAIN encoding assumes little endian");

// Thrift compact protocol type ids.
enum : uint8_t {
  kBoolTrue = 1,
  kBoolFalse = 2,
  kByte = 3,
  kI16 = 4,
  kI32 = 5,
  kI64 = 6,
  kDouble = 7,
  kBinary = 8,
  kList = 9,
  kSet = 10,
  kMap = 11,
  kStruct = 12,
};

// Parquet enums used here.
enum : int32_t {
  kTypeInt32 = 1,
  kTypeInt64 = 2,
  kTypeFloat = 4,
  kTypeDouble = 5,
  kRequired = 0,
  kOptional = 1,
  kRepeated = 2,
  kConvertedList = 3,
  kConvertedUint32 = 13,
  kConvertedUint64 = 14,
  kEncodingPlain = 0,
  kEncodingRle = 3,
  kCodecUncompressed = 0,
  kPageData = 0,
};

uint64_t zigzag(int64_t n) { return (static_cast<uint64_t>(n) << 1) ^ static_cast<uint64_t>(n >> 63); }
int64_t unzigzag(uint64_t n) { return static_cast<int64_t>(n >> 1) ^ -static_cast<int64_t>(n & 1); }

void put_varint(Bytes& out, uint64_t v) {
  while (v >= 0x80) {
    out.push_back(static_cast<uint8_t>(v | 0x80));
    v >>= 7;
  }
  out.push_back(static_cast<uint8_t>(v));
}

template <class T>
void put_le(Bytes& out, T v) {
  uint8_t raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  out.insert(out.end(), raw, raw + sizeof(T));
}

class CompactWriter {
 public:
  Bytes out;

  void i32(int16_t id, int32_t v) {
    field(id, kI32);
    put_varint(out, zigzag(v));
  }
  void i64(int16_t id, int64_t v) {
    field(id, kI64);
    put_varint(out, zigzag(v));
  }
  void byte(int16_t id, int8_t v) {
    field(id, kByte);
    out.push_back(static_cast<uint8_t>(v));
  }
  void boolean(int16_t id, bool v) { field(id, v ? kBoolTrue : kBoolFalse); }
  void str(int16_t id, std::string_view s) {
    field(id, kBinary);
    raw_str(s);
  }
  void begin_struct(int16_t id) {
    field(id, kStruct);
    last_.push_back(0);
  }
  void end_struct() {
    out.push_back(0);
    last_.pop_back();
  }
  void begin_list(int16_t id, uint8_t elem, std::size_t size) {
    field(id, kList);
    if (size < 15) {
      out.push_back(static_cast<uint8_t>((size << 4) | elem));
    } else {
      out.push_back(static_cast<uint8_t>(0xF0 | elem));
      put_varint(out, size);
    }
  }
  // Struct element inside a list: no field header.
  void begin_element() { last_.push_back(0); }
  void list_i32(int32_t v) { put_varint(out, zigzag(v)); }
  void raw_str(std::string_view s) {
    put_varint(out, s.size());
    out.insert(out.end(), s.begin(), s.end());
  }
  void stop() { out.push_back(0); }

 private:
  void field(int16_t id, uint8_t type) {
    const int delta = id - last_.back();
    if (delta > 0 && delta <= 15) {
      out.push_back(static_cast<uint8_t>((delta << 4) | type));
    } else {
      out.push_back(type);
      put_varint(out, zigzag(id));
    }
    last_.back() = id;
  }

  std::vector<int16_t> last_{0};
};

// Generic decoded thrift value; structs keep (id, value) pairs.
struct TValue {
  uint8_t type = 0;
  bool b = false;
  int64_t i = 0;
  double d = 0.0;
  std::string s;
  std::vector<int16_t> ids;
  std::vector<TValue> children;

  const TValue* field(int16_t id) const {
    for (std::size_t k = 0; k < ids.size(); ++k) {
      if (ids[k] == id) return &children[k];
    }
    return nullptr;
  }
  int64_t int_or(int16_t id, int64_t fallback) const {
    const TValue* f = field(id);
    return f ? f->i : fallback;
  }
  int64_t required_int(int16_t id, std::string_view what) const {
    const TValue* f = field(id);
    if (!f) throw ParquetError(fmt::format("missing {}", what));
    return f->i;
  }
};

class CompactReader {
 public:
  CompactReader(std::span<const uint8_t> data, std::size_t pos) : data_(data), pos_(pos) {}

  TValue read_struct() {
    TValue v;
    v.type = kStruct;
    enter();
    int16_t last = 0;
    for (;;) {
      const uint8_t b = u8();
      if (b == 0) break;
      const uint8_t type = b & 0x0F;
      const int delta = b >> 4;
      const int16_t id = delta ? static_cast<int16_t>(last + delta)
                               : static_cast<int16_t>(unzigzag(varint()));
      last = id;
      TValue f;
      if (type == kBoolTrue || type == kBoolFalse) {
        f.type = type;
        f.b = type == kBoolTrue;
      } else {
        f = value(type);
      }
      v.ids.push_back(id);
      v.children.push_back(std::move(f));
    }
    --depth_;
    return v;
  }

  std::size_t pos() const { return pos_; }

 private:
  void enter() {
    if (++depth_ > 32) throw ParquetError("thrift nesting too deep");
  }

  uint8_t u8() {
    if (pos_ >= data_.size()) throw ParquetError("truncated thrift data");
    return data_[pos_++];
  }

  uint64_t varint() {
    uint64_t v = 0;
    for (int shift = 0; shift < 64; shift += 7) {
      const uint8_t b = u8();
      v |= static_cast<uint64_t>(b & 0x7F) << shift;
      if (!(b & 0x80)) return v;
    }
    throw ParquetError("varint too long");
  }

  TValue value(uint8_t type) {
    TValue v;
    v.type = type;
    switch (type) {
      case kBoolTrue:
      case kBoolFalse:  // list element form: one byte
        v.b = u8() == kBoolTrue;
        break;
      case kByte:
        v.i = static_cast<int8_t>(u8());
        break;
      case kI16:
      case kI32:
      case kI64:
        v.i = unzigzag(varint());
        break;
      case kDouble: {
        if (data_.size() - pos_ < 8 || pos_ > data_.size()) throw ParquetError("truncated double");
        std::memcpy(&v.d, data_.data() + pos_, 8);
        pos_ += 8;
        break;
      }
      case kBinary: {
        const uint64_t n = varint();
        if (n > data_.size() - pos_) throw ParquetError("truncated string");
        v.s.assign(reinterpret_cast<const char*>(data_.data() + pos_), n);
        pos_ += n;
        break;
      }
      case kList:
      case kSet: {
        const uint8_t h = u8();
        uint64_t n = h >> 4;
        if (n == 15) n = varint();
        if (n > data_.size() - pos_) throw ParquetError("implausible list size");
        enter();
        for (uint64_t k = 0; k < n; ++k) v.children.push_back(value(h & 0x0F));
        --depth_;
        break;
      }
      case kMap: {
        const uint64_t n = varint();
        if (n > data_.size() - pos_) throw ParquetError("implausible map size");
        if (n > 0) {
          const uint8_t kv = u8();
          enter();
          for (uint64_t k = 0; k < n; ++k) {
            v.children.push_back(value(kv >> 4));
            v.children.push_back(value(kv & 0x0F));
          }
          --depth_;
        }
        break;
      }
      case kStruct:
        return read_struct();
      default:
        throw ParquetError(fmt::format("unknown thrift type {}", type));
    }
    return v;
  }

  std::span<const uint8_t> data_;
  std::size_t pos_;
  int depth_ = 0;
};

// RLE/bit-packed hybrid, RLE runs only.
void put_levels(Bytes& out, const std::vector<uint8_t>& levels) {
  Bytes runs;
  std::size_t i = 0;
  while (i < levels.size()) {
    std::size_t j = i;
    while (j < levels.size() && levels[j] == levels[i]) ++j;
    put_varint(runs, static_cast<uint64_t>(j - i) << 1);
    runs.push_back(levels[i]);
    i = j;
  }
  put_le<uint32_t>(out, static_cast<uint32_t>(runs.size()));
  out.insert(out.end(), runs.begin(), runs.end());
}

std::vector<uint8_t> get_levels(std::span<const uint8_t> page, std::size_t& pos, int bit_width,
                                std::size_t count) {
  if (page.size() - pos < 4) throw ParquetError("truncated level header");
  uint32_t len = 0;
  std::memcpy(&len, page.data() + pos, 4);
  pos += 4;
  if (len > page.size() - pos) throw ParquetError("truncated level data");
  const std::size_t end = pos + len;
  std::vector<uint8_t> out;
  out.reserve(count);
  auto byte = [&]() -> uint8_t {
    if (pos >= end) throw ParquetError("truncated level run");
    return page[pos++];
  };
  while (out.size() < count) {
    uint64_t header = 0;
    for (int shift = 0;; shift += 7) {
      if (shift >= 64) throw ParquetError("bad level varint");
      const uint8_t b = byte();
      header |= static_cast<uint64_t>(b & 0x7F) << shift;
      if (!(b & 0x80)) break;
    }
    if (header & 1) {
      const std::size_t values = (header >> 1) * 8;
      const std::size_t nbytes = (header >> 1) * static_cast<std::size_t>(bit_width);
      if (nbytes > end - pos) throw ParquetError("truncated bit-packed run");
      for (std::size_t k = 0; k < values && out.size() < count; ++k) {
        uint32_t v = 0;
        for (int bit = 0; bit < bit_width; ++bit) {
          const std::size_t at = k * bit_width + bit;
          v |= ((page[pos + at / 8] >> (at % 8)) & 1u) << bit;
        }
        out.push_back(static_cast<uint8_t>(v));
      }
      pos += nbytes;
    } else {
      const std::size_t run = header >> 1;
      uint8_t v = 0;
      for (int k = 0; k < (bit_width + 7) / 8; ++k) {
        const uint8_t b = byte();
        if (k == 0) v = b;
      }
      for (std::size_t k = 0; k < run && out.size() < count; ++k) out.push_back(v);
    }
  }
  pos = end;
  return out;
}

struct LeafLayout {
  int32_t physical;
  std::vector<std::string> path;
  int max_rep;
  int max_def;
};

LeafLayout layout_of(const Column& c) {
  switch (c.kind) {
    case ColumnKind::float64:
      return {kTypeDouble, {c.name}, 0, 0};
    case ColumnKind::uint32:
      return {kTypeInt32, {c.name}, 0, 0};
    case ColumnKind::uint64:
      return {kTypeInt64, {c.name}, 0, 0};
    case ColumnKind::float32_list:
      return {kTypeFloat, {c.name, "list", "element"}, 1, 1};
  }
  throw ParquetError("unknown column kind");
}

struct Page {
  Bytes body;
  int64_t num_values = 0;
};

Page encode_page(const Column& c) {
  Page p;
  switch (c.kind) {
    case ColumnKind::float64:
      for (double v : c.f64) put_le(p.body, v);
      p.num_values = static_cast<int64_t>(c.f64.size());
      break;
    case ColumnKind::uint32:
      for (uint64_t v : c.ints) {
        if (v > std::numeric_limits<uint32_t>::max()) {
          throw ParquetError(fmt::format("value {} does not fit column {}", v, c.name));
        }
        put_le(p.body, static_cast<uint32_t>(v));
      }
      p.num_values = static_cast<int64_t>(c.ints.size());
      break;
    case ColumnKind::uint64:
      for (uint64_t v : c.ints) put_le(p.body, v);
      p.num_values = static_cast<int64_t>(c.ints.size());
      break;
    case ColumnKind::float32_list: {
      std::vector<uint8_t> rep, def;
      Bytes values;
      for (const auto& row : c.lists) {
        if (row.empty()) {
          rep.push_back(0);
          def.push_back(0);
          continue;
        }
        for (std::size_t k = 0; k < row.size(); ++k) {
          rep.push_back(k == 0 ? 0 : 1);
          def.push_back(1);
          put_le(values, row[k]);
        }
      }
      put_levels(p.body, rep);
      put_levels(p.body, def);
      p.body.insert(p.body.end(), values.begin(), values.end());
      p.num_values = static_cast<int64_t>(rep.size());
      break;
    }
  }
  return p;
}

void write_schema_element(CompactWriter& w, const Column& c) {
  auto leaf = [&](int32_t type, std::string_view name, std::optional<int32_t> converted) {
    w.begin_element();
    w.i32(1, type);
    w.i32(3, kRequired);
    w.str(4, name);
    if (converted) {
      w.i32(6, *converted);
      w.begin_struct(10);  // LogicalType
      w.begin_struct(10);  // INTEGER
      w.byte(1, *converted == kConvertedUint32 ? 32 : 64);
      w.boolean(2, false);
      w.end_struct();
      w.end_struct();
    }
    w.end_struct();
  };
  switch (c.kind) {
    case ColumnKind::float64:
      leaf(kTypeDouble, c.name, std::nullopt);
      break;
    case ColumnKind::uint32:
      leaf(kTypeInt32, c.name, kConvertedUint32);
      break;
    case ColumnKind::uint64:
      leaf(kTypeInt64, c.name, kConvertedUint64);
      break;
    case ColumnKind::float32_list:
      w.begin_element();
      w.i32(3, kRequired);
      w.str(4, c.name);
      w.i32(5, 1);
      w.i32(6, kConvertedList);
      w.begin_struct(10);
      w.begin_struct(3);  // LIST
      w.end_struct();
      w.end_struct();
      w.end_struct();
      w.begin_element();
      w.i32(3, kRepeated);
      w.str(4, "list");
      w.i32(5, 1);
      w.end_struct();
      w.begin_element();
      w.i32(1, kTypeFloat);
      w.i32(3, kRequired);
      w.str(4, "element");
      w.end_struct();
      break;
  }
}

std::size_t schema_element_count(const Column& c) {
  return c.kind == ColumnKind::float32_list ? 3 : 1;
}

}  // namespace

std::size_t Column::rows() const {
  switch (kind) {
    case ColumnKind::float64:
      return f64.size();
    case ColumnKind::uint32:
    case ColumnKind::uint64:
      return ints.size();
    case ColumnKind::float32_list:
      return lists.size();
  }
  return 0;
}

const Column& Table::column(const std::string& name) const {
  for (const Column& c : columns) {
    if (c.name == name) return c;
  }
  throw ParquetError("no column named " + name);
}

bool Table::has(const std::string& name) const {
  return std::any_of(columns.begin(), columns.end(), [&](const Column& c) { return c.name == name; });
}

Bytes write(const Table& table) {
  const std::size_t rows = table.rows();
  for (const Column& c : table.columns) {
    if (c.rows() != rows) {
      throw ParquetError(fmt::format("column {} has {} rows, expected {}", c.name, c.rows(), rows));
    }
  }

  Bytes file{'P', 'A', 'R', '1'};
  struct ChunkInfo {
    LeafLayout layout;
    int64_t offset;
    int64_t size;
    int64_t num_values;
  };
  std::vector<ChunkInfo> chunks;
  for (const Column& c : table.columns) {
    const Page page = encode_page(c);
    CompactWriter h;
    h.i32(1, kPageData);
    h.i32(2, static_cast<int32_t>(page.body.size()));
    h.i32(3, static_cast<int32_t>(page.body.size()));
    h.begin_struct(5);
    h.i32(1, static_cast<int32_t>(page.num_values));
    h.i32(2, kEncodingPlain);
    h.i32(3, kEncodingRle);
    h.i32(4, kEncodingRle);
    h.end_struct();
    h.stop();
    const int64_t offset = static_cast<int64_t>(file.size());
    file.insert(file.end(), h.out.begin(), h.out.end());
    file.insert(file.end(), page.body.begin(), page.body.end());
    chunks.push_back({layout_of(c), offset, static_cast<int64_t>(h.out.size() + page.body.size()),
                      page.num_values});
  }

  CompactWriter m;
  m.i32(1, 1);
  std::size_t n_schema = 1;
  for (const Column& c : table.columns) n_schema += schema_element_count(c);
  m.begin_list(2, kStruct, n_schema);
  m.begin_element();
  m.str(4, "schema");
  m.i32(5, static_cast<int32_t>(table.columns.size()));
  m.end_struct();
  for (const Column& c : table.columns) write_schema_element(m, c);
  m.i64(3, static_cast<int64_t>(rows));
  m.begin_list(4, kStruct, 1);
  m.begin_element();
  m.begin_list(1, kStruct, chunks.size());
  int64_t total = 0;
  for (const ChunkInfo& ch : chunks) {
    total += ch.size;
    m.begin_element();
    m.i64(2, ch.offset);
    m.begin_struct(3);
    m.i32(1, ch.layout.physical);
    if (ch.layout.max_rep > 0) {
      m.begin_list(2, kI32, 2);
      m.list_i32(kEncodingPlain);
      m.list_i32(kEncodingRle);
    } else {
      m.begin_list(2, kI32, 1);
      m.list_i32(kEncodingPlain);
    }
    m.begin_list(3, kBinary, ch.layout.path.size());
    for (const std::string& p : ch.layout.path) m.raw_str(p);
    m.i32(4, kCodecUncompressed);
    m.i64(5, ch.num_values);
    m.i64(6, ch.size);
    m.i64(7, ch.size);
    m.i64(9, ch.offset);
    m.end_struct();
    m.end_struct();
  }
  m.i64(2, total);
  m.i64(3, static_cast<int64_t>(rows));
  m.end_struct();
  m.str(6, "teleop parquet writer");
  m.stop();

  file.insert(file.end(), m.out.begin(), m.out.end());
  put_le<uint32_t>(file, static_cast<uint32_t>(m.out.size()));
  file.insert(file.end(), {'P', 'A', 'R', '1'});
  return file;
}

namespace {

struct ReadColumn {
  Column column;
  int32_t physical;
  int max_rep;
  int max_def;
};

std::vector<ReadColumn> interpret_schema(const TValue& schema) {
  const auto& el = schema.children;
  if (el.empty()) throw ParquetError("empty schema");
  const int64_t top = el[0].int_or(5, 0);
  std::vector<ReadColumn> out;
  std::size_t i = 1;
  auto name_of = [&](std::size_t k) -> std::string {
    const TValue* n = el.at(k).field(4);
    if (!n) throw ParquetError("schema element without a name");
    return n->s;
  };
  for (int64_t c = 0; c < top; ++c) {
    if (i >= el.size()) throw ParquetError("schema shorter than declared");
    const TValue& e = el[i];
    const std::string name = name_of(i);
    const int64_t children = e.int_or(5, 0);
    const int64_t repetition = e.int_or(3, kRequired);
    if (repetition != kRequired) throw ParquetError("unsupported non-required column " + name);
    if (children == 0) {
      ReadColumn rc{{name, ColumnKind::float64, {}, {}, {}}, static_cast<int32_t>(e.required_int(1, "type")), 0, 0};
      switch (rc.physical) {
        case kTypeDouble:
          rc.column.kind = ColumnKind::float64;
          break;
        case kTypeInt32:
          rc.column.kind = ColumnKind::uint32;
          break;
        case kTypeInt64:
          rc.column.kind = ColumnKind::uint64;
          break;
        default:
          throw ParquetError(fmt::format("unsupported physical type {} in column {}", rc.physical, name));
      }
      out.push_back(std::move(rc));
      i += 1;
      continue;
    }
    // LIST: required group -> repeated group -> element
    if (children != 1 || i + 2 >= el.size() || el[i + 1].int_or(3, -1) != kRepeated ||
        el[i + 1].int_or(5, 0) != 1 || el[i + 2].int_or(5, 0) != 0) {
      throw ParquetError("unsupported nested column " + name);
    }
    const TValue& leaf = el[i + 2];
    if (leaf.int_or(1, -1) != kTypeFloat) throw ParquetError("list column " + name + " is not float");
    const int64_t leaf_rep = leaf.int_or(3, kRequired);
    if (leaf_rep == kRepeated) throw ParquetError("unsupported nested column " + name);
    out.push_back({{name, ColumnKind::float32_list, {}, {}, {}},
                   kTypeFloat,
                   1,
                   leaf_rep == kOptional ? 2 : 1});
    i += 3;
  }
  return out;
}

int bit_width(int max_level) { return max_level == 0 ? 0 : std::bit_width(static_cast<unsigned>(max_level)); }

void read_chunk(std::span<const uint8_t> file, const TValue& meta, ReadColumn& rc) {
  if (meta.int_or(4, kCodecUncompressed) != kCodecUncompressed) {
    throw ParquetError("compressed column " + rc.column.name + " is not supported");
  }
  if (meta.field(11)) throw ParquetError("dictionary pages are not supported");
  const int64_t total_values = meta.required_int(5, "num_values");
  int64_t pos = meta.required_int(9, "data_page_offset");
  int64_t seen = 0;
  std::vector<float>* current_row = nullptr;
  while (seen < total_values) {
    if (pos < 0 || static_cast<std::size_t>(pos) >= file.size()) throw ParquetError("page offset out of range");
    CompactReader r(file, static_cast<std::size_t>(pos));
    const TValue header = r.read_struct();
    const int64_t size = header.required_int(3, "compressed_page_size");
    const std::size_t body_at = r.pos();
    if (size < 0 || static_cast<std::size_t>(size) > file.size() - body_at) {
      throw ParquetError("page body out of range");
    }
    pos = static_cast<int64_t>(body_at) + size;
    if (header.required_int(1, "page type") != kPageData) continue;
    const TValue* dph = header.field(5);
    if (!dph) throw ParquetError("data page without header");
    if (dph->required_int(2, "encoding") != kEncodingPlain) {
      throw ParquetError("only PLAIN encoding is supported");
    }
    const auto n = static_cast<std::size_t>(dph->required_int(1, "num_values"));
    const std::span<const uint8_t> body = file.subspan(body_at, static_cast<std::size_t>(size));
    std::size_t p = 0;
    std::vector<uint8_t> rep, def;
    if (rc.max_rep > 0) rep = get_levels(body, p, bit_width(rc.max_rep), n);
    if (rc.max_def > 0) def = get_levels(body, p, bit_width(rc.max_def), n);
    auto need = [&](std::size_t bytes) {
      if (bytes > body.size() - p) throw ParquetError("truncated values in " + rc.column.name);
    };
    Column& c = rc.column;
    for (std::size_t k = 0; k < n; ++k) {
      switch (c.kind) {
        case ColumnKind::float64: {
          need(8);
          double v;
          std::memcpy(&v, body.data() + p, 8);
          p += 8;
          c.f64.push_back(v);
          break;
        }
        case ColumnKind::uint32: {
          need(4);
          uint32_t v;
          std::memcpy(&v, body.data() + p, 4);
          p += 4;
          c.ints.push_back(v);
          break;
        }
        case ColumnKind::uint64: {
          need(8);
          uint64_t v;
          std::memcpy(&v, body.data() + p, 8);
          p += 8;
          c.ints.push_back(v);
          break;
        }
        case ColumnKind::float32_list: {
          if (rep[k] == 0) {
            c.lists.emplace_back();
            current_row = &c.lists.back();
          } else if (!current_row) {
            throw ParquetError("list continuation before first row");
          }
          if (def[k] == rc.max_def) {
            need(4);
            float v;
            std::memcpy(&v, body.data() + p, 4);
            p += 4;
            current_row->push_back(v);
          } else if (def[k] != 0) {
            throw ParquetError("null list element in " + c.name);
          }
          break;
        }
      }
    }
    seen += static_cast<int64_t>(n);
  }
}

}  // namespace

Table read(std::span<const uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "PAR1", 4) != 0 ||
      std::memcmp(bytes.data() + bytes.size() - 4, "PAR1", 4) != 0) {
    throw ParquetError("not a parquet file (bad magic)");
  }
  uint32_t meta_len = 0;
  std::memcpy(&meta_len, bytes.data() + bytes.size() - 8, 4);
  if (meta_len > bytes.size() - 12) throw ParquetError("footer length out of range");
  const std::size_t meta_at = bytes.size() - 8 - meta_len;
  const TValue meta = CompactReader(bytes.first(bytes.size() - 8), meta_at).read_struct();

  const TValue* schema = meta.field(2);
  if (!schema) throw ParquetError("missing schema");
  std::vector<ReadColumn> cols = interpret_schema(*schema);
  const int64_t num_rows = meta.required_int(3, "num_rows");

  if (const TValue* groups = meta.field(4)) {
    for (const TValue& rg : groups->children) {
      const TValue* chunks = rg.field(1);
      if (!chunks || chunks->children.size() != cols.size()) {
        throw ParquetError("row group column count does not match schema");
      }
      for (std::size_t k = 0; k < cols.size(); ++k) {
        const TValue* cm = chunks->children[k].field(3);
        if (!cm) throw ParquetError("column chunk without metadata");
        const TValue* path = cm->field(3);
        if (!path || path->children.empty() || path->children[0].s != cols[k].column.name) {
          throw ParquetError("column chunk order does not match schema");
        }
        read_chunk(bytes, *cm, cols[k]);
      }
    }
  }

  Table t;
  for (ReadColumn& rc : cols) {
    if (static_cast<int64_t>(rc.column.rows()) != num_rows) {
      throw ParquetError(fmt::format("column {} has {} rows but footer says {}", rc.column.name,
                                     rc.column.rows(), num_rows));
    }
    t.columns.push_back(std::move(rc.column));
  }
  return t;
}

}  // namespace teleop::parquet
