#pragma once

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "macnn/bytes.hpp"
#include "macnn/codec.hpp"
#include "macnn/error.hpp"
#include "macnn/image.hpp"
#include "macnn/nn.hpp"

namespace macnn::pipeline {

/// One supervised sample: reconstructed context, derived MPMs, chosen mode.
struct TrainingRecord {
  std::vector<std::uint8_t> context;  // 3 x N x N: above-left, above, left
  MpmList mpms;
  IntraMode target;

  friend bool operator==(const TrainingRecord&, const TrainingRecord&) = default;
};

struct Dataset {
  int n = 8;
  int qp = 32;
  std::vector<TrainingRecord> records;

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Encodes with the baseline arm and returns one record per block in raster order.
inline std::vector<TrainingRecord> extract_records(const Plane& plane, int n, int qp) {
  auto encoded = codec::encode_image(plane, {n, qp, codec::ModeCoder::kBaseline, nullptr});
  std::vector<TrainingRecord> records;
  records.reserve(encoded.blocks.size());
  for (auto& b : encoded.blocks) records.push_back({std::move(b.context), b.mpms, b.mode});
  return records;
}

inline constexpr std::uint32_t kMacdVersion = 1;

inline Bytes write_dataset(const Dataset& ds) {
  const std::size_t ctx_size = 3 * static_cast<std::size_t>(ds.n) * ds.n;
  ByteWriter out;
  out.str("MACD");
  out.u32(kMacdVersion);
  out.u8(static_cast<std::uint8_t>(ds.n));
  out.u8(static_cast<std::uint8_t>(ds.qp));
  out.u32(static_cast<std::uint32_t>(ds.records.size()));
  for (const auto& r : ds.records) {
    if (r.context.size() != ctx_size) throw InternalError("record context has the wrong size");
    out.u8(static_cast<std::uint8_t>(r.target.value()));
    for (auto m : r.mpms) out.u8(static_cast<std::uint8_t>(m.value()));
    out.raw(r.context);
  }
  out.seal_crc();
  return std::move(out).take();
}

/// Parses a whole MACD file; any defect rejects the file with no partial result.
inline Dataset read_dataset(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  if (bytes.size() < 4 || in.str(4) != "MACD") throw FormatError("not a MACD dataset");
  in = ByteReader(verify_crc_trailer(bytes));
  in.raw(4);
  if (auto v = in.u32(); v != kMacdVersion) throw FormatError("unsupported MACD version " + std::to_string(v));
  Dataset ds;
  ds.n = in.u8();
  ds.qp = in.u8();
  if (ds.n != 8 && ds.n != 16) throw FormatError("MACD block size must be 8 or 16");
  const std::uint32_t count = in.u32();
  const std::size_t ctx_size = 3 * static_cast<std::size_t>(ds.n) * ds.n;
  if (in.remaining() != std::uint64_t{count} * (4 + ctx_size)) throw FormatError("MACD record count does not match payload");
  ds.records.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    TrainingRecord r;
    r.target = IntraMode(in.u8());
    for (auto& m : r.mpms) m = IntraMode(in.u8());
    if (r.mpms[0] == r.mpms[1] || r.mpms[0] == r.mpms[2] || r.mpms[1] == r.mpms[2])
      throw FormatError("MACD record has repeated MPMs");
    auto ctx = in.raw(ctx_size);
    r.context.assign(ctx.begin(), ctx.end());
    ds.records.push_back(std::move(r));
  }
  return ds;
}

/// Bit counts of the two-round comparison for one picture (or a sum of pictures).
struct BitsReport {
  std::string name;
  std::uint64_t blocks = 0;
  std::uint64_t b_all1 = 0;  // round 1 total: baseline modes + residual
  std::uint64_t b_2 = 0;     // round 2 residual
  std::uint64_t b_cnn = 0;   // round 2 modes

  std::uint64_t b_all2() const { return b_2 + b_cnn; }
  std::uint64_t b_cabac() const { return b_all1 - b_2; }

  /// Relative change of mode bits, (B_CNN - B_CABAC) / B_CABAC; negative is a saving.
  std::optional<double> savings_modes() const {
    if (b_cabac() == 0) return std::nullopt;
    return (static_cast<double>(b_cnn) - static_cast<double>(b_cabac())) / static_cast<double>(b_cabac());
  }
  /// Relative change of total bits, (B_All2 - B_All1) / B_All1.
  std::optional<double> savings_overall() const {
    if (b_all1 == 0) return std::nullopt;
    return (static_cast<double>(b_all2()) - static_cast<double>(b_all1)) / static_cast<double>(b_all1);
  }

  BitsReport& operator+=(const BitsReport& o) {
    blocks += o.blocks;
    b_all1 += o.b_all1;
    b_2 += o.b_2;
    b_cnn += o.b_cnn;
    return *this;
  }
};

/// Two rounds over one picture: baseline then cnn. Both rounds must choose
/// identical modes and emit identical residual streams.
inline BitsReport evaluate_image(const Plane& plane, int n, int qp, const nn::ModelWeights& weights, std::string name = {}) {
  if (weights.block_size != n) throw ShapeError("weights do not match N=" + std::to_string(n));
  const auto round1 = codec::encode_image(plane, {n, qp, codec::ModeCoder::kBaseline, nullptr});
  const auto round2 = codec::encode_image(plane, {n, qp, codec::ModeCoder::kCnn, &weights});
  if (round1.blocks.size() != round2.blocks.size()) throw InternalError("arms coded different block counts");
  for (std::size_t i = 0; i < round1.blocks.size(); ++i)
    if (round1.blocks[i].mode != round2.blocks[i].mode) throw InternalError("arms chose different modes");
  if (round1.residual_stream != round2.residual_stream) throw InternalError("arms produced different residual streams");

  BitsReport r;
  r.name = std::move(name);
  r.blocks = round1.blocks.size();
  r.b_all1 = round1.total_bits();
  r.b_2 = round2.residual_bits();
  r.b_cnn = round2.mode_bits();
  if (r.b_all1 - r.b_2 != round1.mode_bits()) throw InternalError("bits accounting identity violated");
  return r;
}

/// Runs `work(i)` for i in [0, count) on up to hardware_concurrency threads.
/// Results are written by index, so ordering never depends on completion order.
template <typename Fn>
void parallel_for(std::size_t count, Fn&& work) {
  const std::size_t threads = std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) work(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::jthread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          work(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  pool.clear();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

struct NamedPlane {
  std::string name;
  Plane plane;
};

inline std::vector<BitsReport> evaluate(const std::vector<NamedPlane>& images, int n, int qp, const nn::ModelWeights& weights) {
  std::vector<BitsReport> reports(images.size());
  parallel_for(images.size(), [&](std::size_t i) { reports[i] = evaluate_image(images[i].plane, n, qp, weights, images[i].name); });
  return reports;
}

/// Bit-summed aggregate over pictures.
inline BitsReport aggregate(const std::vector<BitsReport>& reports, std::string name = "aggregate") {
  BitsReport total;
  total.name = std::move(name);
  for (const auto& r : reports) total += r;
  return total;
}

enum class ReportFormat { kCsv, kMarkdown };

inline std::string format_percent(std::optional<double> ratio) {
  if (!ratio) return "n/a";
  return fmt::format("{:.1f}%", *ratio * 100.0);
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
  return q + "\"";
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else if (c != '\r') {
      fields.back() += c;
    }
  }
  return fields;
}

}  // namespace detail

inline constexpr const char* kCsvHeader = "image,n,qp,blocks,B_All1,B_2,B_CNN,B_All2,B_CABAC,savings_modes,savings_overall";

/// Per-picture rows followed by the bit-summed aggregate row. Percentages use
/// the sign convention of negative = fewer bits than the baseline.
inline std::string report(const std::vector<BitsReport>& reports, int n, int qp, ReportFormat format) {
  if (reports.empty()) throw UsageError("report needs at least one result");
  std::vector<BitsReport> rows = reports;
  rows.push_back(aggregate(reports));
  std::string out;
  if (format == ReportFormat::kCsv) {
    out += kCsvHeader;
    out += '\n';
    for (const auto& r : rows)
      out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", detail::csv_field(r.name), n, qp, r.blocks, r.b_all1, r.b_2,
                         r.b_cnn, r.b_all2(), r.b_cabac(), format_percent(r.savings_modes()),
                         format_percent(r.savings_overall()));
  } else {
    out += fmt::format("N={} QP={}\n\n", n, qp);
    out += "| image | blocks | B_All1 | B_2 | B_CNN | B_All2 | B_CABAC | modes | overall |\n";
    out += "|---|---:|---:|---:|---:|---:|---:|---:|---:|\n";
    for (const auto& r : rows)
      out += fmt::format("| {} | {} | {} | {} | {} | {} | {} | {} | {} |\n", r.name, r.blocks, r.b_all1, r.b_2, r.b_cnn,
                         r.b_all2(), r.b_cabac(), format_percent(r.savings_modes()), format_percent(r.savings_overall()));
  }
  return out;
}

struct ParsedReport {
  int n = 0, qp = 0;
  std::vector<BitsReport> rows;
};

/// Reads per-picture rows back from CSV produced by report(); the aggregate row is dropped.
inline ParsedReport parse_report_csv(const std::string& text) {
  ParsedReport parsed;
  std::size_t start = 0;
  bool header = true;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(start, end - start);
    start = end + 1;
    if (line.empty() || line == "\r") continue;
    if (header) {
      if (line.rfind(kCsvHeader, 0) != 0) throw FormatError("report CSV has an unexpected header");
      header = false;
      continue;
    }
    const auto f = detail::split_csv_line(line);
    if (f.size() != 11) throw FormatError("report CSV row has " + std::to_string(f.size()) + " fields");
    try {
      BitsReport r;
      r.name = f[0];
      parsed.n = std::stoi(f[1]);
      parsed.qp = std::stoi(f[2]);
      r.blocks = std::stoull(f[3]);
      r.b_all1 = std::stoull(f[4]);
      r.b_2 = std::stoull(f[5]);
      r.b_cnn = std::stoull(f[6]);
      if (r.b_2 > r.b_all1) throw FormatError("report CSV row has B_2 > B_All1");
      if (r.name != "aggregate") parsed.rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw FormatError("report CSV row has a malformed number");
    }
  }
  if (header) throw FormatError("report CSV is empty");
  return parsed;
}

}  // namespace macnn::pipeline
