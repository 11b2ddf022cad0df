// Command-line front end: dataset building, encode/decode, two-round
// evaluation, report rendering, synthetic corpus generation and self-test.

#include <fmt/format.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "macnn/bytes.hpp"
#include "macnn/codec.hpp"
#include "macnn/error.hpp"
#include "macnn/image.hpp"
#include "macnn/pipeline.hpp"
#include "macnn/selftest.hpp"
#include "macnn/synth.hpp"
#include "macnn/weights_io.hpp"

namespace {

using namespace macnn;

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  write_file(out_path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string stats_line(const codec::CodingResult& r) {
  return fmt::format("modes={} residual={} total={}\n", r.mode_bits(), r.residual_bits(), r.total_bits());
}

pipeline::ReportFormat parse_format(const std::string& s) {
  return s == "markdown" ? pipeline::ReportFormat::kMarkdown : pipeline::ReportFormat::kCsv;
}

void check_min_size(const Plane& p, int n, const std::string& path) {
  if (p.width < n || p.height < n)
    throw UsageError(fmt::format("{} is {}x{}, smaller than one {}x{} block", path, p.width, p.height, n, n));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learned-probability arithmetic coding of intra prediction modes"};
  app.require_subcommand(1);

  int n = 8, qp = 32;
  std::vector<std::string> inputs;
  std::string input, output, weights_path, model = "baseline", format = "csv", golden_path;
  std::uint64_t seed = 1;
  int count = 1, width = 512, height = 384;

  auto add_n_qp = [&](CLI::App* cmd) {
    cmd->add_option("--n", n, "block size")->required()->check(CLI::IsMember({8, 16}));
    cmd->add_option("--qp", qp, "quantization parameter")->required()->check(CLI::Range(0, 51));
  };

  auto* dataset = app.add_subcommand("dataset-build", "extract training records from PGM pictures");
  dataset->add_option("--in", inputs, "input PGM files")->required();
  add_n_qp(dataset);
  dataset->add_option("--out", output, "output MACD file")->required();

  auto* encode = app.add_subcommand("encode", "encode a PGM picture into a MACS container");
  encode->add_option("--in", input, "input PGM")->required();
  add_n_qp(encode);
  encode->add_option("--model", model, "mode coder")->check(CLI::IsMember({"baseline", "cnn"}));
  encode->add_option("--weights", weights_path, "MACW weights (cnn only)");
  encode->add_option("--out", output, "output MACS file")->required();

  auto* decode = app.add_subcommand("decode", "decode a MACS container into a PGM picture");
  decode->add_option("--in", input, "input MACS")->required();
  decode->add_option("--weights", weights_path, "MACW weights (cnn containers)");
  decode->add_option("--out", output, "output PGM")->required();

  auto* evaluate = app.add_subcommand("evaluate", "two-round bit comparison of the baseline and cnn mode coders");
  evaluate->add_option("--in", inputs, "input PGM files")->required();
  add_n_qp(evaluate);
  evaluate->add_option("--weights", weights_path, "MACW weights")->required();
  evaluate->add_option("--format", format, "csv or markdown")->check(CLI::IsMember({"csv", "markdown"}));
  evaluate->add_option("--out", output, "write the report here instead of stdout");

  auto* report = app.add_subcommand("report", "re-render a CSV report produced by evaluate");
  report->add_option("--in", input, "CSV report")->required();
  report->add_option("--format", format, "csv or markdown")->check(CLI::IsMember({"csv", "markdown"}));
  report->add_option("--out", output, "write the report here instead of stdout");

  auto* synth_cmd = app.add_subcommand("synth", "write deterministic synthetic PGM pictures");
  synth_cmd->add_option("--seed", seed, "first seed");
  synth_cmd->add_option("--count", count, "number of pictures")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--width", width, "picture width")->check(CLI::Range(1, 65535));
  synth_cmd->add_option("--height", height, "picture height")->check(CLI::Range(1, 65535));
  synth_cmd->add_option("--out-dir", output, "output directory (must exist)")->required();

  auto* selftest = app.add_subcommand("selftest", "run embedded golden-vector checks");
  selftest->add_option("--golden", golden_path, "check against this hex fixture file instead of the embedded vectors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ErrorKind::kUsage);
  }

  try {
    if (*dataset) {
      pipeline::Dataset ds{n, qp, {}};
      for (const auto& path : inputs) {
        const Plane p = read_pgm(path);
        check_min_size(p, n, path);
        auto records = pipeline::extract_records(p, n, qp);
        ds.records.insert(ds.records.end(), std::make_move_iterator(records.begin()), std::make_move_iterator(records.end()));
      }
      write_file(output, pipeline::write_dataset(ds));
      fmt::print("records={}\n", ds.records.size());
    } else if (*encode) {
      const Plane p = read_pgm(input);
      check_min_size(p, n, input);
      std::optional<nn::ModelWeights> weights;
      const auto coder = model == "cnn" ? codec::ModeCoder::kCnn : codec::ModeCoder::kBaseline;
      if (coder == codec::ModeCoder::kCnn) {
        if (weights_path.empty()) throw UsageError("--model cnn needs --weights");
        weights = nn::load_weights_file(weights_path);
      }
      const auto result = codec::encode_image(p, {n, qp, coder, weights ? &*weights : nullptr});
      write_file(output, result.container);
      fmt::print("{}", stats_line(result));
    } else if (*decode) {
      const Bytes data = read_file(input);
      std::optional<nn::ModelWeights> weights;
      if (!weights_path.empty()) weights = nn::load_weights_file(weights_path);
      const auto container = codec::read_container(data);
      if (container.mode_coder == codec::ModeCoder::kCnn && !weights)
        throw UsageError("this container was coded with the cnn arm; pass --weights");
      const auto result = codec::decode_image(data, weights ? &*weights : nullptr);
      write_pgm(output, result.recon);
      fmt::print("{}", stats_line(result));
    } else if (*evaluate) {
      const auto weights = nn::load_weights_file(weights_path);
      if (weights.block_size != n)
        throw ShapeError(fmt::format("weights are for N={}, --n is {}", weights.block_size, n));
      std::vector<pipeline::NamedPlane> images;
      for (const auto& path : inputs) {
        Plane p = read_pgm(path);
        check_min_size(p, n, path);
        images.push_back({path, std::move(p)});
      }
      const auto reports = pipeline::evaluate(images, n, qp, weights);
      emit(pipeline::report(reports, n, qp, parse_format(format)), output);
    } else if (*report) {
      const Bytes data = read_file(input);
      const auto parsed = pipeline::parse_report_csv(std::string(data.begin(), data.end()));
      emit(pipeline::report(parsed.rows, parsed.n, parsed.qp, parse_format(format)), output);
    } else if (*synth_cmd) {
      if (!std::filesystem::is_directory(output)) throw IoError(output + " is not a directory");
      for (int i = 0; i < count; ++i) {
        const auto s = seed + static_cast<std::uint64_t>(i);
        const auto path = std::filesystem::path(output) / fmt::format("synth_{}.pgm", s);
        write_pgm(path, synth::generate(s, width, height));
        fmt::print("{}\n", path.string());
      }
    } else if (*selftest) {
      const auto start = std::chrono::steady_clock::now();
      auto golden = selftest::embedded_golden();
      if (!golden_path.empty()) {
        const Bytes data = read_file(golden_path);
        golden = selftest::parse_golden(std::string(data.begin(), data.end()));
      }
      const auto checks = selftest::run(golden);
      int failed = 0;
      for (const auto& c : checks) {
        fmt::print("{} {}: {}\n", c.passed ? "PASS" : "FAIL", c.name, c.detail);
        failed += c.passed ? 0 : 1;
      }
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      fmt::print("{} checks, {} failed, {:.2f} s\n", checks.size(), failed, secs);
      if (failed) return static_cast<int>(ErrorKind::kIntegrity);
    }
  } catch (const Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    fmt::print(stderr, "internal error: {}\n", e.what());
    return static_cast<int>(ErrorKind::kInternal);
  }
  return 0;
}
