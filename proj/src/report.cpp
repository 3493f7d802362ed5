#include <fstream>
#include <sstream>
#include <string>

#include "oscint/error.hpp"
#include "oscint/harness.hpp"
#include "text_io.hpp"

namespace oscint {
namespace {

constexpr std::string_view kReportHeader =
    "family,method,n_q,hidden_layers,neurons,flops_paper,flops_exact,train_nmse,val_nmse,test_nmse,epochs,seed,"
    "status";

using text::format_double;

void append_row(std::string& out, const SweepRow& r) {
  out += to_string(r.family);
  out += ',';
  out += to_string(r.method);
  out += ',' + std::to_string(r.n_q) + ',' + std::to_string(r.hidden_layers) + ',' + std::to_string(r.neurons);
  out += ',' + std::to_string(r.flops_paper) + ',' + std::to_string(r.flops_exact);
  out += ',' + format_double(r.train_nmse) + ',' + format_double(r.val_nmse) + ',' + format_double(r.test_nmse);
  out += ',' + std::to_string(r.epochs) + ',' + std::to_string(r.seed) + ',' + r.status;
}

void write_text(const std::string& text, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

}  // namespace

std::string format_report(const SweepReport& report) {
  std::string out(kReportHeader);
  out += '\n';
  for (const SweepRow& r : report) {
    append_row(out, r);
    out += '\n';
  }
  return out;
}

void emit_report(const SweepReport& report, const std::filesystem::path& path) {
  SweepReport sorted = report;
  sort_report(sorted);
  write_text(format_report(sorted), path);
}

SweepReport parse_report_text(std::string_view text, const std::string& source) {
  SweepReport report;
  std::size_t line_no = 0;
  bool header_seen = false;
  auto malformed = [&](const std::string& what) {
    return Error(ErrorCode::MalformedFile, source + ":" + std::to_string(line_no) + ": " + what);
  };
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!header_seen) {
      if (line != kReportHeader) {
        throw Error(ErrorCode::SchemaMismatch, source + ":1: unexpected report header '" + std::string(line) + "'");
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) continue;
    const auto f = text::split(line, ',');
    if (f.size() != 13) throw malformed("expected 13 fields, found " + std::to_string(f.size()));
    SweepRow r;
    try {
      r.family = parse_family(f[0]);
      r.method = parse_method(f[1]);
    } catch (const Error& e) {
      throw malformed(e.what());
    }
    if (!text::parse_int(f[2], r.n_q) || !text::parse_int(f[3], r.hidden_layers) ||
        !text::parse_int(f[4], r.neurons) || !text::parse_int(f[5], r.flops_paper) ||
        !text::parse_int(f[6], r.flops_exact) || !text::parse_double(f[7], r.train_nmse) ||
        !text::parse_double(f[8], r.val_nmse) || !text::parse_double(f[9], r.test_nmse) ||
        !text::parse_int(f[10], r.epochs) || !text::parse_int(f[11], r.seed) || f[12].empty()) {
      throw malformed("bad field value");
    }
    r.status = std::string(f[12]);
    report.push_back(std::move(r));
  }
  if (!header_seen) throw Error(ErrorCode::MalformedFile, source + ": empty report");
  return report;
}

SweepReport parse_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_report_text(buf.str(), path.string());
}

void emit_search_table(const SearchResult& result, const std::filesystem::path& path) {
  std::string out(kReportHeader);
  out += ",learning_rate,samples,val_fraction,feasible\n";
  for (const SearchRow& s : result.table) {
    append_row(out, s.row);
    out += ',' + format_double(s.learning_rate) + ',' + std::to_string(s.samples) + ',' +
           format_double(s.val_fraction) + ',' + (s.feasible ? "true" : "false") + '\n';
  }
  write_text(out, path);
}

void emit_table2(std::span<const Table2Row> rows, const std::filesystem::path& path) {
  std::string out = "family,target_nmse,flops_nn,flops_qm,best_rule,alpha,gain,paper_alpha,status\n";
  for (const Table2Row& r : rows) {
    out += std::string(to_string(r.family)) + ',' + format_double(r.target_nmse) + ',' + std::to_string(r.flops_nn) +
           ',' + std::to_string(r.flops_qm) + ',' + (r.best_rule ? std::string(to_string(*r.best_rule)) : "") + ',' +
           format_double(r.alpha) + ',' + format_double(r.gain) + ',' + format_double(r.paper_alpha) + ',' +
           r.status + '\n';
  }
  write_text(out, path);
}

void emit_oscillatoriness(std::span<const OscillatorinessPoint> points, const std::filesystem::path& path) {
  std::string out = "parameter,flops_nn,flops_qm,alpha,status\n";
  for (const OscillatorinessPoint& p : points) {
    out += format_double(p.parameter) + ',' + std::to_string(p.flops_nn) + ',' + std::to_string(p.flops_qm) + ',' +
           format_double(p.alpha) + ',' + p.status + '\n';
  }
  write_text(out, path);
}

}  // namespace oscint
