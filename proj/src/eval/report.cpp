#include "adq/eval/report.h"

#include <cstdio>
#include <istream>
#include <ostream>

#include "adq/engagement/csv.h"
#include "adq/error.h"

namespace adq::eval {

namespace {

const std::vector<std::string> kFoldHeader = {"method", "k",     "seed",  "fold", "auc",
                                              "n_test", "n_pos", "n_neg", "lambda"};

long parse_int(const std::string& s, std::size_t line, std::size_t col) {
  const double v = csv::parse_double(s, line, col);
  if (v != static_cast<double>(static_cast<long>(v))) throw ParseError(line, col, "expected an integer");
  return static_cast<long>(v);
}

std::uint64_t parse_u64(const std::string& s, std::size_t line, std::size_t col) {
  std::uint64_t v = 0;
  if (s.empty()) throw ParseError(line, col, "empty field");
  for (char c : s) {
    if (c < '0' || c > '9') throw ParseError(line, col, "expected an unsigned integer");
    v = v * 10 + static_cast<std::uint64_t>(c - '0');
  }
  return v;
}

}  // namespace

void write_fold_csv(std::ostream& out, const std::vector<EvalReport>& reports) {
  csv::write_row(out, kFoldHeader);
  for (const auto& r : reports) {
    for (const auto& f : r.folds) {
      csv::write_row(out, {r.method, std::to_string(r.k), std::to_string(r.seed), std::to_string(f.fold),
                           csv::format_double(f.auc), std::to_string(f.n_test), std::to_string(f.n_pos),
                           std::to_string(f.n_neg), csv::format_double(f.lambda)});
    }
  }
}

std::vector<EvalReport> read_fold_csv(std::istream& in) {
  std::string line;
  if (!csv::read_line(in, line)) throw ParseError(1, 1, "missing header");
  if (csv::split_line(line, 1) != kFoldHeader) throw ParseError(1, 1, "unexpected fold report header");
  std::vector<EvalReport> out;
  std::size_t line_no = 1;
  while (csv::read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = csv::split_line(line, line_no);
    if (f.size() != kFoldHeader.size()) throw ParseError(line_no, 1, "expected 9 columns");
    EvalReport* r = nullptr;
    for (auto& existing : out) {
      if (existing.method == f[0]) r = &existing;
    }
    if (!r) {
      out.emplace_back();
      r = &out.back();
      r->method = f[0];
      r->k = static_cast<int>(parse_int(f[1], line_no, 2));
      r->seed = parse_u64(f[2], line_no, 3);
    }
    FoldResult fr;
    fr.fold = static_cast<int>(parse_int(f[3], line_no, 4));
    fr.auc = csv::parse_double(f[4], line_no, 5);
    fr.n_test = static_cast<int>(parse_int(f[5], line_no, 6));
    fr.n_pos = static_cast<int>(parse_int(f[6], line_no, 7));
    fr.n_neg = static_cast<int>(parse_int(f[7], line_no, 8));
    fr.lambda = csv::parse_double(f[8], line_no, 9);
    r->folds.push_back(fr);
  }
  for (auto& r : out) r.summarize();
  return out;
}

void write_runtime_csv(std::ostream& out, const std::vector<EvalReport>& reports) {
  csv::write_row(out, {"method", "fold", "train_seconds", "predict_seconds"});
  for (const auto& r : reports) {
    for (const auto& f : r.folds) {
      csv::write_row(out, {r.method, std::to_string(f.fold), csv::format_double(f.train_seconds),
                           csv::format_double(f.predict_seconds)});
    }
  }
}

std::string summary_table(const std::vector<EvalReport>& reports) {
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-10s %8s %10s %6s\n", "method", "AUC", "95% CI", "folds");
  out += buf;
  for (const auto& r : reports) {
    char ci[32];
    std::snprintf(ci, sizeof ci, "+/-%.4f", r.ci_half_width);
    std::snprintf(buf, sizeof buf, "%-10s %8.4f %10s %6zu\n", r.method.c_str(), r.mean_auc, ci,
                  r.folds.size());
    out += buf;
  }
  return out;
}

std::string runtime_table(const std::vector<EvalReport>& reports) {
  std::string out;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-10s %14s %14s\n", "method", "train s/fold", "predict s/fold");
  out += buf;
  for (const auto& r : reports) {
    double tr = 0.0, pr = 0.0;
    for (const auto& f : r.folds) {
      tr += f.train_seconds;
      pr += f.predict_seconds;
    }
    const double n = r.folds.empty() ? 1.0 : static_cast<double>(r.folds.size());
    std::snprintf(buf, sizeof buf, "%-10s %14.3f %14.3f\n", r.method.c_str(), tr / n, pr / n);
    out += buf;
  }
  return out;
}

void write_coefficients_csv(std::ostream& out, const models::LinearModel& model) {
  csv::write_row(out, {"feature_name", "coefficient"});
  for (const auto& [name, w] : models::selected_coefficients(model)) {
    csv::write_row(out, {name, csv::format_double(w)});
  }
}

}  // namespace adq::eval
