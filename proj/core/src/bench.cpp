#include "odec/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "odec/baselines.hpp"
#include "odec/mor.hpp"

namespace odec {

namespace {

// True label among the k highest scores; equal scores rank by class index.
bool in_top_k(const Vector& probs, int label, int k) {
  const double mine = probs(label);
  int better = 0;
  for (Index c = 0; c < probs.size(); ++c) {
    if (c == label) continue;
    if (probs(c) > mine || (probs(c) == mine && c < label)) ++better;
  }
  return better < k;
}

Index model_dimension(const ModelSpec& model) {
  const auto& ode =
      std::get<OdeLayer>(model.layers[static_cast<std::size_t>(model.ode_layer_index())]);
  return ode.system->dim();
}

}  // namespace

EvalResult evaluate(const ModelSpec& model, const Dataset& split, int timing_reps) {
  model.validate();
  split.validate();
  if (split.sample_count() == 0) fail("evaluate: empty split");
  if (timing_reps < 1) fail("evaluate: timing_reps must be >= 1");

  EvalResult res;
  res.dataset_id = split.id;
  res.sample_count = split.sample_count();
  res.dimension = model_dimension(model);
  if (model.compression) {
    res.method = model.compression->method;
    res.dimension = model.compression->dimension;
  }

  long top1 = 0, top3 = 0, diverged = 0;
  for (Index s = 0; s < split.sample_count(); ++s) {
    try {
      const Vector probs = forward(model, split.images.col(s));
      const int label = split.labels[static_cast<std::size_t>(s)];
      if (in_top_k(probs, label, 1)) ++top1;
      if (in_top_k(probs, label, 3)) ++top3;
    } catch (const DivergenceError&) {
      ++diverged;  // counted as misclassified
    }
  }
  const auto total = static_cast<double>(split.sample_count());
  res.top1 = static_cast<double>(top1) / total;
  res.top3 = static_cast<double>(top3) / total;
  res.divergences = diverged;

  // Timing: one discarded warm-up pass, then the median of timing_reps
  // sequential full-split passes on the monotonic clock.
  auto timed_pass = [&]() {
    const auto start = std::chrono::steady_clock::now();
    for (Index s = 0; s < split.sample_count(); ++s) {
      try {
        forward(model, split.images.col(s));
      } catch (const DivergenceError&) {
      }
    }
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(stop - start).count();
  };
  timed_pass();  // warm-up
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(timing_reps));
  for (int r = 0; r < timing_reps; ++r) times.push_back(timed_pass());
  std::sort(times.begin(), times.end());
  const std::size_t mid = times.size() / 2;
  res.wall_time = times.size() % 2 == 1 ? times[mid] : 0.5 * (times[mid - 1] + times[mid]);
  return res;
}

RelativeCurve relative_curve(const EvalResult& original, const std::vector<EvalResult>& reduced) {
  RelativeCurve curve;
  for (const EvalResult& r : reduced) {
    if (r.dataset_id != original.dataset_id || r.sample_count != original.sample_count)
      fail("relative_curve: split mismatch (", r.dataset_id, " with ", r.sample_count,
           " samples vs ", original.dataset_id, " with ", original.sample_count, ")");
    RelativeCurve::Point p;
    p.dimension = r.dimension;
    p.method = r.method;
    p.stage = r.stage;
    p.speedup = original.wall_time / r.wall_time;
    p.rel_accuracy = r.top1 / original.top1;
    curve.points.push_back(p);
  }
  return curve;
}

SweepReport sweep(const ModelSpec& model, const SnapshotSet& snapshots, const Dataset& train,
                  const Dataset& test, const SweepConfig& cfg) {
  model.validate();
  SweepReport report;
  report.original = evaluate(model, test, cfg.timing_reps);

  for (const std::string& method : cfg.methods) {
    // APoZ scores depend on the data, not the dimension; compute once.
    std::optional<ApozScores> apoz;
    for (Index dim : cfg.dimensions) {
      ModelSpec compressed;
      try {
        if (method == "pod-deim") {
          compressed = reduce_model(model, snapshots, dim, dim, cfg.oversamples, cfg.fold);
        } else if (method == "svd") {
          compressed = svd_truncate_model(model, dim);
        } else if (method == "apoz") {
          if (!apoz) apoz = apoz_scores(model, train, cfg.apoz_samples);
          compressed = apoz_prune(model, *apoz, dim);
        } else {
          fail("unknown compression method: ", method);
        }
      } catch (const Error& e) {
        report.failures.push_back(concat(method, " ", dim, " compress: ", e.what()));
        std::cerr << "sweep: " << report.failures.back() << "\n";
        continue;
      }

      for (const std::string& stage : cfg.stages) {
        try {
          ModelSpec staged = compressed;
          if (stage != "none") {
            TrainConfig tc = cfg.train;
            tc.epochs = stage == "short" ? cfg.epochs_short : cfg.epochs_long;
            fit(staged, train, nullptr, tc);
          }
          EvalResult r = evaluate(staged, test, cfg.timing_reps);
          r.method = method;
          r.dimension = dim;
          r.stage = stage;
          report.rows.push_back(r);
        } catch (const Error& e) {
          report.failures.push_back(concat(method, " ", dim, " ", stage, ": ", e.what()));
          std::cerr << "sweep: " << report.failures.back() << "\n";
        }
      }
    }
  }
  return report;
}

namespace {

void write_row(std::ofstream& out, const EvalResult& r) {
  out << r.method << "," << r.dimension << "," << r.stage << "," << format_double(r.top1) << ","
      << format_double(r.top3) << "," << format_double(r.wall_time) << "\n";
}

}  // namespace

void write_report_csv(const SweepReport& report, const std::string& path,
                      const std::string& provenance_comment) {
  std::ofstream out(path);
  if (!out) fail("cannot write report csv: ", path);
  out << "# schema: odec-report/1 cores=1\n";
  if (!provenance_comment.empty()) out << "# " << provenance_comment << "\n";
  out << "method,dim,stage,top1,top3,runtime\n";
  write_row(out, report.original);
  for (const EvalResult& r : report.rows) write_row(out, r);
  for (const std::string& f : report.failures) out << "# failed: " << f << "\n";
}

std::vector<EvalResult> read_report_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail("cannot open report csv: ", path);
  std::vector<EvalResult> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != "method,dim,stage,top1,top3,runtime")
        fail("report csv: unexpected header: ", line);
      header_seen = true;
      continue;
    }
    std::istringstream ls(line);
    std::string field;
    EvalResult r;
    std::getline(ls, r.method, ',');
    std::getline(ls, field, ',');
    r.dimension = std::stol(field);
    std::getline(ls, r.stage, ',');
    std::getline(ls, field, ',');
    r.top1 = std::stod(field);
    std::getline(ls, field, ',');
    r.top3 = std::stod(field);
    std::getline(ls, field, ',');
    r.wall_time = std::stod(field);
    rows.push_back(r);
  }
  if (!header_seen) fail("report csv: missing header: ", path);
  return rows;
}

void write_curve_csv(const RelativeCurve& curve, const std::string& path,
                     const std::string& provenance_comment) {
  std::ofstream out(path);
  if (!out) fail("cannot write curve csv: ", path);
  out << "# schema: odec-curve/1\n";
  if (!provenance_comment.empty()) out << "# " << provenance_comment << "\n";
  out << "method,dim,stage,speedup,rel_accuracy\n";
  for (const auto& p : curve.points)
    out << p.method << "," << p.dimension << "," << p.stage << "," << format_double(p.speedup)
        << "," << format_double(p.rel_accuracy) << "\n";
}

void write_svg_chart(const RelativeCurve& curve, const std::string& path,
                     const std::string& provenance_comment) {
  if (curve.points.empty()) fail("write_svg_chart: empty curve");
  const int w = 640, h = 480, margin = 56;

  double xmax = 1.0, ymax = 1.0, ymin = 1.0;
  for (const auto& p : curve.points) {
    xmax = std::max(xmax, p.speedup);
    ymax = std::max(ymax, p.rel_accuracy);
    ymin = std::min(ymin, p.rel_accuracy);
  }
  xmax *= 1.05;
  ymax = std::min(1.1, ymax + 0.05);
  ymin = std::max(0.0, ymin - 0.05);

  auto px = [&](double x) { return margin + x / xmax * (w - 2 * margin); };
  auto py = [&](double y) { return h - margin - (y - ymin) / (ymax - ymin) * (h - 2 * margin); };

  std::vector<std::string> methods;
  for (const auto& p : curve.points)
    if (std::find(methods.begin(), methods.end(), p.method) == methods.end())
      methods.push_back(p.method);
  const char* colors[] = {"#7b3294", "#008837", "#d7a500", "#c2361b"};

  std::ofstream out(path);
  if (!out) fail("cannot write svg chart: ", path);
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
  if (!provenance_comment.empty()) out << "<!-- " << provenance_comment << " -->\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<line x1='" << px(0) << "' y1='" << py(ymin) << "' x2='" << px(xmax) << "' y2='"
      << py(ymin) << "' stroke='black'/>\n";
  out << "<line x1='" << px(0) << "' y1='" << py(ymin) << "' x2='" << px(0) << "' y2='"
      << py(ymax) << "' stroke='black'/>\n";
  out << "<text x='" << w / 2 << "' y='" << h - 12
      << "' text-anchor='middle' font-size='13'>speedup (t_original / t_reduced)</text>\n";
  out << "<text x='14' y='" << h / 2 << "' text-anchor='middle' font-size='13' transform='rotate(-90 14 "
      << h / 2 << ")'>relative top-1 accuracy</text>\n";
  // reference line at relative accuracy 1
  if (ymin <= 1.0 && 1.0 <= ymax)
    out << "<line x1='" << px(0) << "' y1='" << py(1.0) << "' x2='" << px(xmax) << "' y2='"
        << py(1.0) << "' stroke='#bbbbbb' stroke-dasharray='4 3'/>\n";

  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    const std::string& method = methods[mi];
    const char* color = colors[mi % 4];
    // points sorted by speedup within a method form the curve
    std::vector<RelativeCurve::Point> pts;
    for (const auto& p : curve.points)
      if (p.method == method) pts.push_back(p);
    std::sort(pts.begin(), pts.end(),
              [](const auto& a, const auto& b) { return a.speedup < b.speedup; });
    out << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
    for (const auto& p : pts) out << px(p.speedup) << "," << py(p.rel_accuracy) << " ";
    out << "'/>\n";
    for (const auto& p : pts)
      out << "<circle cx='" << px(p.speedup) << "' cy='" << py(p.rel_accuracy)
          << "' r='3' fill='" << color << "'/>\n";
    out << "<text x='" << w - margin - 110 << "' y='" << margin + 16 * (mi + 1)
        << "' font-size='12' fill='" << color << "'>" << method << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace odec
