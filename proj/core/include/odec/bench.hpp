#ifndef ODEC_BENCH_HPP
#define ODEC_BENCH_HPP

#include "odec/dataset.hpp"
#include "odec/layers.hpp"
#include "odec/snapshots.hpp"
#include "odec/trainer.hpp"

namespace odec {

struct EvalResult {
  double top1 = 0.0;
  double top3 = 0.0;
  double wall_time = 0.0;  // seconds; median of timed full-split passes
  Index dimension = 0;
  std::string method = "original";
  std::string stage = "none";  // none | short | long
  long divergences = 0;
  std::string dataset_id;
  Index sample_count = 0;
};

// Top-k accuracy (argmax ties resolve to the lowest class index) plus the
// median wall time of timing_reps timed passes over the whole split; one
// warm-up pass is discarded. Diverged samples count as misclassified.
EvalResult evaluate(const ModelSpec& model, const Dataset& split, int timing_reps = 10);

struct RelativeCurve {
  struct Point {
    Index dimension = 0;
    std::string method;
    std::string stage;
    double speedup = 0.0;       // t_original / t_reduced
    double rel_accuracy = 0.0;  // top1_reduced / top1_original
  };
  std::vector<Point> points;
};

RelativeCurve relative_curve(const EvalResult& original, const std::vector<EvalResult>& reduced);

struct SweepConfig {
  std::vector<std::string> methods;  // pod-deim | svd | apoz
  std::vector<Index> dimensions;
  std::vector<std::string> stages = {"none", "short", "long"};
  int epochs_short = 3;
  int epochs_long = 30;  // "excessive" fine-tuning
  int timing_reps = 10;
  Index oversamples = 0;  // pod-deim
  bool fold = true;       // pod-deim
  long apoz_samples = 200;
  TrainConfig train;
};

struct SweepReport {
  EvalResult original;
  std::vector<EvalResult> rows;
  std::vector<std::string> failures;  // "method dim stage: reason"
};

// Compress at every (method, dimension), evaluate per tuning stage;
// individual cell failures are recorded and the sweep continues.
SweepReport sweep(const ModelSpec& model, const SnapshotSet& snapshots, const Dataset& train,
                  const Dataset& test, const SweepConfig& cfg);

// method,dim,stage,top1,top3,runtime rows (the original model is the
// "original" method row).
void write_report_csv(const SweepReport& report, const std::string& path,
                      const std::string& provenance_comment = "");
std::vector<EvalResult> read_report_csv(const std::string& path);

void write_curve_csv(const RelativeCurve& curve, const std::string& path,
                     const std::string& provenance_comment = "");

// Static SVG line chart of the relative accuracy-vs-speedup curves, one
// polyline per method. The provenance comment is embedded in the file.
void write_svg_chart(const RelativeCurve& curve, const std::string& path,
                     const std::string& provenance_comment = "");

}  // namespace odec

#endif
