#pragma once
// Lockstep batch predictor-corrector path tracking: per-path Lagrange
// prediction, batched Newton correction in the least-squares sense, per-path
// adaptive step control, status assignment, prefix-scan compaction of active
// paths, and endpoint refinement.

#include <functional>
#include <span>
#include <vector>

#include "polypath/homotopy.hpp"
#include "polypath/linalg.hpp"

namespace polypath {

enum class PathStatus : int8_t { failed = -1, active = 0, success = 1 };

enum class FailReason : uint8_t {
  none,
  diverged,
  step_underflow,
  max_steps,
  singular,
  no_certificate,
};

const char* fail_reason_name(FailReason r);

struct TrackConfig {
  double residual_tol = 1e-8;
  double update_tol = 1e-8;
  int max_newton = 3;
  double h_init = 0.05;
  double h_min = 1e-6;
  double h_max = 0.1;
  double expand = 1.5;
  int expand_after = 2;  // consecutive successes before the step grows
  double contract = 0.5;
  double divergence_bound = 1e8;
  uint32_t max_steps = 10000;
  uint32_t batch = 64;
  unsigned workers = 1;

  static TrackConfig defaults(Precision level);
  void validate() const;  // throws std::invalid_argument
};

// inclusive prefix scan over [status == active]; job labels are 1-based
struct CompactionResult {
  std::vector<uint32_t> scan;
  uint32_t active_count = 0;
  std::vector<uint32_t> job_idx;   // 1..active_count
  std::vector<uint32_t> path_idx;  // slots that continue, in order
};

CompactionResult compact_scan(std::span<const PathStatus> status);

// Lagrange extrapolation through up to 5 samples; ts strictly increasing
template <class R>
Cplx<R> extrapolate(std::span<const R> ts, std::span<const Cplx<R>> xs, const R& t_next);

struct StepEvent {
  uint64_t path_id;
  double t;
  double h;
  uint32_t newton_iters;
  int8_t status;
  bool accepted;
};
using ProgressSink = std::function<void(const StepEvent&)>;

struct PathStats {
  uint32_t steps = 0;
  uint32_t newton_iters = 0;
  uint32_t rejections = 0;
};

template <class R>
struct PathRecord {
  uint64_t path_id = 0;
  std::vector<Cplx<R>> x;
  R residual{};
  PathStatus status = PathStatus::active;
  FailReason reason = FailReason::none;
  PathStats stats;
  double wall_ms = 0.0;
};

template <class R>
struct SolutionSet {
  std::vector<PathRecord<R>> paths;
  uint64_t batches = 0;
  uint64_t total_rounds = 0;
};

// One lockstep cohort of at most `width` paths sharing a workspace.  Slots
// [0, active_count) stay active; finished paths are swapped to the tail by
// compact().
template <class R>
class PathBatch {
 public:
  PathBatch(const HomotopyInstance<R>& h, const TrackConfig& cfg, uint32_t width);

  void reset();
  void seed(uint64_t path_id, std::span<const Cplx<R>> x0);

  uint32_t width() const { return width_; }
  uint32_t size() const { return used_; }
  uint32_t active_count() const { return active_; }

  // lockstep stages
  void predict_all();
  uint32_t newton_correct();  // returns corrector rounds (max per-path iterations)
  void step_control_all(ProgressSink* sink = nullptr);
  void check_status_all();
  CompactionResult compact();

  uint64_t run(ProgressSink* sink = nullptr);  // to completion; total corrector rounds

  // endpoint refinement + records, appended to out
  void finalize(std::vector<PathRecord<R>>& out, double wall_ms);

  // state access (slot-indexed)
  PathStatus status(uint32_t slot) const { return status_[slot]; }
  FailReason reason(uint32_t slot) const { return reason_[slot]; }
  uint64_t path_id(uint32_t slot) const { return path_id_[slot]; }
  const PathStats& stats(uint32_t slot) const { return stats_[slot]; }
  R t_of(uint32_t slot) const { return t_[slot]; }
  R h_of(uint32_t slot) const { return h_[slot]; }
  uint32_t last_iterations(uint32_t slot) const { return last_iters_[slot]; }
  bool last_corrected(uint32_t slot) const { return corrected_[slot] != 0; }
  std::vector<Cplx<R>> accepted_point(uint32_t slot) const;
  std::vector<Cplx<R>> working_point(uint32_t slot) const;  // corrector iterate

  // test hook satisfying the corrector precondition: a fresh prediction
  void set_prediction(uint32_t slot, const R& t_next, std::span<const Cplx<R>> x_pred);

 private:
  void push_history(uint32_t slot, const R& t, uint32_t dim);
  void permute(const std::vector<uint32_t>& order);

  const HomotopyInstance<R>* hom_;
  TrackConfig cfg_;
  uint32_t width_ = 0;
  uint32_t used_ = 0;
  uint32_t active_ = 0;

  BatchWorkspace<R> ws_;   // working coordinates live in ws_.points
  PlanarBlock<R> xacc_;    // accepted coordinates
  PlanarBlock<R> hist_x_;  // history coordinates, row = i*dim + v
  std::vector<R> hist_t_;  // slot-major, 5 per slot, oldest first
  std::vector<uint8_t> hist_len_;

  std::vector<R> t_, h_, tnext_;
  std::vector<PathStatus> status_;
  std::vector<FailReason> reason_;
  std::vector<uint64_t> path_id_;
  std::vector<PathStats> stats_;
  std::vector<uint8_t> consec_ok_;
  std::vector<uint8_t> corrected_;
  std::vector<uint8_t> work_;
  std::vector<uint8_t> sing_;
  std::vector<uint32_t> last_iters_;
};

// Tracks starts [start_lo, min(count, start_hi)) in cohorts of cfg.batch.
template <class R>
SolutionSet<R> track_all(const HomotopyInstance<R>& h, const StartData<R>& starts,
                         const TrackConfig& cfg, ProgressSink* sink = nullptr,
                         uint64_t start_lo = 0, uint64_t start_hi = UINT64_MAX);

}  // namespace polypath
