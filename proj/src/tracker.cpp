#include "polypath/tracker.hpp"

#include <algorithm>
#include <chrono>

#include "polypath/parallel.hpp"

namespace polypath {

const char* fail_reason_name(FailReason r) {
  switch (r) {
    case FailReason::none: return "converged";
    case FailReason::diverged: return "diverged";
    case FailReason::step_underflow: return "step-underflow";
    case FailReason::max_steps: return "max-steps";
    case FailReason::singular: return "singular";
    default: return "no-certificate";
  }
}

TrackConfig TrackConfig::defaults(Precision level) {
  TrackConfig cfg;
  switch (level) {
    case Precision::d:
      cfg.residual_tol = cfg.update_tol = 1e-8;
      cfg.h_min = 1e-6;
      break;
    case Precision::dd:
      cfg.residual_tol = cfg.update_tol = 1e-14;
      cfg.h_min = 1e-8;
      break;
    default:
      cfg.residual_tol = cfg.update_tol = 1e-28;
      cfg.h_min = 1e-8;
      break;
  }
  return cfg;
}

void TrackConfig::validate() const {
  if (!(h_min > 0.0 && h_min <= h_init && h_init <= h_max && h_max <= 0.1))
    throw std::invalid_argument("TrackConfig: need 0 < h_min <= h_init <= h_max <= 0.1");
  if (max_newton < 1) throw std::invalid_argument("TrackConfig: max_newton must be >= 1");
  if (batch < 1) throw std::invalid_argument("TrackConfig: batch must be >= 1");
  if (!(expand >= 1.0) || !(contract > 0.0 && contract < 1.0))
    throw std::invalid_argument("TrackConfig: bad expand/contract factors");
  if (!(residual_tol > 0.0) || !(update_tol > 0.0))
    throw std::invalid_argument("TrackConfig: tolerances must be positive");
}

CompactionResult compact_scan(std::span<const PathStatus> status) {
  CompactionResult r;
  r.scan.resize(status.size());
  uint32_t running = 0;
  for (size_t i = 0; i < status.size(); ++i) {
    if (status[i] == PathStatus::active) {
      ++running;
      r.job_idx.push_back(running);
      r.path_idx.push_back(static_cast<uint32_t>(i));
    }
    r.scan[i] = running;
  }
  r.active_count = running;
  return r;
}

template <class R>
Cplx<R> extrapolate(std::span<const R> ts, std::span<const Cplx<R>> xs, const R& t_next) {
  const size_t k = ts.size();
  if (k == 1) return xs[0];
  Cplx<R> acc{};
  for (size_t i = 0; i < k; ++i) {
    R w{1.0};
    for (size_t j = 0; j < k; ++j) {
      if (j == i) continue;
      w = w * ((t_next - ts[j]) / (ts[i] - ts[j]));
    }
    acc += xs[i] * w;
  }
  return acc;
}

template Cplx<double> extrapolate<double>(std::span<const double>, std::span<const Cplx<double>>,
                                          const double&);
template Cplx<DD> extrapolate<DD>(std::span<const DD>, std::span<const Cplx<DD>>, const DD&);
template Cplx<QD> extrapolate<QD>(std::span<const QD>, std::span<const Cplx<QD>>, const QD&);

// ---------------------------------------------------------------------------
// PathBatch
// ---------------------------------------------------------------------------

namespace {
constexpr uint32_t kHistory = 5;
}

template <class R>
PathBatch<R>::PathBatch(const HomotopyInstance<R>& h, const TrackConfig& cfg, uint32_t width)
    : hom_(&h),
      cfg_(cfg),
      width_(width),
      ws_(h.plan, width),
      xacc_(h.plan.dim, width, 2),
      hist_x_(kHistory * h.plan.dim, width, 2),
      hist_t_(static_cast<size_t>(kHistory) * width),
      hist_len_(width, 0),
      t_(width),
      h_(width),
      tnext_(width),
      status_(width, PathStatus::active),
      reason_(width, FailReason::none),
      path_id_(width, 0),
      stats_(width),
      consec_ok_(width, 0),
      corrected_(width, 0),
      work_(width, 0),
      sing_(width, 0),
      last_iters_(width, 0) {
  cfg_.validate();
}

template <class R>
void PathBatch<R>::reset() {
  used_ = 0;
  active_ = 0;
  std::fill(hist_len_.begin(), hist_len_.end(), uint8_t{0});
  std::fill(status_.begin(), status_.end(), PathStatus::active);
  std::fill(reason_.begin(), reason_.end(), FailReason::none);
  std::fill(stats_.begin(), stats_.end(), PathStats{});
  std::fill(consec_ok_.begin(), consec_ok_.end(), uint8_t{0});
  std::fill(corrected_.begin(), corrected_.end(), uint8_t{0});
  std::fill(sing_.begin(), sing_.end(), uint8_t{0});
  std::fill(last_iters_.begin(), last_iters_.end(), 0u);
}

template <class R>
void PathBatch<R>::seed(uint64_t path_id, std::span<const Cplx<R>> x0) {
  const uint32_t slot = used_++;
  const uint32_t dim = hom_->plan.dim;
  path_id_[slot] = path_id;
  status_[slot] = PathStatus::active;
  reason_[slot] = FailReason::none;
  t_[slot] = R{};
  h_[slot] = R{cfg_.h_init};
  stats_[slot] = PathStats{};
  consec_ok_[slot] = 0;
  hist_len_[slot] = 1;
  hist_t_[static_cast<size_t>(slot) * kHistory] = R{};
  for (uint32_t v = 0; v < dim; ++v) {
    xacc_.store(v, slot, x0[v]);
    hist_x_.store(v, slot, x0[v]);
  }
  active_ = used_;
}

template <class R>
std::vector<Cplx<R>> PathBatch<R>::accepted_point(uint32_t slot) const {
  const uint32_t dim = hom_->plan.dim;
  std::vector<Cplx<R>> x(dim);
  for (uint32_t v = 0; v < dim; ++v) x[v] = xacc_.load(v, slot);
  return x;
}

template <class R>
std::vector<Cplx<R>> PathBatch<R>::working_point(uint32_t slot) const {
  const uint32_t dim = hom_->plan.dim;
  std::vector<Cplx<R>> x(dim);
  for (uint32_t v = 0; v < dim; ++v) x[v] = ws_.points.load(v, slot);
  return x;
}

template <class R>
void PathBatch<R>::set_prediction(uint32_t slot, const R& t_next, std::span<const Cplx<R>> x_pred) {
  tnext_[slot] = t_next;
  ws_.set_t(slot, t_next);
  ws_.set_point(slot, x_pred);
}

template <class R>
void PathBatch<R>::predict_all() {
  const uint32_t dim = hom_->plan.dim;
  parallel_for(
      active_, cfg_.workers,
      [&](uint32_t lo, uint32_t hi) {
    std::vector<R> ws_weights(kHistory);
    std::vector<R> ts(kHistory);
    for (uint32_t slot = lo; slot < hi; ++slot) {
      R tn = t_[slot] + h_[slot];
      if (compare(tn, R{1.0}) >= 0) tn = R{1.0};  // final step lands exactly on 1
      tnext_[slot] = tn;
      ws_.set_t(slot, tn);

      const uint32_t k = hist_len_[slot];
      for (uint32_t i = 0; i < k; ++i) ts[i] = hist_t_[static_cast<size_t>(slot) * kHistory + i];
      if (k == 1) {
        for (uint32_t v = 0; v < dim; ++v) ws_.points.store(v, slot, hist_x_.load(v, slot));
        continue;
      }
      for (uint32_t i = 0; i < k; ++i) {
        R w{1.0};
        for (uint32_t j = 0; j < k; ++j) {
          if (j == i) continue;
          w = w * ((tn - ts[j]) / (ts[i] - ts[j]));
        }
        ws_weights[i] = w;
      }
      for (uint32_t v = 0; v < dim; ++v) {
        Cplx<R> acc{};
        for (uint32_t i = 0; i < k; ++i) acc += hist_x_.load(i * dim + v, slot) * ws_weights[i];
        ws_.points.store(v, slot, acc);
      }
    }
      },
      parallel_grain<R>());
}

template <class R>
uint32_t PathBatch<R>::newton_correct() {
  const uint32_t dim = hom_->plan.dim;
  for (uint32_t slot = 0; slot < active_; ++slot) {
    work_[slot] = 1;
    corrected_[slot] = 0;
    sing_[slot] = 0;
    last_iters_[slot] = 0;
  }
  for (uint32_t slot = active_; slot < width_; ++slot) work_[slot] = 0;

  uint32_t rounds = 0;
  for (int it = 0; it < cfg_.max_newton; ++it) {
    bool any = false;
    for (uint32_t slot = 0; slot < active_; ++slot) any = any || work_[slot] != 0;
    if (!any) break;
    ++rounds;

    eval_system_batch(hom_->plan, ws_, cfg_.workers, work_.data());

    parallel_for(
        active_, cfg_.workers,
        [&](uint32_t lo, uint32_t hi) {
      DenseMatrix<R> jac(dim, dim);
      std::vector<Cplx<R>> rhs(dim), dx(dim);
      for (uint32_t slot = lo; slot < hi; ++slot) {
        if (work_[slot] == 0) continue;
        ++last_iters_[slot];
        ++stats_[slot].newton_iters;

        double resid = 0.0;
        for (uint32_t i = 0; i < dim; ++i) {
          Cplx<R> v = ws_.sys.load(i, slot);
          rhs[i] = -v;
          resid = std::max(resid, to_double(cabs(v)));
          for (uint32_t w = 0; w < dim; ++w) jac.at(i, w) = ws_.jac.load(i * dim + w, slot);
        }
        if (!least_squares_solve<R>(jac, rhs, dx)) {
          work_[slot] = 0;
          sing_[slot] = 1;  // this step failed; the batch continues
          continue;
        }
        double dxn = 0.0, xn = 0.0;
        for (uint32_t v = 0; v < dim; ++v) {
          Cplx<R> x = ws_.points.load(v, slot) + dx[v];
          ws_.points.store(v, slot, x);
          dxn = std::max(dxn, to_double(cabs(dx[v])));
          xn = std::max(xn, to_double(cabs(x)));
        }
        if (resid <= cfg_.residual_tol && dxn <= cfg_.update_tol * std::max(1.0, xn)) {
          corrected_[slot] = 1;
          work_[slot] = 0;  // converged paths become idle lanes
        }
      }
        },
        parallel_grain<R>());
  }
  return rounds;
}

template <class R>
void PathBatch<R>::push_history(uint32_t slot, const R& t, uint32_t dim) {
  uint32_t len = hist_len_[slot];
  if (len == kHistory) {
    for (uint32_t i = 0; i + 1 < kHistory; ++i) {
      hist_t_[static_cast<size_t>(slot) * kHistory + i] =
          hist_t_[static_cast<size_t>(slot) * kHistory + i + 1];
      for (uint32_t v = 0; v < dim; ++v)
        hist_x_.store(i * dim + v, slot, hist_x_.load((i + 1) * dim + v, slot));
    }
    len = kHistory - 1;
  }
  hist_t_[static_cast<size_t>(slot) * kHistory + len] = t;
  for (uint32_t v = 0; v < dim; ++v) hist_x_.store(len * dim + v, slot, ws_.points.load(v, slot));
  hist_len_[slot] = static_cast<uint8_t>(len + 1);
}

template <class R>
void PathBatch<R>::step_control_all(ProgressSink* sink) {
  const uint32_t dim = hom_->plan.dim;
  for (uint32_t slot = 0; slot < active_; ++slot) {
    if (corrected_[slot] != 0) {
      ++stats_[slot].steps;
      if (consec_ok_[slot] < 255) ++consec_ok_[slot];
      t_[slot] = tnext_[slot];
      for (uint32_t v = 0; v < dim; ++v) xacc_.store(v, slot, ws_.points.load(v, slot));
      push_history(slot, tnext_[slot], dim);
      if (consec_ok_[slot] >= cfg_.expand_after) {
        R grown = h_[slot] * cfg_.expand;
        h_[slot] = compare(grown, R{cfg_.h_max}) > 0 ? R{cfg_.h_max} : grown;
      }
    } else {
      ++stats_[slot].rejections;
      consec_ok_[slot] = 0;
      h_[slot] = h_[slot] * cfg_.contract;  // working point discarded; accepted state restored
    }
    if (sink != nullptr) {
      (*sink)({path_id_[slot], to_double(t_[slot]), to_double(h_[slot]), last_iters_[slot],
               static_cast<int8_t>(status_[slot]), corrected_[slot] != 0});
    }
  }
}

template <class R>
void PathBatch<R>::check_status_all() {
  const uint32_t dim = hom_->plan.dim;
  for (uint32_t slot = 0; slot < active_; ++slot) {
    double xn = 0.0;
    for (uint32_t v = 0; v < dim; ++v) xn = std::max(xn, to_double(cabs(xacc_.load(v, slot))));
    if (xn > cfg_.divergence_bound) {
      status_[slot] = PathStatus::failed;
      reason_[slot] = FailReason::diverged;
    } else if (compare(h_[slot], R{cfg_.h_min}) < 0) {
      status_[slot] = PathStatus::failed;
      reason_[slot] = sing_[slot] != 0 ? FailReason::singular : FailReason::step_underflow;
    } else if (stats_[slot].steps > cfg_.max_steps) {
      status_[slot] = PathStatus::failed;
      reason_[slot] = FailReason::max_steps;
    } else if (compare(t_[slot], R{1.0}) == 0 && corrected_[slot] != 0) {
      status_[slot] = PathStatus::success;
    }
  }
}

template <class R>
void PathBatch<R>::permute(const std::vector<uint32_t>& order) {
  const uint32_t dim = hom_->plan.dim;
  const uint32_t n = used_;

  auto permute_vec = [&](auto& v) {
    auto tmp = v;
    for (uint32_t i = 0; i < n; ++i) v[i] = tmp[order[i]];
  };
  permute_vec(t_);
  permute_vec(h_);
  permute_vec(tnext_);
  permute_vec(status_);
  permute_vec(reason_);
  permute_vec(path_id_);
  permute_vec(stats_);
  permute_vec(consec_ok_);
  permute_vec(corrected_);
  permute_vec(sing_);
  permute_vec(last_iters_);
  permute_vec(hist_len_);

  std::vector<R> ht(hist_t_);
  for (uint32_t i = 0; i < n; ++i)
    for (uint32_t k = 0; k < kHistory; ++k)
      hist_t_[static_cast<size_t>(i) * kHistory + k] =
          ht[static_cast<size_t>(order[i]) * kHistory + k];

  PlanarBlock<R> xt = xacc_;
  PlanarBlock<R> hxt = hist_x_;
  for (uint32_t i = 0; i < n; ++i) {
    for (uint32_t v = 0; v < dim; ++v) xacc_.store(v, i, xt.load(v, order[i]));
    for (uint32_t r = 0; r < kHistory * dim; ++r) hist_x_.store(r, i, hxt.load(r, order[i]));
  }
}

template <class R>
CompactionResult PathBatch<R>::compact() {
  CompactionResult res = compact_scan(std::span<const PathStatus>(status_.data(), used_));
  std::vector<uint32_t> order;
  order.reserve(used_);
  for (uint32_t p : res.path_idx) order.push_back(p);
  for (uint32_t i = 0; i < used_; ++i)
    if (status_[i] != PathStatus::active) order.push_back(i);
  permute(order);
  active_ = res.active_count;
  return res;
}

template <class R>
uint64_t PathBatch<R>::run(ProgressSink* sink) {
  uint64_t total_rounds = 0;
  while (active_ > 0) {
    predict_all();
    total_rounds += newton_correct();
    step_control_all(sink);
    check_status_all();
    compact();
  }
  return total_rounds;
}

template <class R>
void PathBatch<R>::finalize(std::vector<PathRecord<R>>& out, double wall_ms) {
  const uint32_t dim = hom_->plan.dim;

  // Terminal divergence classification.  A path escaping like (1-t)^(-m)
  // can exhaust its step size long before its coordinates cross
  // divergence_bound.  The signature is failure adjacent to t = 1 with a
  // large norm that grows monotonically across the accepted history and a
  // positive escape exponent  m ~ log(norm growth) / log((1-t) shrinkage).
  for (uint32_t slot = 0; slot < used_; ++slot) {
    if (status_[slot] != PathStatus::failed || reason_[slot] == FailReason::diverged) continue;
    if (1.0 - to_double(t_[slot]) >= 0.01) continue;
    const uint32_t len = hist_len_[slot];
    if (len < 3) continue;
    double first = 0.0, prev = -1.0, last = 0.0;
    bool growing = true;
    for (uint32_t i = 0; i < len; ++i) {
      double n = 0.0;
      for (uint32_t v = 0; v < dim; ++v)
        n = std::max(n, to_double(cabs(hist_x_.load(i * dim + v, slot))));
      if (n <= prev) growing = false;
      if (i == 0) first = n;
      prev = n;
      last = n;
    }
    double u_first = 1.0 - to_double(hist_t_[static_cast<size_t>(slot) * kHistory]);
    double u_last = 1.0 - to_double(hist_t_[static_cast<size_t>(slot) * kHistory + len - 1]);
    if (!growing || first <= 0.0 || u_last <= 0.0 || u_first <= u_last) continue;
    double m_est = std::log(last / first) / std::log(u_first / u_last);
    if (last >= 10.0 && m_est >= 0.05) reason_[slot] = FailReason::diverged;
  }

  // refinement at t = 1 for successful endpoints, in lockstep
  bool any = false;
  for (uint32_t slot = 0; slot < used_; ++slot) {
    work_[slot] = status_[slot] == PathStatus::success ? 1 : 0;
    if (work_[slot] != 0) {
      ws_.set_t(slot, R{1.0});
      for (uint32_t v = 0; v < dim; ++v) ws_.points.store(v, slot, xacc_.load(v, slot));
      any = true;
    }
  }
  for (uint32_t slot = used_; slot < width_; ++slot) work_[slot] = 0;
  if (any) {
    for (int it = 0; it < 3; ++it) {
      eval_system_batch(hom_->plan, ws_, cfg_.workers, work_.data());
      parallel_for(
          used_, cfg_.workers,
          [&](uint32_t lo, uint32_t hi) {
        DenseMatrix<R> jac(dim, dim);
        std::vector<Cplx<R>> rhs(dim), dx(dim);
        for (uint32_t slot = lo; slot < hi; ++slot) {
          if (work_[slot] == 0) continue;
          for (uint32_t i = 0; i < dim; ++i) {
            rhs[i] = -ws_.sys.load(i, slot);
            for (uint32_t w = 0; w < dim; ++w) jac.at(i, w) = ws_.jac.load(i * dim + w, slot);
          }
          if (!least_squares_solve<R>(jac, rhs, dx)) {
            work_[slot] = 0;
            continue;
          }
          double dxn = 0.0, xn = 0.0;
          for (uint32_t v = 0; v < dim; ++v) {
            Cplx<R> x = ws_.points.load(v, slot) + dx[v];
            ws_.points.store(v, slot, x);
            dxn = std::max(dxn, to_double(cabs(dx[v])));
            xn = std::max(xn, to_double(cabs(x)));
          }
          if (dxn <= cfg_.update_tol * std::max(1.0, xn)) work_[slot] = 0;
        }
          },
          parallel_grain<R>());
    }
    for (uint32_t slot = 0; slot < used_; ++slot)
      if (status_[slot] == PathStatus::success)
        for (uint32_t v = 0; v < dim; ++v) xacc_.store(v, slot, ws_.points.load(v, slot));
  }

  // final residual ||f(x)||_inf for every path: evaluate H at t = 1
  for (uint32_t slot = 0; slot < used_; ++slot) {
    ws_.set_t(slot, R{1.0});
    for (uint32_t v = 0; v < dim; ++v) ws_.points.store(v, slot, xacc_.load(v, slot));
    work_[slot] = 1;
  }
  eval_system_batch(hom_->plan, ws_, cfg_.workers, work_.data());

  for (uint32_t slot = 0; slot < used_; ++slot) {
    PathRecord<R> rec;
    rec.path_id = path_id_[slot];
    rec.x = accepted_point(slot);
    R resid{};
    for (uint32_t i = 0; i < dim; ++i) {
      R m = cabs(ws_.sys.load(i, slot));
      if (compare(m, resid) > 0) resid = m;
    }
    rec.residual = resid;
    rec.status = status_[slot];
    rec.reason = reason_[slot];
    rec.stats = stats_[slot];
    rec.wall_ms = wall_ms;
    if (rec.status == PathStatus::success &&
        to_double(resid) > 10.0 * cfg_.residual_tol) {
      rec.status = PathStatus::failed;  // convergence certificate failed
      rec.reason = FailReason::no_certificate;
    }
    out.push_back(std::move(rec));
  }
}

template <class R>
SolutionSet<R> track_all(const HomotopyInstance<R>& h, const StartData<R>& starts,
                         const TrackConfig& cfg, ProgressSink* sink, uint64_t start_lo,
                         uint64_t start_hi) {
  cfg.validate();
  if (starts.count == 0) throw std::invalid_argument("track_all: no start solutions");
  const uint64_t hi = std::min<uint64_t>(starts.count, start_hi);
  SolutionSet<R> out;
  if (start_lo >= hi) return out;

  PathBatch<R> batch(h, cfg, cfg.batch);
  uint64_t next = start_lo;
  while (next < hi) {
    auto t0 = std::chrono::steady_clock::now();
    batch.reset();
    while (batch.size() < cfg.batch && next < hi) {
      std::vector<Cplx<R>> x0 = starts.solution(next);
      batch.seed(next, x0);
      ++next;
    }
    out.total_rounds += batch.run(sink);
    double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
    batch.finalize(out.paths, ms);
    ++out.batches;
  }
  std::sort(out.paths.begin(), out.paths.end(),
            [](const PathRecord<R>& a, const PathRecord<R>& b) { return a.path_id < b.path_id; });
  return out;
}

template class PathBatch<double>;
template class PathBatch<DD>;
template class PathBatch<QD>;
template SolutionSet<double> track_all<double>(const HomotopyInstance<double>&,
                                               const StartData<double>&, const TrackConfig&,
                                               ProgressSink*, uint64_t, uint64_t);
template SolutionSet<DD> track_all<DD>(const HomotopyInstance<DD>&, const StartData<DD>&,
                                       const TrackConfig&, ProgressSink*, uint64_t, uint64_t);
template SolutionSet<QD> track_all<QD>(const HomotopyInstance<QD>&, const StartData<QD>&,
                                       const TrackConfig&, ProgressSink*, uint64_t, uint64_t);

}  // namespace polypath
