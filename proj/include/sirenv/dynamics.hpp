#pragma once

// Exact continuous-time simulation of the SIR chain on C_n in a fixed
// environment. An infective i recovers at rate xi(i); a susceptible i is
// infected at rate (lambda/n) * w(i), where w(i) = sum over infective j of
// rho(i, j). The run starts from I = {0}, S = everything else, R = {}.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sirenv/environment.hpp"
#include "sirenv/error.hpp"
#include "sirenv/fenwick.hpp"
#include "sirenv/rng.hpp"

namespace sirenv {

enum class Label : std::uint8_t { susceptible, infective, removed };
enum class EventKind : std::uint8_t { recovery, infection, rejected };
enum class Engine : std::uint8_t { dynamic, percolation };

// direct: exact exponential race over per-vertex rates.
// thinning: infections proposed at the envelope rate (lambda/n)|S||I| and
// accepted with probability rho(i, j); valid because rho <= 1.
enum class Method : std::uint8_t { direct, thinning };

constexpr std::string_view to_string(EventKind k) noexcept {
  switch (k) {
    case EventKind::recovery: return "recovery";
    case EventKind::infection: return "infection";
    case EventKind::rejected: return "rejected";
  }
  return "?";
}

constexpr std::string_view to_string(Engine e) noexcept {
  return e == Engine::dynamic ? "dynamic" : "percolation";
}

constexpr std::string_view to_string(Method m) noexcept { return m == Method::direct ? "direct" : "thinning"; }

struct Event {
  EventKind kind = EventKind::recovery;
  vertex_t vertex = 0;
  friend bool operator==(const Event&, const Event&) = default;
};

struct TimedEvent {
  double dt = 0;
  Event event;
};

struct SimParams {
  double lambda = 1.0;
  std::uint64_t max_events = 0;  // 0 selects the default 50 * n
  bool record_trajectory = false;
  std::uint64_t run_seed = 0;
  Method method = Method::direct;
};

struct TrajectoryRow {
  double time = 0;
  EventKind kind = EventKind::recovery;
  vertex_t vertex = 0;
  std::uint64_t s_count = 0;
  std::uint64_t i_count = 0;
  std::uint64_t r_count = 0;
  friend bool operator==(const TrajectoryRow&, const TrajectoryRow&) = default;
};

struct Provenance {
  std::uint64_t env_seed = 0;
  std::uint64_t run_seed = 0;
  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct RunResult {
  std::uint64_t n = 0;
  double lambda = 0;
  std::uint64_t r_infinity = 0;
  // Time of the last event; NaN for the percolation engine, which has no clock.
  double extinction_time = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t events_executed = 0;
  std::uint64_t proposals_rejected = 0;
  bool truncated = false;
  std::vector<TrajectoryRow> trajectory;
  Engine engine = Engine::dynamic;
  std::string method;
  Provenance provenance;
};

inline void validate(const SimParams& p) {
  if (!(p.lambda >= 0.0) || !std::isfinite(p.lambda))
    throw error(errc::param_violation, "infection rate requires lambda ≥ 0");
}

inline std::uint64_t resolved_max_events(const SimParams& p, std::uint64_t n) {
  return p.max_events == 0 ? 50 * n : p.max_events;
}

// The partition (S, I, R) plus the rate bookkeeping for event selection.
class EpidemicState {
 public:
  EpidemicState(const Environment& env, double lambda, Method method = Method::direct)
      : EpidemicState(env, lambda, method, initial_labels(env.n())) {}

  EpidemicState(const Environment& env, double lambda, Method method, std::span<const Label> labels)
      : env_(&env),
        lambda_(lambda),
        scale_(lambda / static_cast<double>(env.n())),
        method_(method),
        label_(labels.begin(), labels.end()),
        pos_(env.n(), 0),
        recovery_(env.n()) {
    if (label_.size() != env.n())
      throw error(errc::param_violation, "label vector length must equal n");
    if (method_ == Method::direct) {
      pressure_.assign(env.n(), 0.0);
      infection_ = FenwickTree(env.n());
    }
    for (vertex_t v = 0; v < label_.size(); ++v) {
      if (label_[v] == Label::susceptible) push(susceptible_, v);
      if (label_[v] == Label::infective) {
        push(infective_, v);
        recovery_.assign(v, env.xi_unchecked(v));
      }
      if (label_[v] == Label::removed) ++removed_;
    }
    recovery_.rebuild();
    if (method_ == Method::direct) {
      for (vertex_t s : susceptible_) pressure_[s] = recompute_pressure(s);
      dirty_ = true;
    }
  }

  const Environment& environment() const noexcept { return *env_; }
  double lambda() const noexcept { return lambda_; }
  Method method() const noexcept { return method_; }
  std::uint64_t n() const noexcept { return label_.size(); }
  Label label(vertex_t v) const { return label_.at(v); }
  std::span<const Label> labels() const noexcept { return label_; }
  std::uint64_t susceptible_count() const noexcept { return susceptible_.size(); }
  std::uint64_t infective_count() const noexcept { return infective_.size(); }
  std::uint64_t removed_count() const noexcept { return removed_; }
  std::span<const vertex_t> susceptibles() const noexcept { return susceptible_; }
  std::span<const vertex_t> infectives() const noexcept { return infective_; }

  // w(i); only maintained by the direct method.
  double pressure(vertex_t i) const {
    require_pressure();
    return label_.at(i) == Label::susceptible ? pressure_[i] : 0.0;
  }

  double total_recovery_rate() const noexcept { return recovery_.total(); }

  double total_infection_rate() const {
    require_pressure();
    refresh();
    return scale_ * infection_.total();
  }

  // Upper bound used by the thinning method.
  double envelope_infection_rate() const noexcept {
    return scale_ * static_cast<double>(susceptible_.size()) * static_cast<double>(infective_.size());
  }

  double recompute_pressure(vertex_t i) const {
    double w = 0;
    for (vertex_t j : infective_) w += env_->rho_unchecked(i, j);
    return w;
  }

  double recompute_total_recovery_rate() const {
    double r = 0;
    for (vertex_t j : infective_) r += env_->xi_unchecked(j);
    return r;
  }

  double recompute_total_infection_rate() const {
    double w = 0;
    for (vertex_t i : susceptible_) w += recompute_pressure(i);
    return scale_ * w;
  }

  // Draws the waiting time and the next event without applying it. In
  // thinning mode the event may be a rejected proposal, which still
  // consumes its waiting time.
  TimedEvent next_event(Stream& rng) const {
    if (infective_.empty()) throw error(errc::dead_state, "no infective vertex; total rate is 0");
    const double rec = recovery_.total();
    const double inf = method_ == Method::direct ? total_infection_rate() : envelope_infection_rate();
    const double total = rec + inf;
    if (!(total > 0)) throw error(errc::dead_state, "total event rate is 0");
    TimedEvent out;
    out.dt = rng.exponential(total);
    const double pick = rng.uniform() * total;
    if (pick < rec || inf <= 0.0) {
      out.event = {EventKind::recovery, static_cast<vertex_t>(recovery_.find(std::min(pick, rec)))};
      if (label_[out.event.vertex] != Label::infective) out.event.vertex = infective_.front();
      return out;
    }
    if (method_ == Method::direct) {
      const double target = (pick - rec) / scale_;
      out.event = {EventKind::infection, static_cast<vertex_t>(infection_.find(target))};
      if (label_[out.event.vertex] != Label::susceptible) out.event.vertex = susceptible_.front();
      return out;
    }
    const vertex_t i = susceptible_[rng.below(susceptible_.size())];
    const vertex_t j = infective_[rng.below(infective_.size())];
    const bool accept = rng.uniform() < env_->rho_unchecked(i, j);
    out.event = {accept ? EventKind::infection : EventKind::rejected, i};
    return out;
  }

  void apply(const Event& e) {
    switch (e.kind) {
      case EventKind::infection: infect(e.vertex); break;
      case EventKind::recovery: recover(e.vertex); break;
      case EventKind::rejected: break;
    }
  }

  void infect(vertex_t j) {
    if (label_.at(j) != Label::susceptible) throw error(errc::param_violation, "only a susceptible can be infected");
    label_[j] = Label::infective;
    remove(susceptible_, j);
    push(infective_, j);
    recovery_.set(j, env_->xi_unchecked(j));
    if (method_ == Method::direct) {
      pressure_[j] = 0.0;
      infection_.assign(j, 0.0);
      for (vertex_t i : susceptible_) pressure_[i] += env_->rho_unchecked(i, j);
      dirty_ = true;
    }
  }

  void recover(vertex_t i) {
    if (label_.at(i) != Label::infective) throw error(errc::param_violation, "only an infective can recover");
    label_[i] = Label::removed;
    remove(infective_, i);
    ++removed_;
    recovery_.set(i, 0.0);
    if (infective_.empty()) recovery_.rebuild();  // clear accumulated rounding
    if (method_ == Method::direct) {
      for (vertex_t s : susceptible_) pressure_[s] -= env_->rho_unchecked(s, i);
      dirty_ = true;
    }
  }

 private:
  static std::vector<Label> initial_labels(std::uint64_t n) {
    std::vector<Label> l(n, Label::susceptible);
    l[0] = Label::infective;
    return l;
  }

  void require_pressure() const {
    if (method_ != Method::direct)
      throw error(errc::param_violation, "pressures are only maintained by the direct method");
  }

  void refresh() const {
    if (!dirty_) return;
    for (vertex_t v = 0; v < label_.size(); ++v)
      infection_.assign(v, label_[v] == Label::susceptible ? std::max(pressure_[v], 0.0) : 0.0);
    infection_.rebuild();
    dirty_ = false;
  }

  void push(std::vector<vertex_t>& set, vertex_t v) {
    pos_[v] = static_cast<vertex_t>(set.size());
    set.push_back(v);
  }

  void remove(std::vector<vertex_t>& set, vertex_t v) {
    const vertex_t at = pos_[v];
    const vertex_t last = set.back();
    set[at] = last;
    pos_[last] = at;
    set.pop_back();
  }

  const Environment* env_;
  double lambda_;
  double scale_;
  Method method_;
  std::vector<Label> label_;
  std::vector<vertex_t> pos_;
  std::vector<vertex_t> susceptible_;
  std::vector<vertex_t> infective_;
  std::uint64_t removed_ = 0;
  std::vector<double> pressure_;
  FenwickTree recovery_;
  mutable FenwickTree infection_;
  mutable bool dirty_ = false;
};

// Simulates from the single-infective start until I is empty or the event
// cap is hit. A truncated result reports n - |S| as a lower bound on r_inf.
inline RunResult gillespie_run(const Environment& env, const SimParams& params) {
  validate(params);
  const std::uint64_t cap = resolved_max_events(params, env.n());
  EpidemicState state(env, params.lambda, params.method);
  Stream rng(derive_key(params.run_seed, stream_tag::run));

  RunResult out;
  out.n = env.n();
  out.lambda = params.lambda;
  out.engine = Engine::dynamic;
  out.method = std::string(to_string(params.method));
  out.provenance = {env.seed(), params.run_seed};

  double t = 0;
  while (state.infective_count() > 0) {
    if (out.events_executed >= cap) {
      out.truncated = true;
      break;
    }
    const TimedEvent next = state.next_event(rng);
    t += next.dt;
    if (next.event.kind == EventKind::rejected) {
      ++out.proposals_rejected;
      continue;
    }
    state.apply(next.event);
    ++out.events_executed;
    if (params.record_trajectory)
      out.trajectory.push_back({t, next.event.kind, next.event.vertex, state.susceptible_count(),
                                state.infective_count(), state.removed_count()});
  }
  out.extinction_time = t;
  out.r_infinity = out.truncated ? env.n() - state.susceptible_count() : state.removed_count();
  return out;
}

}  // namespace sirenv
