#include "bosenet/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

namespace bosenet {

namespace {

const cd kI(0.0, 1.0);

struct Node {
  double t;
  bool output;
};

std::vector<Node> stage_nodes(double a, double b, int n, double ratio, const GridOptions& o,
                              const std::vector<double>& outputs) {
  const double h = (b - a) / n;
  std::vector<double> ts;
  if (o.boundary_grading && n >= 2) {
    // graded steps ratio * x grow until they match the base step h
    const int m = std::min(static_cast<int>(std::ceil(1.0 / ratio)), n / 2);
    const double reach = m * h;
    const double gap = std::min(o.grading_gap * (b - a), 0.25 * h);
    for (double x = gap; x < reach; x *= (1.0 + ratio)) ts.push_back(a + x);
    for (int i = m; i <= n - m; ++i) ts.push_back(a + i * h);
    std::vector<double> tail;
    for (double x = gap; x < reach; x *= (1.0 + ratio)) tail.push_back(b - x);
    ts.insert(ts.end(), tail.rbegin(), tail.rend());
  } else {
    for (int i = 0; i <= n; ++i) ts.push_back(a + i * h);
    ts.back() = b;
  }
  const double lo = ts.front(), hi = ts.back();
  std::vector<Node> nodes;
  nodes.reserve(ts.size() + outputs.size());
  for (double t : ts) nodes.push_back({t, false});
  for (double t : outputs) {
    if (t > a && t <= b) nodes.push_back({std::clamp(t, lo, hi), true});
  }
  std::stable_sort(nodes.begin(), nodes.end(),
                   [](const Node& x, const Node& y) { return x.t < y.t; });
  return nodes;
}

// Integrates y' = rhs(t, side, y) stage by stage with classical RK4, halving the
// step until the drift measure stays within tolerance over the stage.
template <class S, class Rhs, class Measure>
Trajectory<S> integrate(const TimeGrid& grid, S y, Rhs rhs, Measure measure,
                        const GridOptions& opts) {
  const auto& e = grid.edges;
  if (e.size() < 2) throw IntegrationError("time grid needs at least one stage");
  for (std::size_t i = 1; i < e.size(); ++i)
    if (!(e[i] > e[i - 1])) throw IntegrationError("stage edges must increase");
  std::vector<double> outs = grid.outputs;
  std::sort(outs.begin(), outs.end());
  for (double t : outs)
    if (t < e.front() || t > e.back()) throw IntegrationError("output time outside the grid");

  Trajectory<S> tr;
  const double m0 = measure(y);
  for (double t : outs) {
    if (t == e.front()) {
      tr.times.push_back(t);
      tr.snapshots.push_back(y);
      tr.drift.push_back(0.0);
    }
  }
  for (std::size_t s = 0; s + 1 < e.size(); ++s) {
    const double a = e[s], b = e[s + 1];
    const double start_measure = measure(y);
    int n = opts.steps_per_stage;
    double ratio = opts.grading_ratio;
    for (int attempt = 0;; ++attempt) {
      const auto nodes = stage_nodes(a, b, n, ratio, opts, outs);
      S cur = y;
      std::vector<double> t_out;
      std::vector<S> snaps;
      std::vector<double> drifts;
      double worst = 0.0;
      double t = a;
      bool at_start = true;
      bool finite = true;
      for (const Node& nd : nodes) {
        if (nd.t > t) {
          const double h = nd.t - t;
          const double tm = t + 0.5 * h;
          const Side s0 = (at_start && t == a) ? Side::Right : Side::Left;
          if (!(at_start && opts.boundary_grading)) {
            const S k1 = rhs(t, s0, cur);
            const S k2 = rhs(tm, Side::Left, S(cur + (0.5 * h) * k1));
            const S k3 = rhs(tm, Side::Left, S(cur + (0.5 * h) * k2));
            const S k4 = rhs(nd.t, Side::Left, S(cur + h * k3));
            cur += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
          }
          t = nd.t;
          at_start = false;
        }
        if (nd.output) {
          const double d = std::abs(measure(cur) - start_measure);
          if (!std::isfinite(d)) finite = false;
          worst = std::max(worst, d);
          t_out.push_back(nd.t);
          snaps.push_back(cur);
          drifts.push_back(std::abs(measure(cur) - m0));
        }
      }
      const double end_drift = std::abs(measure(cur) - start_measure);
      if (!std::isfinite(end_drift)) finite = false;
      worst = std::max(worst, end_drift);
      if (finite && worst <= opts.tolerance) {
        // snapshots clamped onto the graded nodes are reported at their requested times
        std::size_t j = 0;
        for (double to : outs) {
          if (to > a && to <= b) {
            tr.times.push_back(to);
            tr.snapshots.push_back(std::move(snaps[j]));
            tr.drift.push_back(drifts[j]);
            ++j;
          }
        }
        tr.steps_per_stage.push_back(n);
        y = std::move(cur);
        break;
      }
      if (attempt >= opts.max_refinements)
        throw IntegrationError("stage [" + std::to_string(a) + ", " + std::to_string(b) +
                               "] drift " + std::to_string(worst) + " exceeds tolerance at " +
                               std::to_string(n) + " steps");
      n *= 2;
      ratio *= 0.5;
    }
  }
  return tr;
}

}  // namespace

TimeGrid TimeGrid::uniform(const std::vector<double>& edges, int points_per_stage) {
  TimeGrid g;
  g.edges = edges;
  g.outputs.push_back(edges.front());
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    const double a = edges[s], b = edges[s + 1];
    for (int i = 1; i <= points_per_stage; ++i)
      g.outputs.push_back(i == points_per_stage ? b : a + (b - a) * i / points_per_stage);
  }
  return g;
}

TimeGrid& TimeGrid::with(const std::vector<double>& extra) {
  outputs.insert(outputs.end(), extra.begin(), extra.end());
  std::sort(outputs.begin(), outputs.end());
  outputs.erase(std::unique(outputs.begin(), outputs.end(),
                            [](double x, double y) { return std::abs(x - y) < 1e-13; }),
                outputs.end());
  return *this;
}

CoefficientProvider coefficient_provider(const LabControls& controls) {
  return [&controls](double t, Side side) { return assemble_hamiltonian(controls, t, side); };
}

StateTrajectory schrodinger_evolve(const ManyBodyProvider& H, const StateVector& psi0,
                                   const TimeGrid& grid, const GridOptions& opts) {
  auto rhs = [&](double t, Side side, const CVec& y) -> CVec { return -kI * (H(t, side) * y); };
  auto measure = [](const CVec& y) { return y.squaredNorm(); };
  return integrate<CVec>(grid, psi0.amp, rhs, measure, opts);
}

StateTrajectory schrodinger_evolve(const CoefficientProvider& H_a, const ManyBodyOperators& ops,
                                   const StateVector& psi0, const TimeGrid& grid,
                                   const GridOptions& opts) {
  const FockBasis& basis = ops.basis();
  if (psi0.amp.size() != static_cast<Eigen::Index>(basis.dim()))
    throw std::invalid_argument("initial state does not match the operator basis");
  auto measure = [](const CVec& y) { return y.squaredNorm(); };
  const int N = basis.modes();

  // a_j^dag a_k conserves the total number, so each number block evolves on its own.
  std::vector<std::vector<Eigen::Index>> blocks;
  std::vector<Eigen::Index> local(basis.dim());
  {
    std::vector<int> block_of_total;
    for (std::size_t i = 0; i < basis.dim(); ++i) {
      const Occupation& m = basis.state(i);
      const int n = std::accumulate(m.begin(), m.end(), 0);
      if (n >= static_cast<int>(block_of_total.size())) block_of_total.resize(n + 1, -1);
      if (block_of_total[n] < 0) {
        block_of_total[n] = static_cast<int>(blocks.size());
        blocks.emplace_back();
      }
      auto& b = blocks[block_of_total[n]];
      local[i] = static_cast<Eigen::Index>(b.size());
      b.push_back(static_cast<Eigen::Index>(i));
    }
  }

  if (blocks.size() == 1 || psi0.amp.squaredNorm() == 0.0) {
    auto rhs = [&](double t, Side side, const CVec& y) -> CVec {
      const CMat h = H_a(t, side);
      return -kI * ops.apply(h, y);
    };
    return integrate<CVec>(grid, psi0.amp, rhs, measure, opts);
  }

  StateTrajectory out;
  bool first = true;
  for (const auto& idx : blocks) {
    const auto d = static_cast<Eigen::Index>(idx.size());
    CVec y0(d);
    for (Eigen::Index r = 0; r < d; ++r) y0(r) = psi0.amp(idx[r]);
    if (y0.squaredNorm() == 0.0) continue;

    std::vector<SparseOp> sub(static_cast<std::size_t>(N * N));
    for (int jk = 0; jk < N * N; ++jk) {
      const SparseOp& op = ops.op(jk / N, jk % N);
      std::vector<Eigen::Triplet<cd>> trip;
      for (Eigen::Index r = 0; r < d; ++r)
        for (SparseOp::InnerIterator it(op, idx[r]); it; ++it)
          trip.emplace_back(static_cast<int>(r), static_cast<int>(local[it.col()]), it.value());
      sub[jk].resize(d, d);
      sub[jk].setFromTriplets(trip.begin(), trip.end());
      sub[jk].makeCompressed();
    }
    auto rhs = [&](double t, Side side, const CVec& y) -> CVec {
      const CMat h = H_a(t, side);
      CVec r = CVec::Zero(y.size());
      for (int jk = 0; jk < N * N; ++jk)
        if (h(jk / N, jk % N) != cd(0.0)) r.noalias() += h(jk / N, jk % N) * (sub[jk] * y);
      return -kI * r;
    };
    StateTrajectory part = integrate<CVec>(grid, y0, rhs, measure, opts);
    if (first) {
      out.times = part.times;
      out.snapshots.assign(part.times.size(), CVec::Zero(psi0.amp.size()));
      out.steps_per_stage = part.steps_per_stage;
      first = false;
    }
    for (std::size_t j = 0; j < part.times.size(); ++j)
      for (Eigen::Index r = 0; r < d; ++r) out.snapshots[j](idx[r]) = part.snapshots[j](r);
    for (std::size_t s = 0; s < part.steps_per_stage.size(); ++s)
      out.steps_per_stage[s] = std::max(out.steps_per_stage[s], part.steps_per_stage[s]);
  }
  const double n0 = psi0.amp.squaredNorm();
  for (const auto& y : out.snapshots) out.drift.push_back(std::abs(y.squaredNorm() - n0));
  return out;
}

EnsembleTrajectory density_evolve(const CoefficientProvider& H_a, const ManyBodyOperators& ops,
                                  const DensityMatrix& rho0, const TimeGrid& grid,
                                  const GridOptions& opts, int threads) {
  const Ensemble e0 = to_ensemble(rho0);
  const std::size_t nb = e0.states.size();
  std::vector<StateTrajectory> branches(nb);
  auto run = [&](std::size_t i) {
    StateVector s{e0.basis, e0.states[i], 0.0};
    branches[i] = schrodinger_evolve(H_a, ops, s, grid, opts);
  };
  const int workers = std::max(1, threads);
  if (workers == 1 || nb < 2) {
    for (std::size_t i = 0; i < nb; ++i) run(i);
  } else {
    std::vector<std::future<void>> fut;
    for (int w = 0; w < workers; ++w)
      fut.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t i = static_cast<std::size_t>(w); i < nb; i += workers) run(i);
      }));
    for (auto& f : fut) f.get();
  }
  EnsembleTrajectory tr;
  if (nb == 0) return tr;
  tr.times = branches[0].times;
  const double tr0 = std::accumulate(e0.weights.begin(), e0.weights.end(), 0.0);
  for (std::size_t j = 0; j < tr.times.size(); ++j) {
    Ensemble e;
    e.basis = e0.basis;
    e.weights = e0.weights;
    double trace = 0.0;
    for (std::size_t i = 0; i < nb; ++i) {
      e.states.push_back(branches[i].snapshots[j]);
      trace += e0.weights[i] * branches[i].snapshots[j].squaredNorm();
    }
    tr.snapshots.push_back(std::move(e));
    tr.drift.push_back(std::abs(trace - tr0));
  }
  tr.steps_per_stage = branches[0].steps_per_stage;
  for (const auto& b : branches)
    for (std::size_t s = 0; s < b.steps_per_stage.size(); ++s)
      tr.steps_per_stage[s] = std::max(tr.steps_per_stage[s], b.steps_per_stage[s]);
  return tr;
}

PropagatorTrajectory single_particle_propagator(const CoefficientProvider& H_a, int N,
                                                const TimeGrid& grid, const GridOptions& opts) {
  auto rhs = [&](double t, Side side, const CMat& G) -> CMat { return -kI * (H_a(t, side) * G); };
  auto measure = [](const CMat& G) {
    return (G.adjoint() * G - CMat::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
  };
  return integrate<CMat>(grid, CMat::Identity(N, N), rhs, measure, opts);
}

cd permanent(const CMat& A) {
  const int n = static_cast<int>(A.rows());
  if (A.cols() != n) throw std::invalid_argument("permanent needs a square matrix");
  if (n == 0) return 1.0;
  if (n > 20) throw std::invalid_argument("permanent size guard exceeded");
  // Ryser formula with Gray-code subset updates
  std::vector<cd> rowsum(n, 0.0);
  cd total = 0.0;
  const std::uint32_t limit = 1u << n;
  std::uint32_t gray_prev = 0;
  for (std::uint32_t i = 1; i < limit; ++i) {
    const std::uint32_t gray = i ^ (i >> 1);
    const std::uint32_t diff = gray ^ gray_prev;
    const int col = __builtin_ctz(diff);
    const double sign = (gray & diff) ? 1.0 : -1.0;
    for (int r = 0; r < n; ++r) rowsum[r] += sign * A(r, col);
    cd prod = 1.0;
    for (int r = 0; r < n; ++r) prod *= rowsum[r];
    const int bits = __builtin_popcount(gray);
    total += ((n - bits) % 2 == 0 ? 1.0 : -1.0) * prod;
    gray_prev = gray;
  }
  return total;
}

cd fock_amplitudes(const CMat& G, const Occupation& m, const Occupation& mo) {
  const int N = static_cast<int>(G.rows());
  if (static_cast<int>(m.size()) != N || static_cast<int>(mo.size()) != N)
    throw std::invalid_argument("occupation length does not match propagator");
  const int n = std::accumulate(m.begin(), m.end(), 0);
  if (n != std::accumulate(mo.begin(), mo.end(), 0))
    throw std::invalid_argument("input and output excitation numbers differ");
  if (n > 8) throw std::invalid_argument("permanent guard: at most 8 excitations");
  std::vector<int> rows, cols;
  double norm = 1.0;
  for (int j = 0; j < N; ++j) {
    for (int c = 0; c < mo[j]; ++c) rows.push_back(j);
    for (int c = 0; c < m[j]; ++c) cols.push_back(j);
    norm *= std::tgamma(m[j] + 1.0) * std::tgamma(mo[j] + 1.0);
  }
  CMat sub(n, n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) sub(r, c) = G(rows[r], cols[c]);
  return permanent(sub) / std::sqrt(norm);
}

PassageCheck heisenberg_passage_check(const LabControls& controls, const Schedule& schedule,
                                      int k, const std::vector<double>& grid,
                                      const GridOptions& opts) {
  const int N = schedule.N;
  if (k < 1 || k > N) throw std::out_of_range("passage index out of range");
  const auto edges = schedule.edges();
  TimeGrid tg;
  tg.edges = edges;
  tg.outputs = grid;
  tg.with(std::vector<double>(edges.begin(), edges.end() - 1));
  const auto provider = coefficient_provider(controls);
  const auto G = single_particle_propagator(provider, N, tg, opts);
  auto snapshot = [&](double t) -> const CMat& {
    for (std::size_t i = 0; i < G.times.size(); ++i)
      if (std::abs(G.times[i] - t) < 1e-13) return G.snapshots[i];
    throw std::logic_error("missing propagator snapshot");
  };
  PassageCheck pc;
  for (double t : grid) {
    const std::size_t s = schedule.stage_of(t);
    const double a = edges[s];
    if (t <= a) continue;
    const CMat& Ga = snapshot(a);
    const CMat& Gt = snapshot(t);
    const CVec v0 = transform_matrix(schedule, a, Side::Right).M_dag.row(k - 1).adjoint();
    const CVec vt = transform_matrix(schedule, t, Side::Left).M_dag.row(k - 1).adjoint();
    const double f = global_phase(schedule, controls, k, a, t);
    const CVec lhs = Gt * (Ga.adjoint() * v0);
    const CVec rhs = std::exp(-kI * f) * vt;
    const double dev = (lhs - rhs).cwiseAbs().maxCoeff();
    if (dev > pc.max_deviation || !std::isfinite(dev)) {
      pc.max_deviation = std::isfinite(dev) ? dev : INFINITY;
      pc.location = t;
    }
  }
  return pc;
}

}  // namespace bosenet
