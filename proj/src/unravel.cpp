#include "unravel.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <thread>

#include "common.hpp"

namespace ps {
namespace {

// Tr(A B) without forming the product.
complexd trace_prod(const cmat& a, const cmat& b) {
  return a.cwiseProduct(b.transpose()).sum();
}

// Scratch buffers so the per-step path stays allocation free.
struct Work {
  cmat k1, mid, hr, a, br, t, kick;
  void ensure(int d) {
    if (k1.rows() == d) return;
    k1.resize(d, d);
    mid.resize(d, d);
    hr.resize(d, d);
    a.resize(d, d);
    br.resize(d, d);
    t.resize(d, d);
    kick.resize(d, d);
  }
};

// out = -i[H,rho] + c rho c† - ½{c†c,rho}. Leaves w.a = c*rho for reuse.
void lindblad_into(const Model& m, const cmat& rho, Work& w, cmat& out) {
  w.hr.noalias() = m.H * rho;
  w.a.noalias() = m.c * rho;
  w.br.noalias() = m.cdagc * rho;
  out = complexd(0, -1) * (w.hr - w.hr.adjoint());
  out.noalias() += w.a * m.c.adjoint();
  out -= 0.5 * (w.br + w.br.adjoint());
}

// w.t = X rho X† with X = c + gamma, built from w.a = c*rho (no extra GEMM
// beyond the c rho c† term, which the caller may already need anyway).
void click_map_into(const Model& m, complexd gamma, const cmat& rho, Work& w) {
  w.a.noalias() = m.c * rho;
  w.t.noalias() = w.a * m.c.adjoint();
  w.t += std::conj(gamma) * w.a + gamma * w.a.adjoint() +
         std::norm(gamma) * rho;
}

// Between-click generator of the counting unraveling:
//   L(rho) - eta (X rho X† - Tr[X rho X†] rho).
// Written in the trace-subtracted form so it stays smooth when the click
// intensity goes to zero (no division by Tr[X rho X†]).
void noclick_drift_into(const Model& m, double eta, complexd gamma,
                        const cmat& rho, Work& w, cmat& out) {
  lindblad_into(m, rho, w, out);
  if (eta == 0.0) return;
  w.t.noalias() = w.a * m.c.adjoint();
  w.t += std::conj(gamma) * w.a + gamma * w.a.adjoint() +
         std::norm(gamma) * rho;
  double lam = w.t.trace().real();
  out -= eta * (w.t - lam * rho);
}

enum class Drift { ume, noclick };

void advance(cmat& rho, const Model& m, const MeasurementScheme& s, double dt,
             bool midpoint, Drift kind, Work& w) {
  complexd gamma = std::polar(s.R, s.phi);
  auto eval = [&](const cmat& r, cmat& out) {
    if (kind == Drift::ume)
      lindblad_into(m, r, w, out);
    else
      noclick_drift_into(m, s.eta, gamma, r, w, out);
  };
  eval(rho, w.k1);
  if (midpoint) {
    w.mid = rho + (0.5 * dt) * w.k1;
    eval(w.mid, w.k1);
  }
  rho += dt * w.k1;
}

void herm_renorm(cmat& rho, Work& w, double t_now) {
  w.k1 = rho.adjoint();
  rho += w.k1;
  rho *= 0.5;
  double tr = rho.trace().real();
  if (!std::isfinite(tr) || std::abs(tr) < 1e-300)
    fail(status::numeric,
         strformat("state trace %g at t=%.6g: integration diverged (reduce dt "
                   "or check the model)",
                   tr, t_now));
  rho /= tr;
}

struct ClickStats {
  double p_raw = 0.0;  // unclamped expected count
  double lam = 0.0;    // Tr[X rho X†]
};

ClickStats click_stats(const cmat& rho, const Model& m,
                       const MeasurementScheme& s, double dt) {
  complexd gamma = std::polar(s.R, s.phi);
  complexd tc = trace_prod(rho, m.c);
  double nc = trace_prod(rho, m.cdagc).real();
  double lam = s.R * s.R + 2.0 * std::real(std::conj(gamma) * tc) + nc;
  if (lam < -1e-12)
    fail(status::state_invalid,
         strformat("negative click intensity %g: state is not a valid density "
                   "matrix",
                   lam));
  return {s.eta * dt * lam, lam};
}

double clamp01(double p) { return std::min(1.0, std::max(0.0, p)); }

// Returns dN. `repaired` reports whether the eigenvalue clip fired.
int jump_step_raw(cmat& rho, const Model& m, const MeasurementScheme& s,
                  double dt, rng& gen, const StepOptions& opts, Work& w,
                  bool& repaired, double t_now) {
  ClickStats cs = click_stats(rho, m, s, dt);
  if (cs.p_raw > 0.5)
    fail(status::step_size,
         strformat("expected click count %g is far above 1 per step; dt is "
                   "broken for this detector",
                   cs.p_raw));
  if (cs.p_raw > 0.1 + 1e-12)
    fail(status::step_size,
         strformat("expected click count %g exceeds 0.1 per step; choose dt "
                   "<= 0.1/(eta*R^2 + eta)",
                   cs.p_raw));
  double p = clamp01(cs.p_raw);
  int dn = gen.poisson(p);
  complexd gamma = std::polar(s.R, s.phi);
  if (dn == 0) {
    advance(rho, m, s, dt, opts.midpoint, Drift::noclick, w);
  } else {
    // Centered kick about the pre-step state plus the mean (unconditional)
    // drift; the (dn - p) weight keeps the ensemble mean on the master
    // equation for any outcome distribution with mean p.
    click_map_into(m, gamma, rho, w);
    if (cs.lam <= 0.0)
      fail(status::numeric, "click fired at zero intensity");
    w.kick = w.t / cs.lam;
    w.kick -= rho;
    advance(rho, m, s, dt, opts.midpoint, Drift::ume, w);
    rho += static_cast<double>(dn - p) * w.kick;
  }
  herm_renorm(rho, w, t_now);
  repaired = false;
  if (dn >= 2 || m.dim == 2) {
    if (min_eigenvalue(rho) < -kEigTol) {
      psd_repair(rho);
      repaired = true;
    }
  }
  return dn;
}

double diffusive_step_raw(cmat& rho, const Model& m, const MeasurementScheme& s,
                          double dt, rng& gen, const StepOptions& opts, Work& w,
                          bool& repaired, double t_now) {
  double dw = gen.normal() * std::sqrt(dt);
  repaired = false;
  if (s.eta == 0.0) {
    advance(rho, m, s, dt, opts.midpoint, Drift::ume, w);
    herm_renorm(rho, w, t_now);
    return dw;
  }
  complexd ephase = std::polar(1.0, -s.phi);  // homodyne quadrature phase
  complexd tc = trace_prod(rho, m.c);
  double xphi = 2.0 * std::real(ephase * tc);
  double sq = std::sqrt(s.eta);
  if (opts.variant == DiffusiveVariant::kraus) {
    // One-step Kraus pair: M rho M† keeps the state positive by construction
    // and the (1-eta) feed term accounts for the unmonitored channel.
    double coef = sq * (sq * xphi * dt + dw);
    w.k1 = -dt * (complexd(0, 1) * m.H + 0.5 * m.cdagc);
    w.k1 += (coef * ephase) * m.c;
    w.k1.diagonal().array() += 1.0;
    w.mid.noalias() = w.k1 * rho;
    w.t.noalias() = w.mid * w.k1.adjoint();
    if (s.eta < 1.0) {
      w.a.noalias() = m.c * rho;
      w.t.noalias() += ((1.0 - s.eta) * dt) * (w.a * m.c.adjoint());
    }
    rho = w.t;
    herm_renorm(rho, w, t_now);
  } else {
    lindblad_into(m, rho, w, w.k1);
    w.t = ephase * w.a;  // Lop rho, Lop = e^{-i phi} c
    rho += dt * w.k1 + (sq * dw) * (w.t + w.t.adjoint() - xphi * rho);
    herm_renorm(rho, w, t_now);
    if (min_eigenvalue(rho) < -kEigTol) {
      psd_repair(rho);
      repaired = true;
    }
  }
  return dw;
}

void check_step_args(const cmat& rho, const Model& m, double dt) {
  m.validate();
  require(rho.rows() == m.dim && rho.cols() == m.dim, status::dimension,
          "state dimension does not match the model");
  require(dt > 0.0, status::invalid_argument, "dt must be positive");
}

std::vector<double> sorted_samples(const std::vector<double>& in,
                                   double t_final) {
  std::vector<double> s(in);
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
  if (!s.empty()) {
    require(s.front() >= -1e-9, status::invalid_argument,
            "sample times must be nonnegative");
    require(s.back() <= t_final + 1e-9, status::invalid_argument,
            "sample times must not exceed t_final");
  }
  return s;
}

// Single trajectory engine shared by run_trajectory and the ensembles.
void run_core(const Model& m, const MeasurementScheme& s, cmat& rho,
              double t_final, double dt,
              const std::vector<double>& samples,  // sorted, unique
              rng& gen, const StepOptions& opts, StepDiagnostics& diag,
              DetectionRecord* rec,
              const std::function<void(const cmat&, int, double)>& on_sample) {
  Work w;
  w.ensure(m.dim);
  size_t sidx = 0;
  auto flush = [&](double t_now) {
    while (sidx < samples.size() && samples[sidx] <= t_now + 1e-9) {
      on_sample(rho, static_cast<int>(sidx), t_now);
      ++sidx;
    }
  };
  flush(0.0);
  long n_full = static_cast<long>(std::floor(t_final / dt + 1e-12));
  double rem = t_final - static_cast<double>(n_full) * dt;
  if (rem < 1e-12 * std::max(1.0, t_final)) rem = 0.0;

  auto one_step = [&](double h, double t_now) {
    bool repaired = false;
    switch (s.kind) {
      case SchemeKind::unconditional:
        advance(rho, m, s, h, opts.midpoint, Drift::ume, w);
        herm_renorm(rho, w, t_now);
        break;
      case SchemeKind::jump: {
        int dn = jump_step_raw(rho, m, s, h, gen, opts, w, repaired, t_now);
        if (dn > 0) {
          diag.n_clicks += dn;
          if (dn >= 2) ++diag.n_multi_clicks;
          if (rec) {
            rec->click_times.push_back(t_now);
            rec->click_counts.push_back(dn);
          }
        }
        break;
      }
      case SchemeKind::diffusive: {
        double dw = diffusive_step_raw(rho, m, s, h, gen, opts, w, repaired,
                                       t_now);
        if (rec) rec->wiener.push_back(dw);
        break;
      }
    }
    if (repaired) ++diag.n_psd_repairs;
    ++diag.n_steps;
  };

  for (long k = 1; k <= n_full; ++k) {
    double t_now = static_cast<double>(k) * dt;
    one_step(dt, t_now);
    flush(t_now);
  }
  if (rem > 0.0) {
    one_step(rem, t_final);
    flush(t_final);
  }
  flush(t_final);  // catch samples equal to t_final within tolerance
}

// exp(i H t) columns via one eigendecomposition, reused for every sample.
struct Propagator {
  bool trivial = true;
  int dim = 0;
  Eigen::VectorXd evals;
  cmat vecs;

  explicit Propagator(const cmat& h) : dim(static_cast<int>(h.rows())) {
    if (h.cwiseAbs().maxCoeff() == 0.0) return;
    trivial = false;
    Eigen::SelfAdjointEigenSolver<cmat> es(h);
    evals = es.eigenvalues();
    vecs = es.eigenvectors();
  }

  cmat at(double t) const {
    if (trivial) return cmat::Identity(dim, dim);
    cvec phases(evals.size());
    for (int i = 0; i < evals.size(); ++i)
      phases[i] = std::polar(1.0, evals[i] * t);
    return vecs * phases.asDiagonal() * vecs.adjoint();
  }
};

void fill_obs(const cmat& rho, const cmat& rho0, const cmat* u, const Model& m,
              double t, SampleObs& o) {
  o.t = t;
  complexd tc = trace_prod(rho, m.c);
  o.re_c = tc.real();
  o.im_c = tc.imag();
  o.n_c = trace_prod(rho, m.cdagc).real();
  o.purity = rho.cwiseProduct(rho.transpose()).sum().real();
  if (m.dim == 2) {
    o.x = 2.0 * rho(1, 0).real();
    o.y = 2.0 * rho(1, 0).imag();
    o.z = rho(0, 0).real() - rho(1, 1).real();
  }
  if (u) {
    cmat w = (*u) * rho * u->adjoint();
    o.fidelity = trace_prod(rho0, w).real();
  } else {
    o.fidelity = trace_prod(rho0, rho).real();
  }
}

}  // namespace

Model::Model(cmat H_, cmat c_) : H(std::move(H_)), c(std::move(c_)) {
  dim = static_cast<int>(H.rows());
  cdagc = c.adjoint() * c;
  validate();
}

void Model::validate() const {
  require(dim >= 2, status::dimension, "model dimension must be at least 2");
  require(H.rows() == dim && H.cols() == dim && c.rows() == dim &&
              c.cols() == dim,
          status::dimension, "H and c must be square with matching dimension");
  double herm = (H - H.adjoint()).cwiseAbs().maxCoeff();
  require(herm <= kHermTol, status::invalid_argument,
          strformat("H is not Hermitian (defect %g)", herm));
}

void MeasurementScheme::validate() const {
  require(eta >= 0.0 && eta <= 1.0, status::invalid_argument,
          strformat("efficiency eta=%g must lie in [0,1]", eta));
  require(R >= 0.0, status::invalid_argument,
          "local oscillator amplitude R must be nonnegative");
  require(std::isfinite(phi), status::invalid_argument,
          "phase phi must be finite");
}

cmat lindblad_rhs(const Model& m, const cmat& rho) {
  Work w;
  w.ensure(m.dim);
  cmat out(m.dim, m.dim);
  lindblad_into(m, rho, w, out);
  return out;
}

cmat jump_target(const cmat& rho, const cmat& x) {
  cmat t = x * rho * x.adjoint();
  double lam = t.trace().real();
  require(lam > 0.0, status::state_invalid,
          "click map has zero weight on this state");
  return t / lam;
}

DensityMatrix ume_step(const DensityMatrix& rho, const Model& m, double dt,
                       const StepOptions& opts) {
  check_step_args(rho.m, m, dt);
  require(dt <= opts.ume_dt_cap + 1e-15, status::step_size,
          strformat("dt=%g exceeds the configured cap %g for the plain master "
                    "equation step",
                    dt, opts.ume_dt_cap));
  cmat r = rho.m;
  Work w;
  w.ensure(m.dim);
  MeasurementScheme none;
  advance(r, m, none, dt, opts.midpoint, Drift::ume, w);
  herm_renorm(r, w, 0.0);
  return DensityMatrix(std::move(r));
}

double expected_click(const DensityMatrix& rho, const Model& m,
                      const MeasurementScheme& s, double dt) {
  check_step_args(rho.m, m, dt);
  s.validate();
  return clamp01(click_stats(rho.m, m, s, dt).p_raw);
}

JumpResult jump_step(const DensityMatrix& rho, const Model& m,
                     const MeasurementScheme& s, double dt, rng& gen,
                     const StepOptions& opts) {
  check_step_args(rho.m, m, dt);
  s.validate();
  require(s.kind == SchemeKind::jump, status::invalid_argument,
          "jump_step requires a jump (counting) scheme");
  cmat r = rho.m;
  Work w;
  w.ensure(m.dim);
  bool repaired = false;
  int dn = jump_step_raw(r, m, s, dt, gen, opts, w, repaired, 0.0);
  return {DensityMatrix(std::move(r)), dn};
}

DiffusiveResult diffusive_step(const DensityMatrix& rho, const Model& m,
                               const MeasurementScheme& s, double dt, rng& gen,
                               const StepOptions& opts) {
  check_step_args(rho.m, m, dt);
  s.validate();
  require(s.kind == SchemeKind::diffusive, status::invalid_argument,
          "diffusive_step requires a diffusive (homodyne) scheme");
  cmat r = rho.m;
  Work w;
  w.ensure(m.dim);
  bool repaired = false;
  double dw = diffusive_step_raw(r, m, s, dt, gen, opts, w, repaired, 0.0);
  return {DensityMatrix(std::move(r)), dw};
}

Trajectory run_trajectory(const Model& m, const MeasurementScheme& s,
                          const DensityMatrix& rho0, double t_final, double dt,
                          const std::vector<double>& sample_times,
                          uint64_t seed, const RunOptions& opts) {
  check_step_args(rho0.m, m, dt);
  s.validate();
  require(t_final >= 0.0, status::invalid_argument,
          "t_final must be nonnegative");
  std::vector<double> samples = sorted_samples(sample_times, t_final);

  Trajectory traj;
  traj.seed = seed;
  traj.record.kind = s.kind;
  traj.record.seed = seed;
  traj.times.reserve(samples.size());
  traj.obs.reserve(samples.size());

  Propagator prop(m.H);
  std::vector<cmat> us;
  if (!prop.trivial) {
    us.reserve(samples.size());
    for (double t : samples) us.push_back(prop.at(t));
  }

  cmat rho = rho0.m;
  rng gen = make_stream(seed, 0);
  DetectionRecord* rec = opts.store_record ? &traj.record : nullptr;
  auto on_sample = [&](const cmat& r, int sidx, double t_now) {
    traj.times.push_back(t_now);
    SampleObs o;
    const cmat* u = us.empty() ? nullptr : &us[sidx];
    fill_obs(r, rho0.m, u, m, t_now, o);
    traj.obs.push_back(o);
    if (opts.store_states) traj.states.emplace_back(r);
    double top = r(m.dim - 1, m.dim - 1).real();
    traj.diag.max_top_pop = std::max(traj.diag.max_top_pop, top);
  };
  run_core(m, s, rho, t_final, dt, samples, gen, opts.step, traj.diag, rec,
           on_sample);
  return traj;
}

std::vector<double> ensemble_collect(const Model& m, const MeasurementScheme& s,
                                     const DensityMatrix& rho0, double t_final,
                                     double dt,
                                     const std::vector<double>& sample_times,
                                     long n_traj, uint64_t master_seed,
                                     int threads, int width,
                                     const SampleFn& sampler,
                                     StepDiagnostics* diag_out,
                                     const StepOptions& step) {
  check_step_args(rho0.m, m, dt);
  s.validate();
  require(t_final >= 0.0, status::invalid_argument,
          "t_final must be nonnegative");
  require(n_traj >= 1, status::invalid_argument,
          "ensemble needs at least one trajectory");
  require(width >= 1, status::invalid_argument, "sampler width must be >= 1");
  std::vector<double> samples = sorted_samples(sample_times, t_final);
  size_t row = samples.size() * static_cast<size_t>(width);
  std::vector<double> out(static_cast<size_t>(n_traj) * row, 0.0);

  int nthreads = std::max(1, threads);
  nthreads = static_cast<int>(
      std::min<long>(nthreads, std::max<long>(1, n_traj)));

  std::vector<StepDiagnostics> diags(nthreads);
  std::exception_ptr first_error;
  std::mutex err_mu;

  auto worker = [&](int wi, long lo, long hi) {
    try {
      for (long i = lo; i < hi; ++i) {
        cmat rho = rho0.m;
        rng gen = make_stream(master_seed, static_cast<uint64_t>(i));
        double* base = out.data() + static_cast<size_t>(i) * row;
        auto on_sample = [&](const cmat& r, int sidx, double t_now) {
          sampler(r, sidx, t_now, base + static_cast<size_t>(sidx) * width);
        };
        run_core(m, s, rho, t_final, dt, samples, gen, step, diags[wi],
                 nullptr, on_sample);
      }
    } catch (...) {
      std::lock_guard<std::mutex> lock(err_mu);
      if (!first_error) first_error = std::current_exception();
    }
  };

  if (nthreads == 1) {
    worker(0, 0, n_traj);
  } else {
    std::vector<std::thread> pool;
    long chunk = (n_traj + nthreads - 1) / nthreads;
    for (int wi = 0; wi < nthreads; ++wi) {
      long lo = wi * chunk;
      long hi = std::min<long>(n_traj, lo + chunk);
      if (lo >= hi) break;
      pool.emplace_back(worker, wi, lo, hi);
    }
    for (auto& th : pool) th.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  if (diag_out) {
    StepDiagnostics total;
    for (const auto& d : diags) {
      total.n_steps += d.n_steps;
      total.n_clicks += d.n_clicks;
      total.n_multi_clicks += d.n_multi_clicks;
      total.n_psd_repairs += d.n_psd_repairs;
      total.max_top_pop = std::max(total.max_top_pop, d.max_top_pop);
    }
    *diag_out = total;
  }
  return out;
}

EnsembleStats ensemble_mean(const Model& m, const MeasurementScheme& s,
                            const DensityMatrix& rho0, double t_final,
                            double dt, const std::vector<double>& sample_times,
                            long n_traj, uint64_t master_seed, int threads,
                            const StepOptions& step) {
  std::vector<double> samples = sorted_samples(sample_times, t_final);
  Propagator prop(m.H);
  std::vector<cmat> us;
  if (!prop.trivial) {
    us.reserve(samples.size());
    for (double t : samples) us.push_back(prop.at(t));
  }
  const cmat rho0m = rho0.m;
  SampleFn sampler = [&](const cmat& r, int sidx, double t_now, double* outp) {
    SampleObs o;
    const cmat* u = us.empty() ? nullptr : &us[sidx];
    fill_obs(r, rho0m, u, m, t_now, o);
    outp[kObsX] = o.x;
    outp[kObsY] = o.y;
    outp[kObsZ] = o.z;
    outp[kObsReC] = o.re_c;
    outp[kObsImC] = o.im_c;
    outp[kObsN] = o.n_c;
    outp[kObsPurity] = o.purity;
    outp[kObsFidelity] = o.fidelity;
  };
  EnsembleStats stats;
  std::vector<double> rows =
      ensemble_collect(m, s, rho0, t_final, dt, sample_times, n_traj,
                       master_seed, threads, kObsCount, sampler, &stats.diag,
                       step);
  stats.times = samples;
  stats.n_traj = n_traj;
  size_t ns = samples.size();
  size_t row = ns * kObsCount;
  stats.series.assign(ns, {});
  for (size_t si = 0; si < ns; ++si) {
    for (int ob = 0; ob < kObsCount; ++ob) {
      double sum = 0.0;
      for (long i = 0; i < n_traj; ++i)
        sum += rows[static_cast<size_t>(i) * row + si * kObsCount + ob];
      double mean = sum / static_cast<double>(n_traj);
      double ss = 0.0;
      for (long i = 0; i < n_traj; ++i) {
        double d =
            rows[static_cast<size_t>(i) * row + si * kObsCount + ob] - mean;
        ss += d * d;
      }
      double se = 0.0;
      if (n_traj > 1)
        se = std::sqrt(ss / (static_cast<double>(n_traj) *
                             static_cast<double>(n_traj - 1)));
      stats.series[si][ob] = {mean, se};
    }
  }
  return stats;
}

}  // namespace ps
