// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "elasmatch/elasmatch.hpp"
#include "support/finite_difference.hpp"
#include "support/test_shapes.hpp"

using namespace elasmatch;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int hardware_threads() { return static_cast<int>(std::max(1u, std::thread::hardware_concurrency())); }

KernelConfig kernel_with(double sigma, PositionKernel p = PositionKernel::Gaussian,
                         DirectionKernel d = DirectionKernel::Linear) {
  KernelConfig k;
  k.sigma = sigma;
  k.position = p;
  k.direction = d;
  return k;
}

// --- 1 -------------------------------------------------------------------

template <DiscreteShape S>
double fd_error(const S& moving, const std::function<double(const S&)>& f, const PointList<S::kDim>& grad,
                std::mt19937_64& rng) {
  constexpr int D = S::kDim;
  const double h = 1e-5 * bounding_box_diagonal<D>(moving.vertices());
  auto fx = [&](const Eigen::VectorXd& x) { return f(moving.with_vertices(unflatten<D>(x))); };
  return fixtures::check_directional_derivatives(fx, flatten<D>(moving.vertices()), flatten<D>(grad), h, 20, rng)
      .worst_relative_error;
}

template <DiscreteShape S>
void check_triple(const S& f0, const S& f, const S& target, double& w_srnf, double& w_var, double& w_energy,
                  std::mt19937_64& rng) {
  constexpr int D = S::kDim;
  const auto k = kernel_with(0.3 * bounding_box_diagonal<D>(target.vertices()));
  const auto ta = atoms(target);
  const double lambda = 1.0 / var_inner(ta, ta, k);

  w_srnf = std::max(w_srnf, fd_error<S>(f, [&](const S& g) { return srnf_dist_sq(f0, g); },
                                        srnf_dist_sq_grad(f0, f), rng));
  w_var = std::max(w_var, fd_error<S>(f, [&](const S& g) { return var_distance(ta, atoms(g), k).raw; },
                                      var_dist_sq_grad(ta, f, k), rng));
  w_energy = std::max(w_energy, fd_error<S>(f, [&](const S& g) { return energy(f0, g, ta, lambda, k).first; },
                                            energy(f0, f, ta, lambda, k).second, rng));
}

Outcome gradient_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<std::size_t> edges(8, 128);
  double ws = 0, wv = 0, we = 0;
  for (int pair = 0; pair < 50; ++pair) {
    const std::size_t n = edges(rng);
    const bool closed = pair % 5 != 0;
    const Polyline f0 = closed ? fixtures::random_closed_curve(rng, n) : fixtures::random_open_curve(rng, n);
    const Polyline f = f0.with_vertices(fixtures::jitter<2>(rng, f0.vertices(), 0.1 / static_cast<double>(n)));
    const Polyline target = fixtures::random_closed_curve(rng, edges(rng));
    check_triple(f0, f, target, ws, wv, we, rng);
  }
  std::uniform_int_distribution<std::size_t> side(3, 10);
  for (int pair = 0; pair < 10; ++pair) {
    TriMesh f0 = pair % 2 == 0 ? fixtures::icosphere(1) : fixtures::random_patch(rng, side(rng), side(rng), 0.3);
    const TriMesh f = f0.with_vertices(fixtures::jitter<3>(rng, f0.vertices(), 0.01));
    const TriMesh target = fixtures::random_patch(rng, side(rng), side(rng), 0.3);
    check_triple(f0, f, target, ws, wv, we, rng);
  }
  const double secs = seconds_since(t0);
  const double worst = std::max({ws, wv, we});
  return {worst <= 1e-6 && secs < 60.0,
          fmt("worst relative error srnf %.2e, varifold %.2e, energy %.2e over 50 curve + 10 mesh pairs (tol 1e-6), "
              "%.1f s (limit 60 s)",
              ws, wv, we, secs)};
}

// --- 2 -------------------------------------------------------------------

template <DiscreteShape S>
double expansion_gap(const S& a, const S& b) {
  const auto ga = cell_geometry(a);
  const auto gb = cell_geometry(b);
  const auto qa = srnf(a), qb = srnf(b);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t c = 0; c < ga.size(); ++c) {
    lhs += (qa.q[c] - qb.q[c]).squaredNorm();
    rhs += ga.measures[c] + gb.measures[c] -
           2.0 * std::sqrt(ga.measures[c] * gb.measures[c]) * ga.normals[c].dot(gb.normals[c]);
  }
  return std::abs(lhs - rhs) / std::max(std::abs(lhs), std::abs(rhs));
}

Outcome srnf_expansion() {
  std::mt19937_64 rng(202);
  double worst = 0.0;
  for (int k = 0; k < 30; ++k) {
    const auto a = fixtures::random_closed_curve(rng, 64);
    worst = std::max(worst, expansion_gap(a, fixtures::random_closed_curve(rng, 64)));
    const auto o = fixtures::random_open_curve(rng, 33);
    worst = std::max(worst, expansion_gap(o, fixtures::random_open_curve(rng, 33)));
  }
  for (int k = 0; k < 5; ++k) {
    const auto m = fixtures::random_patch(rng, 8, 6, 0.3);
    worst = std::max(worst, expansion_gap(m, m.with_vertices(fixtures::jitter<3>(rng, m.vertices(), 0.05))));
  }
  return {worst <= 1e-12, fmt("worst relative gap %.2e on 65 random pairs (tol 1e-12)", worst)};
}

// --- 3 -------------------------------------------------------------------

Outcome varifold_closed_form() {
  auto atom = [](Point<2> c, Point<2> n) {
    VarifoldAtoms<2> a;
    a.centers = {c};
    a.normals = {n};
    a.weights = {1.0};
    return a;
  };
  const double sigma = 0.8;
  const auto a = atom({0.1, 0.2}, {0, 1});
  const double translated = var_dist_sq(a, atom({0.1 + sigma, 0.2}, {0, 1}), kernel_with(sigma));
  const double flip_lin = var_dist_sq(a, atom({0.1, 0.2}, {0, -1}), kernel_with(sigma));
  const double flip_sq = var_dist_sq(a, atom({0.1, 0.2}, {0, -1}),
                                     kernel_with(sigma, PositionKernel::Gaussian, DirectionKernel::Squared));
  const double cauchy = var_dist_sq(a, atom({0.1, 0.2 + sigma}, {0, 1}), kernel_with(sigma, PositionKernel::Cauchy));
  const double e1 = std::abs(translated - 2.0 * (1.0 - std::exp(-1.0)));
  const double e2 = std::abs(flip_lin - 4.0);
  const double e3 = std::abs(flip_sq);
  const double e4 = std::abs(cauchy - 1.0);
  const double worst = std::max({e1, e2, e3, e4});
  return {worst <= 1e-12, fmt("translated %.15f (2(1-e^-1)), flipped linear %.15f (4), flipped squared %.2e (0), "
                              "cauchy translated %.15f (1); worst error %.2e (tol 1e-12)",
                              translated, flip_lin, flip_sq, cauchy, worst)};
}

// --- 4 -------------------------------------------------------------------

Outcome discretization_order() {
  const Polyline p0 = fixtures::circle(16);
  const Polyline p1 = subdivide(p0, 1);
  const Polyline p2 = subdivide(p0, 2);
  const auto k = kernel_with(0.25 * bounding_box_diagonal<2>(p0.vertices()));
  const double d01 = var_dist_sq(atoms(p0), atoms(p1), k);
  const double d12 = var_dist_sq(atoms(p1), atoms(p2), k);
  auto max_edge = [](const Polyline& c) {
    const auto g = cell_geometry(c);
    return *std::max_element(g.measures.begin(), g.measures.end());
  };
  const double order = std::log(d01 / d12) / std::log(max_edge(p0) / max_edge(p1));
  return {order >= 2.0 && d12 < d01,
          fmt("d(P0,P1)=%.3e, d(P1,P2)=%.3e, empirical order %.2f in max edge length (need >= 2)", d01, d12, order)};
}

// --- 5 -------------------------------------------------------------------

Outcome inversion() {
  std::mt19937_64 rng(505);
  double open_err = 0.0, gap = 0.0, closure = 0.0, residual = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto f = fixtures::random_open_curve(rng, 80);
    const auto back = srnf_invert_open(srnf(f), f.vertices()[0]);
    for (std::size_t i = 0; i < f.vertex_count(); ++i) {
      open_err = std::max(open_err, (back.vertices()[i] - f.vertices()[i]).norm());
    }
    const auto c = fixtures::random_closed_curve(rng, 80);
    const auto inv = srnf_invert_closed(srnf(c), c.vertices()[0]);
    gap = std::max(gap, inv.gap);
    closure = std::max(closure, inv.closure_error);
    residual = std::max(residual, inv.residual);
  }
  const bool ok = open_err <= 1e-12 && gap <= 1e-12 && closure <= 1e-12 && residual <= 1e-12;
  return {ok, fmt("open roundtrip max vertex error %.2e; closed inputs: gap %.2e, closure %.2e, residual %.2e "
                  "(all tol 1e-12)",
                  open_err, gap, closure, residual)};
}

// --- 6 -------------------------------------------------------------------

Outcome matching_sanity() {
  const auto f0 = fixtures::circle(64);
  const auto f1 = fixtures::circle(48, 1.5, Point<2>(0.5, 0.0));
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = match(f0, f1, MatchConfig{});
  const double secs = seconds_since(t0);
  const double bound = 1e-3 * std::sqrt(r.reference_self);
  const auto id = match(f0, f0, MatchConfig{});
  const double id_energy = id.stages.front().final_terms.total;
  const bool ok = r.final_residual <= bound && secs < 30.0 && id.stages.size() == 1 && id_energy == 0.0;
  return {ok, fmt("residual %.3e <= %.3e in %zu stages, %.2f s (limit 30 s); identity: %zu stage, energy %.1e",
                  r.final_residual, bound, r.stages.size(), secs, id.stages.size(), id_energy)};
}

// --- 7 -------------------------------------------------------------------

Outcome topology_crossing() {
  const auto f0 = fixtures::circle(64);
  const std::vector<Polyline> parts{fixtures::circle(40, 0.6, Point<2>(-1.0, 0.0)),
                                    fixtures::circle(40, 0.6, Point<2>(1.0, 0.0))};
  const MatchConfig cfg;
  const auto r = match<Polyline>(f0, parts, cfg);
  bool monotone = true;
  std::string seq;
  for (std::size_t s = 0; s < r.stages.size(); ++s) {
    if (s > 0 && r.stages[s].reference_residual > r.stages[s - 1].reference_residual) monotone = false;
    seq += fmt("%s%.3g", s ? " " : "", r.stages[s].reference_residual);
  }
  const bool all_scales = !r.stages.empty() && r.stages.back().scale_index + 1 == cfg.sigma_schedule.size();
  const bool ok = !r.aborted && all_scales && monotone;
  return {ok, fmt("%zu stages over %zu kernel scales, aborted=%d, residual per stage: %s", r.stages.size(),
                  cfg.sigma_schedule.size(), r.aborted ? 1 : 0, seq.c_str())};
}

// --- 8 -------------------------------------------------------------------

Polyline class_shape(int cls, std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double a = 0.03 * u(rng), b = 0.03 * u(rng), phase = 3.0 * u(rng);
  const double scale = 1.0 + 0.05 * u(rng);
  const Point<2> center(0.3 * u(rng), 0.3 * u(rng));
  PointList<2> v;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n);
    const double ct = std::cos(t), st = std::sin(t);
    Point<2> p;
    if (cls == 0) {
      p = {ct, st};
    } else if (cls == 1) {
      p = {1.4 * ct, 0.7 * st};
    } else {
      p = {std::copysign(std::sqrt(std::abs(ct)), ct), std::copysign(std::sqrt(std::abs(st)), st)};
    }
    const double r = 1.0 + a * std::cos(3 * t + phase) + b * std::sin(5 * t);
    v.push_back(center + scale * r * p);
  }
  return Polyline(std::move(v), true);
}

/// Every point of classes a and b falls on its own side of the midpoint
/// threshold along the Fisher direction.
bool fisher_separates(const Eigen::MatrixXd& x, const std::vector<int>& cls, int a, int b) {
  Eigen::Vector2d ma = Eigen::Vector2d::Zero(), mb = Eigen::Vector2d::Zero();
  int na = 0, nb = 0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (cls[i] == a) ma += x.row(i).transpose(), ++na;
    if (cls[i] == b) mb += x.row(i).transpose(), ++nb;
  }
  ma /= na;
  mb /= nb;
  Eigen::Matrix2d sw = 1e-12 * Eigen::Matrix2d::Identity();
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (cls[i] != a && cls[i] != b) continue;
    const Eigen::Vector2d d = x.row(i).transpose() - (cls[i] == a ? ma : mb);
    sw += d * d.transpose();
  }
  const Eigen::Vector2d w = sw.ldlt().solve(ma - mb);
  const double threshold = 0.5 * w.dot(ma + mb);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double s = w.dot(x.row(i).transpose()) - threshold;
    if (cls[i] == a && !(s > 0)) return false;
    if (cls[i] == b && !(s < 0)) return false;
  }
  return true;
}

Outcome clustering() {
  std::mt19937_64 rng(808);
  std::vector<Polyline> shapes;
  std::vector<std::string> ids;
  std::vector<int> cls;
  const char* names[] = {"circle", "ellipse", "rounded_square"};
  for (int k = 0; k < 3; ++k) {
    for (int j = 0; j < 3; ++j) {
      shapes.push_back(class_shape(k, rng, static_cast<std::size_t>(40 + 4 * j)));
      ids.push_back(std::string(names[k]) + "_" + std::to_string(j));
      cls.push_back(k);
    }
  }
  const auto t0 = std::chrono::steady_clock::now();
  const auto rec = distance_matrix(ids, shapes, MatchConfig{}, hardware_threads());
  const double secs = seconds_since(t0);
  if (rec.partial_failure()) return {false, "distance matrix has failed pairs"};

  double within = 0, between = 0;
  int nw = 0, nb = 0;
  for (int i = 0; i < 9; ++i) {
    for (int j = i + 1; j < 9; ++j) {
      (cls[i] == cls[j] ? within : between) += rec.symmetrized(i, j);
      ++(cls[i] == cls[j] ? nw : nb);
    }
  }
  within /= nw;
  between /= nb;
  const auto mds = classical_mds(rec.symmetrized, 2);
  const bool separated = fisher_separates(mds.coordinates, cls, 0, 1) && fisher_separates(mds.coordinates, cls, 0, 2) &&
                         fisher_separates(mds.coordinates, cls, 1, 2);
  const bool ok = within < 0.5 * between && separated && secs < 600.0;
  return {ok, fmt("within-class mean %.4f, between-class mean %.4f (ratio %.3f, need < 0.5); classical MDS 2-D "
                  "one-vs-one Fisher separation %s; %.1f s (limit 600 s)",
                  within, between, within / between, separated ? "yes" : "no", secs)};
}

// --- 9 -------------------------------------------------------------------

/// Binary signal: 1 on the half of the curve lying in direction `angle` from
/// its vertex centroid, 0 on the antipodal half.
Polyline half_signal(const Polyline& c, double angle) {
  const Point<2> center = vertex_centroid<2>(c.vertices());
  const Point<2> dir(std::cos(angle), std::sin(angle));
  std::vector<double> s;
  for (const auto& x : cell_geometry(c).centers) s.push_back((x - center).dot(dir) > 0.0 ? 1.0 : 0.0);
  return c.with_signal(s);
}

double signal_agreement(const Polyline& f, const Polyline& target) {
  const auto gf = cell_geometry(f);
  const auto gt = cell_geometry(target);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < gf.size(); ++i) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < gt.size(); ++j) {
      const double d = (gf.centers[i] - gt.centers[j]).squaredNorm();
      if (d < best_d) best_d = d, best = j;
    }
    if ((*f.signal())[i] == (*target.signal())[best]) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(gf.size());
}

Outcome fshape_steering() {
  // Template signal on the upper half, target signal on the left half: the
  // signal regions only line up after a quarter turn.
  const Polyline f0 = half_signal(fixtures::circle(64), std::numbers::pi / 2);
  const Polyline f1 = half_signal(fixtures::circle(48, 1.0, Point<2>(0.2, 0.1)), std::numbers::pi);
  MatchConfig with_signal;
  with_signal.kernel.direction = DirectionKernel::Squared;
  with_signal.kernel.signal_scale = 0.5;
  MatchConfig without_signal;
  without_signal.kernel.direction = DirectionKernel::Squared;
  const double before = signal_agreement(f0, f1);
  const double steered = signal_agreement(match(f0, f1, with_signal).shape, f1);
  const double contrast = signal_agreement(match(f0, f1, without_signal).shape, f1);
  return {steered >= 0.9, fmt("cell signal agreement with signal kernel %.1f%% (need >= 90%%); contrast without "
                              "signal kernel %.1f%%; template before matching %.1f%%",
                              100 * steered, 100 * contrast, 100 * before)};
}

// --- 10 ------------------------------------------------------------------

Outcome optimizer_benchmark() {
  const Objective rosen = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    const double t = x(1) - x(0) * x(0);
    g.resize(2);
    g(0) = -2.0 * (1.0 - x(0)) - 400.0 * x(0) * t;
    g(1) = 200.0 * t;
    return (1.0 - x(0)) * (1.0 - x(0)) + 100.0 * t * t;
  };
  Eigen::VectorXd x0(2);
  x0 << -1.2, 1.0;
  const auto r = lbfgs_minimize({rosen, x0});
  const double err = (r.x - Eigen::Vector2d(1.0, 1.0)).norm();

  Eigen::VectorXd a(5);
  a << 1, -2, 3, -4, 5;
  const Objective quad = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = x - a;
    return 0.5 * g.squaredNorm();
  };
  const auto q = lbfgs_minimize({quad, Eigen::VectorXd::Zero(5)});
  const double qerr = (q.x - a).norm();
  const bool ok = err <= 1e-6 && r.iterations <= 200 && q.iterations <= 5 && qerr <= 1e-10;
  return {ok, fmt("rosenbrock error %.2e in %d iterations (%s); quadratic error %.2e in %d iterations", err,
                  r.iterations, std::string(to_string(r.reason)).c_str(), qerr, q.iterations)};
}

// --- 11 ------------------------------------------------------------------

std::string match_record(int threads) {
  const auto f0 = fixtures::circle(64);
  const auto f1 = fixtures::ellipse(50, 1.3, 0.8, Point<2>(0.1, -0.2));
  MatchConfig cfg;
  cfg.threads = threads;
  const auto r = match(f0, f1, cfg);
  std::ostringstream out;
  out << to_json(r).dump() << '\n' << energy_trace_csv(r);
  write_polyline_json(r.shape, out);
  return out.str();
}

std::string matrix_record(int threads) {
  const std::vector<Polyline> shapes{fixtures::circle(24), fixtures::ellipse(24, 1.2, 0.7),
                                     fixtures::circle(20, 0.9, Point<2>(0.3, 0.0))};
  MatchConfig cfg;
  cfg.sigma_schedule = {0.4, 0.2};
  const auto rec = distance_matrix<Polyline>({"a", "b", "c"}, shapes, cfg, threads);
  std::ostringstream out;
  out << to_json(rec).dump() << '\n';
  write_matrix_csv(rec.ids, rec.raw, out);
  write_matrix_csv(rec.ids, rec.symmetrized, out);
  return out.str();
}

Outcome determinism() {
  const std::string m1 = match_record(1);
  const bool match_ok = m1 == match_record(1) && m1 == match_record(4);
  const std::string d1 = matrix_record(1);
  const bool matrix_ok = d1 == matrix_record(1) && d1 == matrix_record(4);
  return {match_ok && matrix_ok,
          fmt("match record (%zu bytes) identical across runs and 1 vs 4 threads: %s; distance-matrix record "
              "identical: %s",
              m1.size(), match_ok ? "yes" : "no", matrix_ok ? "yes" : "no")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {1, "gradient correctness", gradient_correctness},
      {2, "SRNF expansion identity", srnf_expansion},
      {3, "closed-form varifold values", varifold_closed_form},
      {4, "discretization consistency", discretization_order},
      {5, "SRNF inversion", inversion},
      {6, "matching sanity", matching_sanity},
      {7, "topology-crossing run", topology_crossing},
      {8, "clustering analog", clustering},
      {9, "signal steering", fshape_steering},
      {10, "optimizer benchmark", optimizer_benchmark},
      {11, "determinism", determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("%s  criterion %2d  %-28s %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failures, std::size(criteria));
  return failures == 0 ? 0 : 1;
}
