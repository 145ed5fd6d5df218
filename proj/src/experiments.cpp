#include "circlelab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>

#include "circlelab/errors.hpp"
#include "circlelab/kam.hpp"
#include "circlelab/lyapunov.hpp"
#include "circlelab/matrix.hpp"
#include "config_node.hpp"

namespace circlelab {

using nlohmann::json;

namespace detail {

double Node::angle_value(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "golden") return (std::sqrt(5.0) - 1.0) / 2.0;
    if (s == "silver") return std::sqrt(2.0) - 1.0;
    throw ConfigError(where, "unknown angle name '" + s + "' (use a number, golden or silver)");
  }
  throw ConfigError(where, "expected an angle (number, golden or silver)");
}

double Node::angle(const std::string& key, bool required, double def) {
  seen_.insert(key);
  if (!has(key)) {
    if (required) throw ConfigError(where(key), "required key is missing");
    (*res_)[key] = def;
    return def;
  }
  const double v = angle_value(src_->at(key), where(key));
  (*res_)[key] = v;
  return v;
}

std::vector<double> Node::angles(const std::string& key) {
  seen_.insert(key);
  if (!has(key)) throw ConfigError(where(key), "required key is missing");
  const json& arr = src_->at(key);
  if (!arr.is_array() || arr.empty()) throw ConfigError(where(key), "expected a non-empty array of angles");
  std::vector<double> out;
  for (std::size_t i = 0; i < arr.size(); ++i)
    out.push_back(angle_value(arr[i], where(key) + "/" + std::to_string(i)));
  (*res_)[key] = out;
  return out;
}

}  // namespace detail

namespace {

using detail::Node;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string short_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) {
    for (std::size_t i = 0; i < header.size(); ++i) os_ << (i ? "," : "") << header[i];
    os_ << '\n';
  }
  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << num(values[i]);
    os_ << '\n';
  }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

void append(Check& c, const std::string& text) {
  c.detail += (c.detail.empty() ? "" : "; ") + text;
}

Check bound_check(const std::string& name, double value, double bound, const std::string& what) {
  return {name, value <= bound, what + " " + short_num(value) + " <= " + short_num(bound)};
}

struct Context {
  std::uint64_t seed = 1;
  int threads = 1;
  Resolution res;
};

using Runner = std::function<void(ExperimentResult&)>;
using Builder = Runner (*)(Node&, const Context&);

// ---- shared configuration pieces ----

Resolution parse_resolution(Node& root) {
  auto n = root.child("resolution");
  Resolution r{n.get<int>("modes", 64), n.get<int>("grid", 256)};
  try {
    r.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(n.where(), e.what());
  }
  n.done();
  return r;
}

McOptions parse_mc(Node& root, const Context& ctx, long steps, int samples) {
  auto n = root.child("mc");
  McOptions o;
  o.n_steps = n.get<long>("n_steps", steps);
  o.n_samples = n.get<int>("n_samples", samples);
  o.burn_in = n.get<long>("burn_in", 0L);
  const auto est = n.get<std::string>("estimator", "conditional");
  if (est == "pathwise") o.estimator = Estimator::pathwise;
  else if (est == "conditional") o.estimator = Estimator::conditional;
  else throw ConfigError(n.where("estimator"), "expected pathwise or conditional");
  if (o.n_steps < 1) throw ConfigError(n.where("n_steps"), "must be >= 1");
  if (o.n_samples < 2) throw ConfigError(n.where("n_samples"), "must be >= 2");
  if (o.burn_in < 0) throw ConfigError(n.where("burn_in"), "must be >= 0");
  n.done();
  o.seed = ctx.seed;
  o.threads = ctx.threads;
  return o;
}

McOptions row_seed(McOptions o, std::size_t row) {
  o.seed += row;
  return o;
}

std::vector<double> parse_list(Node& n, const std::string& key, const std::vector<double>& def) {
  auto v = n.get<std::vector<double>>(key, def);
  if (v.empty()) throw ConfigError(n.where(key), "must not be empty");
  for (double e : v)
    if (!(e >= 0.0) || !std::isfinite(e)) throw ConfigError(n.where(key), "values must be finite and >= 0");
  return v;
}

std::vector<double> parse_weights(Node& n, std::size_t count) {
  auto w = n.get<std::vector<double>>("weights", std::vector<double>(count, 1.0 / static_cast<double>(count)));
  if (w.size() != count) throw ConfigError(n.where("weights"), "one weight per angle required");
  double total = 0.0;
  for (double x : w) {
    if (!(x > 0.0)) throw ConfigError(n.where("weights"), "weights must be positive");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError(n.where("weights"), "weights must sum to 1");
  return w;
}

AngleEnsemble angle_ensemble(const std::vector<double>& weights, const std::vector<double>& angles) {
  std::vector<Atom<double>> out;
  for (std::size_t i = 0; i < angles.size(); ++i) out.push_back({weights[i], angles[i]});
  return AngleEnsemble(std::move(out));
}

// Circle atom: f = x + alpha + eps (sum cos_p cos 2 pi p x + sin_p sin 2 pi p x) / (2 pi).
struct CircleAtomSpec {
  double weight;
  double alpha;
  std::vector<double> cos_terms;
  std::vector<double> sin_terms;
};

std::vector<CircleAtomSpec> parse_circle_atoms(Node& root, const Resolution& res) {
  std::vector<CircleAtomSpec> out;
  double total = 0.0;
  for (auto& a : root.objects("atoms", true)) {
    CircleAtomSpec s{a.require<double>("weight"), a.angle("alpha", true),
                     a.get<std::vector<double>>("cos", {}), a.get<std::vector<double>>("sin", {})};
    a.done();
    if (!(s.weight > 0.0)) throw ConfigError(a.where("weight"), "must be positive");
    const int modes = static_cast<int>(std::max(s.cos_terms.size(), s.sin_terms.size()));
    if (modes > res.modes) throw ConfigError(a.where(), "more Fourier terms than resolution/modes");
    total += s.weight;
    out.push_back(std::move(s));
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError(root.where("atoms"), "weights must sum to 1");
  return out;
}

CircleEnsemble build_circle(const std::vector<CircleAtomSpec>& atoms, double eps, const Resolution& res) {
  std::vector<Atom<CircleDiffeo>> out;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const auto& s = atoms[i];
    auto c = s.cos_terms, sn = s.sin_terms;
    for (auto& v : c) v *= eps / kTwoPi;
    for (auto& v : sn) v *= eps / kTwoPi;
    try {
      out.push_back({s.weight, CircleDiffeo(PeriodicMap::trigonometric(s.alpha, c, sn, res))});
    } catch (const NotADiffeomorphism& e) {
      throw ConfigError("/atoms/" + std::to_string(i), std::string("eps = ") + num(eps) + ": " + e.what());
    }
  }
  return CircleEnsemble(std::move(out));
}

AngleEnsemble circle_angles(const std::vector<CircleAtomSpec>& atoms) {
  std::vector<Atom<double>> out;
  for (const auto& s : atoms) out.push_back({s.weight, s.alpha});
  return AngleEnsemble(std::move(out));
}

// Matrix atom: M = sl2(R_alpha + eps R_alpha B).
struct MatrixAtomSpec {
  double weight;
  double alpha;
  Mat2 B;
};

Mat2 parse_mat(Node& n, const std::string& key) {
  const auto v = n.require<std::vector<double>>(key);
  if (v.size() != 4) throw ConfigError(n.where(key), "expected 4 entries [a, b, c, d]");
  return {v[0], v[1], v[2], v[3]};
}

std::vector<MatrixAtomSpec> parse_matrix_atoms(Node& root) {
  std::vector<MatrixAtomSpec> out;
  double total = 0.0;
  for (auto& a : root.objects("atoms", true)) {
    MatrixAtomSpec s{a.require<double>("weight"), a.angle("alpha", true), parse_mat(a, "B")};
    a.done();
    if (!(s.weight > 0.0)) throw ConfigError(a.where("weight"), "must be positive");
    total += s.weight;
    out.push_back(s);
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError(root.where("atoms"), "weights must sum to 1");
  return out;
}

MatrixEnsemble build_matrices(const std::vector<MatrixAtomSpec>& atoms, double eps) {
  std::vector<Atom<Mat2>> out;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const Mat2 R = Mat2::rotation(atoms[i].alpha);
    const Mat2 M = R + eps * (R * atoms[i].B);
    if (!(M.det() > 0.0))
      throw ConfigError("/atoms/" + std::to_string(i), "eps = " + num(eps) + ": determinant is not positive");
    out.push_back({atoms[i].weight, sl2_normalize(M).first});
  }
  return MatrixEnsemble(std::move(out));
}

AngleEnsemble matrix_angles(const std::vector<MatrixAtomSpec>& atoms) {
  std::vector<Atom<double>> out;
  for (const auto& s : atoms) out.push_back({s.weight, s.alpha});
  return AngleEnsemble(std::move(out));
}

// |d_k| / |d_{k+1}| over consecutive halvings.
Check halving_check(const std::string& name, const std::vector<double>& x, const std::vector<double>& d,
                    double lo, double hi) {
  Check c{name, true, ""};
  int pairs = 0;
  for (std::size_t k = 0; k + 1 < x.size(); ++k) {
    if (std::abs(x[k] - 2.0 * x[k + 1]) > 1e-12 * x[k] || x[k] == 0.0) continue;
    ++pairs;
    const double r = std::abs(d[k]) / std::abs(d[k + 1]);
    append(c, short_num(x[k]) + "->" + short_num(x[k + 1]) + ": " + short_num(r));
    if (!(r >= lo && r <= hi)) c.pass = false;
  }
  if (pairs == 0) {
    c.pass = false;
    append(c, "no halving pair in the sweep");
  }
  c.detail += " in [" + short_num(lo) + ", " + short_num(hi) + "]";
  return c;
}

struct RatioWindow {
  bool enabled;
  double lo, hi;
};

RatioWindow parse_window(Node& th, double lo, double hi) {
  RatioWindow w{th.get<bool>("check_ratio", false), th.get<double>("ratio_min", lo), th.get<double>("ratio_max", hi)};
  if (!(w.lo > 0.0 && w.lo < w.hi)) throw ConfigError(th.where("ratio_min"), "need 0 < ratio_min < ratio_max");
  return w;
}

// ---- lyapunov_expansion ----

Runner lyapunov_expansion(Node& root, const Context& ctx) {
  const auto res = ctx.res;
  const auto atoms = parse_circle_atoms(root, res);
  const auto eps = parse_list(root, "eps", {0.04, 0.02, 0.01});
  const auto mc = parse_mc(root, ctx, 100000, 200);
  auto th = root.child("thresholds");
  const auto window = parse_window(th, 5.0, 12.0);
  const double agree_c = th.get<double>("agreement_eps3", 10.0);
  const double se_budget = th.get<double>("std_error_eps3", 0.2);
  th.done();
  for (double e : eps) build_circle(atoms, e, res);

  return [=](ExperimentResult& out) {
    const auto alpha = circle_angles(atoms);
    Csv csv({"eps", "lambda2", "lambda2_over_eps2", "lambda_mc", "std_error", "spread", "abs_diff",
             "perturbation_size"});
    std::vector<double> l2s, diffs;
    Check agree{"mc_agreement", true, ""}, budget{"std_error_budget", true, ""};
    for (std::size_t r = 0; r < eps.size(); ++r) {
      const auto f = build_circle(atoms, eps[r], res);
      const double l2 = analytic_lyapunov_order2(f, alpha);
      const auto est = mc_lyapunov(f, row_seed(mc, r));
      const double diff = est.value - l2;
      const double e3 = eps[r] * eps[r] * eps[r];
      csv.row({eps[r], l2, eps[r] > 0.0 ? l2 / (eps[r] * eps[r]) : 0.0, est.value, est.std_error, est.spread,
               std::abs(diff), perturbation_size(f, alpha)});
      l2s.push_back(l2);
      diffs.push_back(diff);
      const double tol = std::max(3.0 * est.std_error, agree_c * e3);
      if (!(std::abs(diff) <= tol)) agree.pass = false;
      append(agree, "eps " + short_num(eps[r]) + ": " + short_num(std::abs(diff)) + " <= " + short_num(tol));
      if (eps[r] > 0.0) {
        if (!(est.std_error < se_budget * e3)) budget.pass = false;
        append(budget, "eps " + short_num(eps[r]) + ": se/eps^3 " + short_num(est.std_error / e3));
      }
    }
    Check bil{"bilinearity", true, ""};
    std::optional<double> ref;
    for (std::size_t r = 0; r < eps.size(); ++r) {
      if (eps[r] == 0.0) {
        if (l2s[r] != 0.0) bil.pass = false;
        continue;
      }
      const double q = l2s[r] / (eps[r] * eps[r]);
      if (!ref) ref = q;
      if (std::abs(q - *ref) > 1e-12 * std::max(std::abs(*ref), 1e-300) && std::abs(q - *ref) > 1e-300)
        bil.pass = false;
    }
    bil.detail = "lambda2/eps^2 = " + num(ref.value_or(0.0) + 0.0);
    out.files.push_back({"lyapunov.csv", csv.str()});
    out.checks.push_back(bil);
    out.checks.push_back(agree);
    if (window.enabled) {
      out.checks.push_back(budget);
      out.checks.push_back(halving_check("error_ratio", eps, diffs, window.lo, window.hi));
    }
  };
}

// ---- stationary_density ----

Runner stationary_density(Node& root, const Context& ctx) {
  const auto res = ctx.res;
  const auto atoms = parse_circle_atoms(root, res);
  const auto eps = parse_list(root, "eps", {0.04, 0.02});
  auto sim = root.child("simulation");
  const long burn_in = sim.get<long>("burn_in", 1000L);
  const long n_draws = sim.get<long>("n_draws", 1000000L);
  const int bins = sim.get<int>("bins", 64);
  if (burn_in < 0) throw ConfigError(sim.where("burn_in"), "must be >= 0");
  if (n_draws < 1) throw ConfigError(sim.where("n_draws"), "must be >= 1");
  if (bins < 1) throw ConfigError(sim.where("bins"), "must be >= 1");
  sim.done();
  auto th = root.child("thresholds");
  const auto window = parse_window(th, 3.0, 5.0);
  const double agree_c = th.get<double>("agreement_eps2", 10.0);
  th.done();
  for (double e : eps) build_circle(atoms, e, res);
  const auto seed = ctx.seed;

  return [=](ExperimentResult& out) {
    const auto alpha = circle_angles(atoms);
    Csv csv({"eps", "mc_cos_moment", "h1_cos_moment", "diff", "h1_mean"});
    std::vector<double> diffs;
    std::vector<DataFile> hists;
    Check mean{"h1_unit_mass", true, ""}, agree{"first_order_agreement", true, ""};
    for (std::size_t r = 0; r < eps.size(); ++r) {
      const auto f = build_circle(atoms, eps[r], res);
      const auto h1 = stationary_density_order1(f, alpha);
      const auto hist = mc_stationary(f, burn_in, n_draws, bins, seed + r);
      const double pred = h1.coeff(1).real();  // int cos(2 pi x) h1 = Re c_1
      const double diff = hist.cos_moment(1) - pred;
      diffs.push_back(diff);
      csv.row({eps[r], hist.cos_moment(1), pred, diff, h1.mean()});
      if (!(std::abs(h1.mean() - 1.0) < 1e-14)) mean.pass = false;
      const double tol = agree_c * eps[r] * eps[r] + 5.0 / std::sqrt(static_cast<double>(n_draws));
      if (!(std::abs(diff) <= tol)) agree.pass = false;
      append(agree, "eps " + short_num(eps[r]) + ": " + short_num(std::abs(diff)) + " <= " + short_num(tol));

      Csv hc({"bin_center", "mc_mass", "h1_mass"});
      for (int b = 0; b < bins; ++b) {
        const double lo = static_cast<double>(b) / bins, hi = static_cast<double>(b + 1) / bins;
        // exact bin mass of h1 = 1 + sum 2 Re(c_p e^{2 pi i p x})
        double m = hi - lo;
        for (int p = 1; p <= res.modes; ++p) {
          const auto c = h1.coeff(p);
          if (c == 0.0) continue;
          const double w = kTwoPi * p;
          m += 2.0 * (c.real() * (std::sin(w * hi) - std::sin(w * lo)) + c.imag() * (std::cos(w * hi) - std::cos(w * lo))) / w;
        }
        hc.row({0.5 * (lo + hi), hist.masses[static_cast<std::size_t>(b)], m});
      }
      hists.push_back({"histogram_" + std::to_string(r) + ".csv", hc.str()});
    }
    mean.detail = "int h1 = 1";
    out.files.push_back({"density.csv", csv.str()});
    for (auto& h : hists) out.files.push_back(std::move(h));
    out.checks.push_back(mean);
    out.checks.push_back(agree);
    if (window.enabled) out.checks.push_back(halving_check("error_ratio", eps, diffs, window.lo, window.hi));
  };
}

// ---- circle KAM setups ----

struct CircleSetup {
  bool planted = true;
  // planted
  std::vector<double> h_cos, h_sin;
  double h_norm3 = 0.05;
  std::vector<double> angles, weights;
  // perturbed
  std::vector<CircleAtomSpec> atoms;
  double eps = 0.03;
  bool rotation_alpha = true;
  long rotation_iters = 200000;
};

struct BuiltCircle {
  CircleEnsemble f;
  AngleEnsemble alpha;
  std::optional<CircleDiffeo> h0;
};

CircleSetup parse_circle_setup(Node& root, const Resolution& res) {
  CircleSetup s;
  const auto mode = root.get<std::string>("mode", "planted");
  if (mode != "planted" && mode != "perturbed") throw ConfigError(root.where("mode"), "expected planted or perturbed");
  s.planted = mode == "planted";
  auto p = root.child(s.planted ? "planted" : "perturbed");
  if (s.planted) {
    auto h = p.child("h");
    s.h_cos = h.get<std::vector<double>>("cos", {0.0, 0.5});
    s.h_sin = h.get<std::vector<double>>("sin", {1.0});
    s.h_norm3 = h.get<double>("norm3", 0.05);
    if (!(s.h_norm3 >= 0.0)) throw ConfigError(h.where("norm3"), "must be >= 0");
    if (static_cast<int>(std::max(s.h_cos.size(), s.h_sin.size())) > res.modes)
      throw ConfigError(h.where(), "more Fourier terms than resolution/modes");
    h.done();
    s.angles = p.angles("alphas");
    s.weights = parse_weights(p, s.angles.size());
  } else {
    s.atoms = parse_circle_atoms(p, res);
    s.eps = p.get<double>("eps", 0.03);
    if (!(s.eps >= 0.0)) throw ConfigError(p.where("eps"), "must be >= 0");
    const auto src = p.get<std::string>("alpha_source", "rotation_number");
    if (src != "rotation_number" && src != "base")
      throw ConfigError(p.where("alpha_source"), "expected rotation_number or base");
    s.rotation_alpha = src == "rotation_number";
    s.rotation_iters = p.get<long>("rotation_iters", 200000L);
    if (s.rotation_iters < 1) throw ConfigError(p.where("rotation_iters"), "must be >= 1");
    build_circle(s.atoms, s.eps, res);
  }
  p.done();
  return s;
}

BuiltCircle build_setup(const CircleSetup& s, const Resolution& res) {
  if (s.planted) {
    auto shape = PeriodicMap::trigonometric(0.0, s.h_cos, s.h_sin, res);
    const double n3 = ck_norm(shape, 3);
    if (n3 > 0.0) shape *= s.h_norm3 / n3;
    CircleDiffeo h0(shape);
    auto alpha = angle_ensemble(s.weights, s.angles);
    return {conjugated_rotations(h0, alpha), alpha, h0};
  }
  auto f = build_circle(s.atoms, s.eps, res);
  std::vector<double> rho;
  for (std::size_t i = 0; i < f.size(); ++i)
    rho.push_back(s.rotation_alpha ? rotation_number(f.value(i), s.rotation_iters) : s.atoms[i].alpha);
  return {f, f.with_values(rho), std::nullopt};
}

KamConfig parse_kam(Node& root, const McOptions& mc) {
  auto k = root.child("kam");
  KamConfig c;
  c.K = k.get<int>("K", 0);
  c.Q = k.get<double>("Q", 4.0 / 3.0);
  c.C0 = k.get<double>("C0", 0.0);
  c.max_iters = k.get<int>("max_iters", 30);
  c.convergence_tol = k.get<double>("convergence_tol", 1e-9);
  c.resonance_floor = k.get<double>("resonance_floor", kDefaultResonanceFloor);
  c.q_max = k.get<int>("q_max", 0);
  if (c.q_max < 0) throw ConfigError(k.where("q_max"), "must be >= 0");
  k.done();
  c.mc = mc;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(k.where(), e.what());
  }
  return c;
}

std::string to_text(const KamReport& r) {
  std::ostringstream os;
  write_report(os, r);
  return os.str();
}

std::string to_text(const MatrixKamReport& r) {
  std::ostringstream os;
  write_report(os, r);
  return os.str();
}

Runner kam_circle(Node& root, const Context& ctx) {
  const auto res = ctx.res;
  const auto setup = parse_circle_setup(root, res);
  const auto mc = parse_mc(root, ctx, 20000, 64);
  const auto cfg = parse_kam(root, mc);
  auto th = root.child("thresholds");
  const double final_tol = th.get<double>("final_norm", 1e-6);
  const int iter_limit = th.get<int>("max_iterations", 12);
  const double recovery_tol = th.get<double>("h_recovery", 1e-4);
  const double ratio_bound = th.get<double>("ratio_bound", 3.0);
  th.done();

  return [=](ExperimentResult& out) {
    const auto built = build_setup(setup, res);
    const auto rep = kam_run(built.f, built.alpha, cfg);
    out.files.push_back({"kam_report.csv", to_text(rep)});
    Csv conj({"x", "h_minus_x"});
    const auto hs = rep.h.phi().samples();
    for (std::size_t j = 0; j < hs.size(); ++j) conj.row({rep.h.phi().grid_point(static_cast<int>(j)), hs[j]});
    out.files.push_back({"conjugacy.csv", conj.str()});

    const std::string reason = to_string(rep.stop_reason) +
                               (rep.stop_reason == StopReason::resonance ? " at q = " + std::to_string(rep.resonant_mode) : "");
    const int iterations = rep.steps.empty() ? 0 : rep.steps.back().n;
    if (setup.planted) {
      out.checks.push_back({"converged", rep.stop_reason == StopReason::converged, "stop_reason " + reason});
      out.checks.push_back(bound_check("final_norm", rep.final_d0, final_tol, "final_d0"));
      out.checks.push_back(bound_check("iterations", iterations, iter_limit, "iterations"));
      auto diff = rep.h.phi() - built.h0->phi();
      diff = diff - diff.mean();
      out.checks.push_back(bound_check("h_recovery", ck_norm(diff, 0), recovery_tol, "d0 after normalization"));
    } else {
      const double bound = ratio_bound * std::sqrt(std::abs(rep.lambda.value) + 3.0 * rep.lambda.std_error);
      auto c = bound_check("final_distance", rep.final_d0, bound, "final_d0");
      c.detail += " (stop_reason " + reason + ", ratio " + short_num(rep.ratio) + ")";
      c.pass = c.pass && rep.stop_reason != StopReason::resonance;
      out.checks.push_back(c);
    }
  };
}

Runner commutator_circle(Node& root, const Context& ctx) {
  const auto res = ctx.res;
  const auto setup = parse_circle_setup(root, res);
  const auto mc = parse_mc(root, ctx, 20000, 64);
  auto th = root.child("thresholds");
  const double planted_tol = th.get<double>("planted_defect", 1e-10);
  const double constant = th.get<double>("constant", 48.0);
  th.done();

  return [=](ExperimentResult& out) {
    const auto built = build_setup(setup, res);
    const double defect = commutator_defect(built.f);
    const auto est = mc_lyapunov(built.f, mc);
    const double bound = constant * std::sqrt(std::abs(est.value) + 3.0 * est.std_error);
    Csv csv({"defect", "lambda_mc", "std_error", "bound"});
    csv.row({defect, est.value, est.std_error, bound});
    out.files.push_back({"commutator.csv", csv.str()});
    if (setup.planted) out.checks.push_back(bound_check("planted_defect", defect, planted_tol, "defect"));
    else out.checks.push_back(bound_check("defect_bound", defect, bound, "defect"));
  };
}

// ---- matrix experiments ----

Runner matrix_expansion(Node& root, const Context& ctx) {
  const auto atoms = parse_matrix_atoms(root);
  const auto eps = parse_list(root, "eps", {0.04, 0.02});
  const auto mc = parse_mc(root, ctx, 100000, 200);
  auto th = root.child("thresholds");
  const auto window = parse_window(th, 5.0, 12.0);
  const double agree_c = th.get<double>("agreement_eps3", 10.0);
  th.done();
  for (double e : eps) build_matrices(atoms, e);

  return [=](ExperimentResult& out) {
    const auto alpha = matrix_angles(atoms);
    Csv csv({"eps", "Lambda2", "Lambda2_over_eps2", "variance_form", "Lambda_mc", "std_error", "abs_diff"});
    std::vector<double> diffs;
    Check agree{"mc_agreement", true, ""}, var{"variance_form", true, ""};
    bool any_var = false;
    for (std::size_t r = 0; r < eps.size(); ++r) {
      const auto M = build_matrices(atoms, eps[r]);
      const auto an = analytic_matrix_lyapunov_order2(M, alpha);
      const auto est = mc_matrix_lyapunov(M, row_seed(mc, r));
      const double diff = est.value - an.value;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      csv.row({eps[r], an.value, eps[r] > 0.0 ? an.value / (eps[r] * eps[r]) : 0.0, an.variance_form.value_or(nan),
               est.value, est.std_error, std::abs(diff)});
      diffs.push_back(diff);
      const double tol = std::max(3.0 * est.std_error, agree_c * eps[r] * eps[r] * eps[r]);
      if (!(std::abs(diff) <= tol)) agree.pass = false;
      append(agree, "eps " + short_num(eps[r]) + ": " + short_num(std::abs(diff)) + " <= " + short_num(tol));
      if (an.variance_form) {
        any_var = true;
        const double d = std::abs(*an.variance_form - an.value);
        if (!(d <= 1e-12)) var.pass = false;
        append(var, "eps " + short_num(eps[r]) + ": " + short_num(d));
      }
    }
    out.files.push_back({"matrix_lyapunov.csv", csv.str()});
    if (any_var) out.checks.push_back(var);
    out.checks.push_back(agree);
    if (window.enabled) out.checks.push_back(halving_check("error_ratio", eps, diffs, window.lo, window.hi));
  };
}

Runner schrodinger(Node& root, const Context& ctx) {
  const double energy = root.get<double>("energy", 1.0);
  auto pot = root.child("potential");
  const auto values = pot.get<std::vector<double>>("values", {1.0, -1.0});
  if (values.empty()) throw ConfigError(pot.where("values"), "must not be empty");
  const auto weights = parse_weights(pot, values.size());
  pot.done();
  const auto gs = parse_list(root, "g", {0.1, 0.05});
  const auto mc = parse_mc(root, ctx, 100000, 100);
  auto th = root.child("thresholds");
  const double rel_tol = th.get<double>("relative_error", 0.15);
  const double lo = th.get<double>("scaling_min", 0.2), hi = th.get<double>("scaling_max", 0.3);
  th.done();
  const auto V = angle_ensemble(weights, values);
  try {
    schrodinger_ensemble(energy, V, 0.0);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(root.where("energy"), e.what());
  }

  return [=](ExperimentResult& out) {
    Csv csv({"g", "Lambda_mc", "std_error", "figotin_pastur", "relative_error"});
    Check zero{"zero_coupling", true, ""}, rel{"figotin_pastur", true, ""};
    bool any_zero = false, any_rel = false;
    std::vector<double> xs, ls;
    for (std::size_t r = 0; r < gs.size(); ++r) {
      const auto res = schrodinger_lyapunov(energy, V, gs[r], row_seed(mc, r));
      const double re = res.figotin_pastur > 0.0 ? res.mc.value / res.figotin_pastur - 1.0 : 0.0;
      csv.row({gs[r], res.mc.value, res.mc.std_error, res.figotin_pastur, re});
      if (gs[r] == 0.0 || res.figotin_pastur == 0.0) {
        any_zero = true;
        const double tol = std::max(3.0 * res.mc.std_error, 5.0 / static_cast<double>(mc.n_steps));
        if (!(std::abs(res.mc.value) <= tol)) zero.pass = false;
        append(zero, "g " + short_num(gs[r]) + ": |Lambda| " + short_num(std::abs(res.mc.value)) + " <= " + short_num(tol));
      } else {
        any_rel = true;
        if (!(std::abs(re) <= rel_tol)) rel.pass = false;
        append(rel, "g " + short_num(gs[r]) + ": " + short_num(re));
        xs.push_back(gs[r]);
        ls.push_back(res.mc.value);
      }
    }
    out.files.push_back({"schrodinger.csv", csv.str()});
    if (any_zero) out.checks.push_back(zero);
    if (any_rel) {
      rel.detail += " within " + short_num(rel_tol);
      out.checks.push_back(rel);
      // Lambda(g/2) / Lambda(g), compared as the inverse ratio of the halving check
      std::vector<double> inv;
      for (double l : ls) inv.push_back(1.0 / l);
      if (xs.size() >= 2) out.checks.push_back(halving_check("quadratic_scaling", xs, inv, lo, hi));
    }
  };
}

struct MatrixSetup {
  bool planted = true;
  Mat2 P0;
  std::vector<double> angles, weights;
  std::vector<MatrixAtomSpec> atoms;
  std::vector<double> eps;
};

MatrixSetup parse_matrix_setup(Node& root, const std::vector<double>& default_eps) {
  MatrixSetup s;
  const auto mode = root.get<std::string>("mode", "planted");
  if (mode != "planted" && mode != "perturbed") throw ConfigError(root.where("mode"), "expected planted or perturbed");
  s.planted = mode == "planted";
  auto p = root.child(s.planted ? "planted" : "perturbed");
  if (s.planted) {
    const auto v = p.get<std::vector<double>>("P0", {1.03, 0.02, -0.01, 0.9998 / 1.03});
    if (v.size() != 4) throw ConfigError(p.where("P0"), "expected 4 entries [a, b, c, d]");
    try {
      s.P0 = sl2_normalize({v[0], v[1], v[2], v[3]}).first;
    } catch (const std::invalid_argument&) {
      throw ConfigError(p.where("P0"), "determinant must be positive");
    }
    s.angles = p.angles("alphas");
    s.weights = parse_weights(p, s.angles.size());
  } else {
    s.atoms = parse_matrix_atoms(p);
    s.eps = parse_list(p, "eps", default_eps);
    for (double e : s.eps) build_matrices(s.atoms, e);
  }
  p.done();
  return s;
}

MatrixEnsemble planted_matrices(const MatrixSetup& s) {
  std::vector<Mat2> ms;
  const Mat2 Pi = s.P0.inverse();
  for (double a : s.angles) ms.push_back(Pi * Mat2::rotation(a) * s.P0);
  return angle_ensemble(s.weights, s.angles).with_values(ms);
}

MatrixKamConfig parse_matrix_kam(Node& root, const McOptions& mc) {
  auto k = root.child("kam");
  MatrixKamConfig c;
  c.delta = k.get<double>("delta", 0.1);
  c.max_iters = k.get<int>("max_iters", 40);
  c.convergence_tol = k.get<double>("convergence_tol", 1e-12);
  c.u0_radius = k.get<double>("u0_radius", 0.5);
  c.A0 = k.get<double>("A0", 0.0);
  c.resonance_floor = k.get<double>("resonance_floor", kDefaultResonanceFloor);
  const auto nm = k.get<std::string>("norm", "operator2");
  if (nm == "operator2") c.norm = MatrixNorm::operator2;
  else if (nm == "frobenius") c.norm = MatrixNorm::frobenius;
  else throw ConfigError(k.where("norm"), "expected operator2 or frobenius");
  k.done();
  c.mc = mc;
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(k.where(), e.what());
  }
  return c;
}

Runner kam_matrix(Node& root, const Context& ctx) {
  const auto setup = parse_matrix_setup(root, {0.03});
  const auto mc = parse_mc(root, ctx, 20000, 64);
  const auto cfg = parse_matrix_kam(root, mc);
  auto th = root.child("thresholds");
  const double final_tol = th.get<double>("final_distance", 1e-6);
  const double factor = th.get<double>("bound_factor", 4.0);
  th.done();

  return [=](ExperimentResult& out) {
    if (setup.planted) {
      const auto rep = matrix_kam(planted_matrices(setup), cfg);
      out.files.push_back({"kam_report.csv", to_text(rep)});
      out.checks.push_back({"converged", rep.stop_reason == MatrixStopReason::converged,
                            "stop_reason " + to_string(rep.stop_reason)});
      out.checks.push_back(bound_check("final_distance", rep.final_distance, final_tol, "final distance"));
      return;
    }
    Check c{"final_distance", true, ""};
    for (std::size_t r = 0; r < setup.eps.size(); ++r) {
      auto row_cfg = cfg;
      row_cfg.mc = row_seed(mc, r);
      const auto rep = matrix_kam(build_matrices(setup.atoms, setup.eps[r]), row_cfg);
      const std::string name = setup.eps.size() == 1 ? "kam_report.csv" : "kam_report_" + std::to_string(r) + ".csv";
      out.files.push_back({name, to_text(rep)});
      const double bound = factor * rep.A0 * std::sqrt(std::max(rep.Lambda.value, 0.0) + 3.0 * rep.Lambda.std_error);
      if (!(rep.final_distance <= bound) || rep.stop_reason == MatrixStopReason::resonance) c.pass = false;
      append(c, "eps " + short_num(setup.eps[r]) + ": " + short_num(rep.final_distance) + " <= " + short_num(bound) +
                    " (" + to_string(rep.stop_reason) + ")");
    }
    out.checks.push_back(c);
  };
}

Runner commutator_matrix(Node& root, const Context& ctx) {
  const auto setup = parse_matrix_setup(root, {0.04, 0.02, 0.01});
  const auto mc = parse_mc(root, ctx, 100000, 100);
  auto th = root.child("thresholds");
  const double planted_tol = th.get<double>("planted_defect", 1e-12);
  const double spread = th.get<double>("ratio_spread", 2.0);
  th.done();

  return [=](ExperimentResult& out) {
    if (setup.planted) {
      const auto M = planted_matrices(setup);
      const double defect = matrix_commutator_defect(M);
      Csv csv({"defect"});
      csv.row({defect});
      out.files.push_back({"commutator.csv", csv.str()});
      out.checks.push_back(bound_check("planted_defect", defect, planted_tol, "defect"));
      return;
    }
    Csv csv({"eps", "defect", "Lambda_mc", "std_error", "defect_over_Lambda"});
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t r = 0; r < setup.eps.size(); ++r) {
      const auto M = build_matrices(setup.atoms, setup.eps[r]);
      const double defect = matrix_commutator_defect(M);
      const auto est = mc_matrix_lyapunov(M, row_seed(mc, r));
      const double q = defect / est.value;
      csv.row({setup.eps[r], defect, est.value, est.std_error, q});
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    out.files.push_back({"commutator.csv", csv.str()});
    const bool ok = lo > 0.0 && hi / lo <= spread;
    out.checks.push_back({"ratio_stable", ok,
                          "defect/Lambda in [" + short_num(lo) + ", " + short_num(hi) + "], spread <= " + short_num(spread)});
  };
}

// ---- registry ----

struct Entry {
  ExperimentInfo info;
  Builder build;
};

const std::vector<Entry>& entries() {
  static const std::vector<Entry> list{
      {{"lyapunov_expansion", "circle: order-2 Lyapunov expansion against Monte Carlo over an eps sweep"},
       lyapunov_expansion},
      {{"stationary_density", "circle: first-order stationary density against a long-chain histogram"},
       stationary_density},
      {{"kam_circle", "circle: KAM linearization on planted or perturbed ensembles"}, kam_circle},
      {{"commutator_circle", "circle: commutator defect against the Lyapunov bound"}, commutator_circle},
      {{"matrix_expansion", "matrices: order-2 expansion against Furstenberg-Kesten Monte Carlo"}, matrix_expansion},
      {{"schrodinger", "matrices: Schrodinger cocycle against the Figotin-Pastur formula"}, schrodinger},
      {{"kam_matrix", "matrices: reduction to rotations on planted or perturbed ensembles"}, kam_matrix},
      {{"commutator_matrix", "matrices: commutator defect over Lyapunov exponent"}, commutator_matrix},
  };
  return list;
}

struct Prepared {
  std::string name;
  json resolved;
  Runner run;
};

Prepared prepare(const json& config, const std::string& expected, const RunOverrides& overrides) {
  if (!config.is_object()) throw ConfigError("/", "configuration must be a JSON object");
  Prepared p;
  p.resolved = json::object();
  Node root(config, p.resolved, "");
  p.name = root.require<std::string>("experiment");
  if (!expected.empty() && p.name != expected)
    throw ConfigError("/experiment", "config is for '" + p.name + "', not '" + expected + "'");
  const auto& list = entries();
  const auto it = std::find_if(list.begin(), list.end(), [&](const Entry& e) { return e.info.name == p.name; });
  if (it == list.end()) throw ConfigError("/experiment", "unknown experiment '" + p.name + "'");

  Context ctx;
  ctx.seed = root.get<std::uint64_t>("seed", 1);
  if (overrides.seed) {
    ctx.seed = *overrides.seed;
    root.resolved()["seed"] = ctx.seed;
  }
  if (overrides.threads < 1) throw ConfigError("--threads", "must be >= 1");
  ctx.threads = overrides.threads;
  ctx.res = parse_resolution(root);
  p.run = it->build(root, ctx);
  root.done();
  return p;
}

}  // namespace

bool ExperimentResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::string ExperimentResult::summary() const {
  std::ostringstream os;
  os << "experiment: " << experiment << '\n';
  os << "seed: " << resolved.value("seed", std::uint64_t{0}) << '\n';
  for (const auto& c : checks) os << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
  os << "RESULT: " << (passed() ? "PASS" : "FAIL") << '\n';
  return os.str();
}

const std::vector<ExperimentInfo>& experiment_registry() {
  static const std::vector<ExperimentInfo> infos = [] {
    std::vector<ExperimentInfo> out;
    for (const auto& e : entries()) out.push_back(e.info);
    return out;
  }();
  return infos;
}

json parse_config_text(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t pos = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos > 0 ? pos - 1 : 0), '\n');
    throw ConfigError("line " + std::to_string(line), "malformed JSON: " + std::string(e.what()));
  }
}

json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open configuration file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

json validate_config(const json& config, const std::string& expected, const RunOverrides& overrides) {
  return prepare(config, expected, overrides).resolved;
}

ExperimentResult run_experiment(const json& config, const std::string& expected, const RunOverrides& overrides) {
  auto p = prepare(config, expected, overrides);
  ExperimentResult result;
  result.experiment = p.name;
  result.resolved = std::move(p.resolved);
  p.run(result);
  return result;
}

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& content) {
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw Error("cannot write " + (dir / name).string());
    os << content;
  };
  put("manifest.json", result.resolved.dump(2) + "\n");
  put("summary.txt", result.summary());
  for (const auto& f : result.files) put(f.name, f.content);
}

}  // namespace circlelab
