#include "pilat/poly_opt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <queue>
#include <random>

#include "pilat/error.hpp"

namespace pilat {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Gauss-Jordan over the rationals; nullopt when the system is singular.
std::optional<std::vector<Rational>> solve_unique(std::vector<std::vector<Rational>> a, std::vector<Rational> b) {
  const std::size_t n = a.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    while (piv < n && a[piv][col] == 0) ++piv;
    if (piv == n) return std::nullopt;
    std::swap(a[piv], a[col]);
    std::swap(b[piv], b[col]);
    Rational inv = 1 / a[col][col];
    for (std::size_t j = col; j < n; ++j) a[col][j] *= inv;
    b[col] *= inv;
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col || a[r][col] == 0) continue;
      Rational f = a[r][col];
      for (std::size_t j = col; j < n; ++j) a[r][j] -= f * a[col][j];
      b[r] -= f * b[col];
    }
  }
  return b;
}

// P(x) = x'Hx + b'x + c for total degree <= 2.
struct Quadratic {
  std::vector<std::vector<Rational>> h;
  std::vector<Rational> b;
  Rational c;
};

Quadratic quadratic_form(const Polynomial& p) {
  const std::size_t n = p.arity();
  Quadratic q{std::vector<std::vector<Rational>>(n, std::vector<Rational>(n)), std::vector<Rational>(n), 0};
  for (const auto& [e, coeff] : p.terms()) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < n; ++i)
      for (unsigned k = 0; k < e[i]; ++k) idx.push_back(i);
    if (idx.empty()) {
      q.c += coeff;
    } else if (idx.size() == 1) {
      q.b[idx[0]] += coeff;
    } else if (idx[0] == idx[1]) {
      q.h[idx[0]][idx[0]] += coeff;
    } else {
      q.h[idx[0]][idx[1]] += coeff / 2;
      q.h[idx[1]][idx[0]] += coeff / 2;
    }
  }
  return q;
}

bool positive_definite(std::vector<std::vector<Rational>> h) {
  const std::size_t n = h.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (h[k][k] <= 0) return false;
    for (std::size_t i = k + 1; i < n; ++i) {
      Rational f = h[i][k] / h[k][k];
      for (std::size_t j = k; j < n; ++j) h[i][j] -= f * h[k][j];
    }
  }
  return true;
}

double sqrt_up(const Rational& q) {
  if (q <= 0) return 0;
  double s = std::sqrt(Interval::enclose(q).hi);
  return round_up(round_up(s) * (1 + 1e-12));
}

struct Constraint {
  const CompiledPoly* g = nullptr;
  std::size_t nvars = 0;
  double k_lo = 0;  // below the exact bound
  double k_hi = 0;  // above the exact bound
  std::vector<double> anchor;
  bool has_anchor = false;
};

struct BnbOutcome {
  double upper = -kInf;
  double inner = -kInf;
  std::vector<double> argmax;
  std::size_t nodes = 0;
};

// Early exits: the certified upper bound falls below a value, or an attained
// value reaches one.
struct StopRule {
  std::optional<double> upper_below;
  std::optional<double> inner_reaches;
};

class BranchAndBound {
 public:
  BranchAndBound(const CompiledPoly& f, bool negate, const IBox& root, Constraint* c, double eps, std::size_t budget,
                 std::mt19937_64& rng, StopRule stop)
      : f_(f), negate_(negate), root_(root), c_(c), eps_(eps), budget_(budget), rng_(rng), stop_(stop) {}

  BnbOutcome run() {
    seed_inner();
    push(root_);
    while (!heap_.empty()) {
      const Node& top = heap_.top();
      if (top.ub - out_.inner <= eps_ * std::max(1.0, std::fabs(out_.inner))) break;
      if (out_.nodes >= budget_) break;
      if (stop_.upper_below && top.ub < *stop_.upper_below) break;
      if (stop_.inner_reaches && out_.inner >= *stop_.inner_reaches) break;
      Node node = top;
      heap_.pop();
      std::size_t d = split_dimension(node);
      double m = node.box[d].mid();
      if (!(m > node.box[d].lo && m < node.box[d].hi)) {
        // Box cannot be refined further in double precision.
        leaves_ub_ = std::max(leaves_ub_, node.ub);
        continue;
      }
      IBox left = node.box, right = node.box;
      left[d].hi = m;
      right[d].lo = m;
      push(std::move(left));
      push(std::move(right));
    }
    // Restarting resets the step sizes, which unsticks the search on curved boundaries.
    for (int round = 0; round < 8 && !out_.argmax.empty(); ++round) {
      double before = out_.inner;
      local_search();
      if (!(out_.inner > before)) break;
    }
    out_.upper = std::max(leaves_ub_, heap_.empty() ? -kInf : heap_.top().ub);
    if (out_.upper < out_.inner) out_.upper = out_.inner;  // numerical noise in inner points
    return out_;
  }

 private:
  struct Node {
    IBox box;
    double ub;
    bool full;
    friend bool operator<(const Node& a, const Node& b) { return a.ub < b.ub; }
  };

  double value(std::span<const double> x) const { return negate_ ? -f_.value(x) : f_.value(x); }

  bool feasible(std::span<const double> x) const {
    return !c_ || c_->g->value(x.first(c_->nvars)) <= c_->k_lo;
  }

  // Moves an infeasible point onto the constraint boundary along the
  // segment towards the anchor.
  bool project(std::vector<double>& x) const {
    if (feasible(x)) return true;
    if (!c_ || !c_->has_anchor) return false;
    std::vector<double> y = x;
    double lo = 0, hi = 1;
    for (int it = 0; it < 60; ++it) {
      double t = 0.5 * (lo + hi);
      for (std::size_t i = 0; i < c_->nvars; ++i) y[i] = c_->anchor[i] + t * (x[i] - c_->anchor[i]);
      if (feasible(y)) lo = t;
      else hi = t;
    }
    for (std::size_t i = 0; i < c_->nvars; ++i) x[i] = c_->anchor[i] + lo * (x[i] - c_->anchor[i]);
    return feasible(x);
  }

  // Pushes a feasible point outward along the ray from the anchor up to the
  // constraint boundary or the root box, whichever comes first.
  std::vector<double> extend(const std::vector<double>& x) const {
    const std::size_t nv = c_->nvars;
    double tmax = kInf;
    for (std::size_t i = 0; i < nv; ++i) {
      double d = x[i] - c_->anchor[i];
      if (d > 0) tmax = std::min(tmax, (root_[i].hi - c_->anchor[i]) / d);
      else if (d < 0) tmax = std::min(tmax, (root_[i].lo - c_->anchor[i]) / d);
    }
    std::vector<double> y = x;
    if (!std::isfinite(tmax) || tmax <= 1) return y;
    auto at = [&](double t) {
      for (std::size_t i = 0; i < nv; ++i) y[i] = c_->anchor[i] + t * (x[i] - c_->anchor[i]);
    };
    double lo = 1, hi = tmax;
    at(hi);
    if (feasible(y)) return y;
    for (int it = 0; it < 60; ++it) {
      double t = 0.5 * (lo + hi);
      at(t);
      if (feasible(y)) lo = t;
      else hi = t;
    }
    at(lo);
    return y;
  }

  void consider(std::vector<double> x, bool polish) {
    if (!project(x)) return;
    double v = value(x);
    if (!(v > out_.inner)) return;
    out_.inner = v;
    out_.argmax = x;
    if (polish) local_search();
  }

  // Pattern search with projection from the current best point.
  void local_search() {
    std::vector<double> x = out_.argmax;
    double fx = out_.inner;
    std::vector<double> step(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) step[i] = 0.25 * root_[i].width();
    for (int iter = 0; iter < 400; ++iter) {
      bool moved = false;
      for (std::size_t i = 0; i < x.size(); ++i) {
        if (step[i] == 0) continue;
        for (double s : {step[i], -step[i]}) {
          std::vector<double> y = x;
          y[i] = std::clamp(y[i] + s, root_[i].lo, root_[i].hi);
          bool inside = feasible(y);
          if (!project(y)) continue;
          double fy = value(y);
          if (inside && c_ && c_->has_anchor) {
            std::vector<double> z = extend(y);
            double fz = value(z);
            if (fz > fy && feasible(z)) {
              y = std::move(z);
              fy = fz;
            }
          }
          if (fy > fx) {
            x = std::move(y);
            fx = fy;
            moved = true;
            break;
          }
        }
      }
      if (!moved) {
        bool any = false;
        for (std::size_t i = 0; i < x.size(); ++i) {
          step[i] *= 0.5;
          if (step[i] > 1e-12 * std::max(1.0, root_[i].width())) any = true;
        }
        if (!any) break;
      }
    }
    if (fx > out_.inner) {
      out_.inner = fx;
      out_.argmax = x;
    }
  }

  void seed_inner() {
    const std::size_t n = root_.size();
    std::vector<double> mid(n);
    for (std::size_t i = 0; i < n; ++i) mid[i] = root_[i].mid();
    consider(mid, false);
    std::vector<double> x(n);
    for (int s = 0; s < 64; ++s) {
      for (std::size_t i = 0; i < n; ++i) {
        std::uniform_real_distribution<double> u(root_[i].lo, root_[i].hi);
        x[i] = root_[i].width() > 0 ? u(rng_) : root_[i].lo;
      }
      consider(x, false);
    }
    if (!out_.argmax.empty()) local_search();
  }

  void push(IBox box) {
    ++out_.nodes;
    bool full = true;
    if (c_) {
      Interval g = c_->g->enclose(std::span<const Interval>(box).first(c_->nvars));
      if (g.lo > c_->k_hi) return;
      full = g.hi <= c_->k_lo;
    }
    Interval r = f_.enclose(box);
    double ub = negate_ ? -r.lo : r.hi;
    if (c_ && !full) ub = std::min(ub, lagrangian_bound(box));
    if (ub <= out_.inner) return;
    std::vector<double> mid(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) mid[i] = box[i].mid();
    double before = out_.inner;
    consider(mid, false);
    if (out_.inner > before + eps_ * std::max(1.0, std::fabs(before)) && out_.nodes % 16 == 0) local_search();
    heap_.push({std::move(box), ub, full});
  }

  // Weak duality on a box straddling the boundary: for mu >= 0 and feasible
  // x, f(x) <= f(x) - mu (g(x) - k). mu aligns the gradients at the centre;
  // the combination is enclosed by its mean-value form.
  double lagrangian_bound(const IBox& box) const {
    const std::size_t n = box.size(), nv = c_->nvars;
    IBox centre(n);
    for (std::size_t i = 0; i < n; ++i) centre[i] = Interval::point(box[i].mid());
    const std::span<const Interval> cs(centre), cs_state = cs.first(nv);
    const Interval sign = Interval::point(negate_ ? -1.0 : 1.0);
    double dot = 0, norm = 0;
    for (std::size_t i = 0; i < nv; ++i) {
      if (c_->g->independent_of(i)) continue;
      double gg = c_->g->gradient(i, cs_state).mid();
      double gf = f_.independent_of(i) ? 0.0 : f_.gradient(i, cs).mid();
      dot += (negate_ ? -gf : gf) * gg;
      norm += gg * gg;
    }
    if (!(norm > 0) || !(dot > 0) || !std::isfinite(dot / norm)) return kInf;
    const Interval mu = Interval::point(dot / norm);
    Interval h = sign * f_.natural(cs) - mu * (c_->g->natural(cs_state) - Interval::point(c_->k_hi));
    const std::span<const Interval> bs(box);
    for (std::size_t i = 0; i < n; ++i) {
      if (box[i].width() == 0) continue;
      Interval d = f_.independent_of(i) ? Interval::point(0) : sign * f_.gradient(i, bs);
      if (i < nv && !c_->g->independent_of(i)) d = d - mu * c_->g->gradient(i, bs.first(nv));
      h = h + d * (box[i] - centre[i]);
    }
    return h.hi;
  }

  // Smear heuristic on the objective, plus relative width while the box
  // straddles the constraint boundary.
  std::size_t split_dimension(const Node& node) const {
    const std::size_t n = node.box.size();
    std::vector<double> fs(n, 0), rel(n, 0);
    double fmax = 0, rmax = 0;
    for (std::size_t i = 0; i < n; ++i) {
      double w = node.box[i].width();
      if (w == 0) continue;
      if (!f_.independent_of(i)) fs[i] = w * f_.gradient(i, node.box).mag();
      rel[i] = w / root_[i].width();
      fmax = std::max(fmax, fs[i]);
      rmax = std::max(rmax, rel[i]);
    }
    const bool straddling = c_ && !node.full;
    std::size_t best = 0;
    double best_score = -1;
    for (std::size_t i = 0; i < n; ++i) {
      if (node.box[i].width() == 0) continue;
      double score = fmax > 0 ? fs[i] / fmax : 0;
      if (straddling || fmax == 0) score += rel[i] / rmax;
      if (score > best_score) {
        best_score = score;
        best = i;
      }
    }
    return best;
  }

  const CompiledPoly& f_;
  bool negate_;
  IBox root_;
  Constraint* c_;
  double eps_;
  std::size_t budget_;
  std::mt19937_64& rng_;
  StopRule stop_;
  std::priority_queue<Node> heap_;
  double leaves_ub_ = -kInf;
  BnbOutcome out_;
};

BnbOutcome maximize(const CompiledPoly& f, bool negate, const IBox& root, Constraint* c, double eps,
                    std::size_t budget, std::mt19937_64& rng, StopRule stop = {}) {
  return BranchAndBound(f, negate, root, c, eps, budget, rng, stop).run();
}

// Certified lower bound of the minimum of a homogeneous form over the
// boundary of the unit cube. Extra trailing symbols range over `tail`. With
// `sign_only`, any non-positive result is returned as soon as it is known.
double cube_boundary_min_lower(const CompiledPoly& f, std::size_t nvars, const IBox& tail, std::mt19937_64& rng,
                               bool sign_only = true) {
  double lower = kInf;
  for (std::size_t i = 0; i < nvars; ++i)
    for (double side : {-1.0, 1.0}) {
      IBox box(nvars, Interval{-1, 1});
      box[i] = Interval::point(side);
      box.insert(box.end(), tail.begin(), tail.end());
      StopRule stop;
      if (sign_only) stop.inner_reaches = 0.0;
      BnbOutcome r = maximize(f, true, box, nullptr, 1e-7, 200000, rng, stop);
      lower = std::min(lower, -r.upper);
      if (sign_only && !(lower > 0)) return lower;
    }
  return lower;
}

IBox param_box(const std::vector<ParamDecl>& params) {
  IBox box;
  for (const auto& p : params) box.push_back({Interval::enclose(p.lower).lo, Interval::enclose(p.upper).hi});
  return box;
}

Rational to_rational(double v) {
  if (!std::isfinite(v)) throw std::domain_error("non-finite optimization bound");
  return from_double(v);
}

// Constraint P <= k with an anchor: a feasible point of least P, used to
// project samples onto the boundary of the sublevel set.
Constraint make_constraint(const CompiledPoly& g, std::size_t nv, const Rational& k, const IBox& root,
                           std::uint64_t seed) {
  Interval kk = Interval::enclose(k);
  Constraint c{&g, nv, round_down(kk.lo), kk.hi, {}, false};
  std::vector<double> centre(nv);
  for (std::size_t i = 0; i < nv; ++i) centre[i] = root[i].mid();
  if (g.value(centre) <= c.k_lo) {
    c.anchor = centre;
    c.has_anchor = true;
    return c;
  }
  std::mt19937_64 rng(seed ^ 0xa5a5);
  IBox sbox(root.begin(), root.begin() + static_cast<std::ptrdiff_t>(nv));
  BnbOutcome r = maximize(g, true, sbox, nullptr, 1e-9, 20000, rng);
  if (!r.argmax.empty() && -r.inner <= c.k_lo) {
    c.anchor = r.argmax;
    c.has_anchor = true;
  }
  return c;
}

}  // namespace

bool certified_coercive(const Polynomial& p) {
  const int d = p.total_degree();
  if (d <= 0 || d % 2 == 1) return false;
  std::mt19937_64 rng(7);
  return cube_boundary_min_lower(CompiledPoly(p.homogeneous_part(d, 0, p.arity())), p.arity(), {}, rng) > 0;
}

IBox sublevel_box(const Polynomial& p, const Rational& k) {
  const std::size_t n = p.arity();
  const int d = p.total_degree();
  if (d <= 0) throw Error(ErrorKind::UnboundedSublevel, "constant polynomial has no bounded sublevel set");
  if (d == 2) {
    Quadratic q = quadratic_form(p);
    if (positive_definite(q.h)) {
      std::vector<std::vector<Rational>> hinv(n, std::vector<Rational>(n));
      for (std::size_t j = 0; j < n; ++j) {
        std::vector<Rational> e(n);
        e[j] = 1;
        auto col = solve_unique(q.h, e);
        for (std::size_t i = 0; i < n; ++i) hinv[i][j] = (*col)[i];
      }
      std::vector<Rational> x0(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) x0[i] -= hinv[i][j] * q.b[j] / 2;
      Rational m = p.evaluate(x0);
      if (k < m) throw Error(ErrorKind::Precondition, "sublevel set is empty");
      IBox box(n);
      for (std::size_t i = 0; i < n; ++i) {
        double half = sqrt_up((k - m) * hinv[i][i]);
        Interval c = Interval::enclose(x0[i]);
        box[i] = {round_down(c.lo - half), round_up(c.hi + half)};
      }
      return box;
    }
  }
  if (d % 2 == 1)
    throw Error(ErrorKind::UnboundedSublevel, "odd-degree polynomial is not coercive");
  Polynomial top = p.homogeneous_part(d, 0, n);
  std::mt19937_64 rng(7);
  double alpha = cube_boundary_min_lower(CompiledPoly(top), n, {}, rng);
  if (!(alpha > 0))
    throw Error(ErrorKind::UnboundedSublevel, "leading form is not positive definite; no bounding box for the sublevel set");
  // |lower-degree part| <= sum_j L_j r^j with r = |x|_inf, so P(x) > k once
  // h(r) = alpha r^d - sum_j L_j r^j - k > 0. h has one sign change in its
  // coefficients, hence a single positive root beyond which it stays positive.
  std::vector<double> mass(static_cast<std::size_t>(d), 0);
  for (const auto& [e, c] : p.terms()) {
    unsigned deg = 0;
    for (unsigned x : e) deg += x;
    if (static_cast<int>(deg) < d) mass[deg] = round_up(mass[deg] + Interval::enclose(abs(c)).hi);
  }
  const Interval kk = Interval::enclose(k);
  auto h = [&](double r) {
    Interval ri = Interval::point(r);
    Interval v = Interval{alpha, alpha} * pow(ri, static_cast<unsigned>(d)) - kk;
    for (std::size_t j = 0; j < mass.size(); ++j) v = v - Interval{mass[j], mass[j]} * pow(ri, static_cast<unsigned>(j));
    return v;
  };
  double hi = 1;
  while (!(h(hi).lo > 0)) hi *= 2;
  double lo = 0;
  for (int it = 0; it < 100; ++it) {
    double mid = 0.5 * (lo + hi);
    if (h(mid).lo > 0) hi = mid;
    else lo = mid;
  }
  double radius = hi;
  IBox cube(n, Interval{-radius, radius});
  // The cube is usually loose; shrink each side by maximizing +-x_i over
  // the sublevel set inside it.
  CompiledPoly g(p);
  Constraint c = make_constraint(g, n, k, cube, 17);
  if (!c.has_anchor) return cube;
  IBox box = cube;
  for (std::size_t i = 0; i < n; ++i) {
    CompiledPoly xi(Polynomial::symbol(n, i));
    BnbOutcome up = maximize(xi, false, cube, &c, 1e-6, 20000, rng);
    BnbOutcome down = maximize(xi, true, cube, &c, 1e-6, 20000, rng);
    box[i] = {std::max(cube[i].lo, round_down(-down.upper)), std::min(cube[i].hi, round_up(up.upper))};
  }
  return box;
}

namespace {

// Keeps the state coordinates that P or Q mention; if Q ignores the state
// altogether, only the parameters remain. Extrema are unchanged because the
// dropped coordinates are unconstrained and absent from the objective.
struct Projection {
  std::size_t nvars = 0;
  Polynomial objective, sublevel;
  bool constrained = true;
};

Projection project(const OptProblem& prob) {
  const std::size_t nv = prob.nvars, np = prob.params.size();
  std::vector<bool> in_p(nv), in_q(nv);
  for (const auto& [e, c] : prob.sublevel.terms())
    for (std::size_t i = 0; i < nv; ++i) in_p[i] = in_p[i] || e[i] > 0;
  for (const auto& [e, c] : prob.objective.terms())
    for (std::size_t i = 0; i < nv; ++i) in_q[i] = in_q[i] || e[i] > 0;
  const bool q_stateless = std::none_of(in_q.begin(), in_q.end(), [](bool b) { return b; });
  std::vector<std::size_t> map(nv, nv + np);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < nv; ++i)
    if (!q_stateless && (in_p[i] || in_q[i])) map[i] = kept++;
  Projection out;
  out.nvars = kept;
  out.constrained = !q_stateless;
  std::vector<std::size_t> qmap = map;
  for (std::size_t j = 0; j < np; ++j) qmap.push_back(kept + j);
  out.objective = prob.objective.relabel(kept + np, qmap);
  if (out.constrained) out.sublevel = prob.sublevel.relabel(kept, map);
  return out;
}

}  // namespace

OptResult min_oracle(const OptProblem& prob, const OptOptions& opts) {
  const std::size_t nv0 = prob.nvars;
  if (prob.sublevel.arity() != nv0 || prob.objective.arity() != nv0 + prob.params.size())
    throw Error(ErrorKind::DimensionMismatch, "optimization problem arities disagree");
  for (const auto& p : prob.params)
    if (p.lower > p.upper) throw Error(ErrorKind::Precondition, "empty parameter interval for " + p.name);

  Projection proj;
  if (prob.state_box) {
    proj.nvars = nv0;
    proj.objective = prob.objective;
    proj.sublevel = prob.sublevel;
  } else {
    proj = project(prob);
  }
  const std::size_t nv = proj.nvars;
  IBox root;
  if (prob.state_box) {
    for (const auto& r : *prob.state_box) root.push_back({Interval::enclose(r.lower).lo, Interval::enclose(r.upper).hi});
  } else if (proj.constrained) {
    root = sublevel_box(proj.sublevel, prob.k);
  }
  IBox pbox = param_box(prob.params);
  root.insert(root.end(), pbox.begin(), pbox.end());
  if (proj.objective.is_constant()) {
    OptResult res;
    res.max_upper = res.max_inner = res.min_lower = res.min_inner = proj.objective.constant_term();
    res.certificate = "constant";
    res.tolerance = opts.eps_opt;
    return res;
  }

  CompiledPoly f(proj.objective);
  CompiledPoly g(proj.constrained ? proj.sublevel : Polynomial(0));
  Constraint c = make_constraint(g, nv, prob.k, root, opts.seed);
  Constraint* cp = proj.constrained ? &c : nullptr;

  const double eps = opts.eps_opt;
  std::mt19937_64 rng(opts.seed);
  BnbOutcome hi = maximize(f, false, root, cp, eps, opts.node_budget, rng, {opts.max_threshold, opts.max_threshold});
  std::optional<double> lo_threshold;
  if (opts.min_threshold) lo_threshold = -*opts.min_threshold;
  BnbOutcome lo = maximize(f, true, root, cp, eps, opts.node_budget, rng, {lo_threshold, lo_threshold});
  if (hi.argmax.empty() || lo.argmax.empty())
    throw Error(ErrorKind::Precondition, "no feasible point found in the sublevel set");

  OptResult res;
  res.max_upper = to_rational(hi.upper);
  res.max_inner = to_rational(hi.inner);
  res.min_lower = -to_rational(lo.upper);
  res.min_inner = -to_rational(lo.inner);
  res.certificate = "interval-bnb";
  res.tolerance = eps;
  auto gap = [](const BnbOutcome& o) { return (o.upper - o.inner) / std::max(1.0, std::fabs(o.inner)); };
  res.achieved_gap = std::max(gap(hi), gap(lo));
  res.nodes = hi.nodes + lo.nodes;
  return res;
}

PrecheckReport degree_precheck(const Polynomial& p, const Polynomial& q, std::size_t nvars, const Rational& lambda,
                               const std::vector<ParamDecl>& params) {
  PrecheckReport rep;
  rep.slack = 1 - abs(lambda);
  rep.degree_p = p.degree_in(0, nvars);
  if (rep.degree_p <= 0) throw Error(ErrorKind::Precondition, "precheck needs a nonconstant polynomial");
  if (q.is_zero()) {
    rep.pass = true;
    rep.degree_q = -1;
    rep.message = "zero noise";
    return rep;
  }
  rep.degree_q = q.degree_in(0, nvars);
  if (rep.degree_q < rep.degree_p) {
    rep.pass = true;
    rep.ratio = 0;
    rep.message = "objective degree " + std::to_string(rep.degree_q) + " below invariant degree " +
                  std::to_string(rep.degree_p) + "; ratio limit is 0";
    return rep;
  }
  if (rep.degree_q > rep.degree_p) {
    rep.message = "objective degree " + std::to_string(rep.degree_q) + " exceeds invariant degree " +
                  std::to_string(rep.degree_p);
    return rep;
  }
  if (rep.slack <= 0) {
    rep.message = "no slack: |lambda| >= 1";
    return rep;
  }
  const std::size_t np = params.size();
  Polynomial p_top = p.homogeneous_part(rep.degree_p, 0, nvars);
  Polynomial q_top = q.homogeneous_part(rep.degree_p, 0, nvars);
  std::vector<std::size_t> widen(nvars);
  for (std::size_t i = 0; i < nvars; ++i) widen[i] = i;
  Polynomial p_ext = p_top.relabel(nvars + np, widen);
  IBox pbox = param_box(params);
  std::mt19937_64 rng(11);
  double alpha = cube_boundary_min_lower(CompiledPoly(p_top), nvars, {}, rng);
  if (!(alpha > 0)) {
    rep.message = "leading form of the invariant is not positive definite";
    return rep;
  }
  // sup |Q_top / P_top| < s  iff  max(+-Q_top - s P_top) < 0 on the cube boundary.
  auto below = [&](const Rational& s) {
    for (int sign : {1, -1}) {
      Polynomial h = Rational(-sign) * q_top + s * p_ext;
      if (!(cube_boundary_min_lower(CompiledPoly(h), nvars, pbox, rng) > 0)) return false;
    }
    return true;
  };
  rep.pass = below(rep.slack);
  // Ratio report: bisect for a certified upper bound on the ratio.
  double qmax = 0;
  for (int sign : {1, -1}) {
    double m = cube_boundary_min_lower(CompiledPoly(Rational(-sign) * q_top), nvars, pbox, rng, false);
    qmax = std::max(qmax, -m);
  }
  Rational lo = 0, hi = to_rational(round_up(round_up(qmax / alpha) * (1 + 1e-9)) + 1e-12);
  for (int it = 0; it < 24; ++it) {
    Rational mid = (lo + hi) / 2;
    if (below(mid)) hi = mid;
    else lo = mid;
  }
  rep.ratio = hi.get_d();
  rep.message = "leading-form ratio bound " + to_decimal_string(hi, 6, 1) + (rep.pass ? " < " : " >= ") +
                "slack " + to_decimal_string(rep.slack, 6, 0);
  return rep;
}

DichotomyStep test_bound(const Rational& lambda, const Polynomial& p, const Polynomial& q, std::size_t nvars,
                         const std::vector<ParamDecl>& params, const Rational& k, double eps_opt) {
  DichotomyStep step;
  step.k = k;
  const Rational slack = 1 - abs(lambda);
  if (k <= 0 || slack <= 0) return step;
  // The invariant is |P| <= k; for odd degree that is the set P^2 <= k^2.
  const bool odd = p.total_degree() % 2 == 1;
  OptProblem prob{nvars, q, odd ? p * p : p, odd ? k * k : k, params, std::nullopt};
  OptResult r;
  try {
    // Refinement stops as soon as the acceptance test is decided.
    OptOptions opts;
    opts.eps_opt = eps_opt;
    const double t = Interval::enclose(slack * k).lo;
    opts.max_threshold = round_down(t);
    opts.min_threshold = -round_down(t);
    r = min_oracle(prob, opts);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Precondition) return step;
    throw;
  }
  step.min_lower = r.min_lower;
  step.max_upper = r.max_upper;
  step.accepted = r.min_lower > -slack * k && r.max_upper < slack * k;
  return step;
}

DichotomyResult dichotomy_search(const Rational& lambda, const Polynomial& p, const Polynomial& q, std::size_t nvars,
                                 const std::vector<ParamDecl>& params, const std::optional<Rational>& init_floor,
                                 const DichotomyConfig& cfg) {
  if (cfg.iterations < 1) throw Error(ErrorKind::Precondition, "dichotomy needs at least one iteration");
  if (abs(lambda) >= 1) throw Error(ErrorKind::Precondition, "dichotomy needs |lambda| < 1");
  DichotomyResult res;
  Rational low = cfg.low_k;
  if (init_floor) {
    DichotomyStep s = test_bound(lambda, p, q, nvars, params, *init_floor, cfg.eps_opt);
    s.phase = "init";
    res.trace.push_back(s);
    if (s.accepted) {
      res.k = *init_floor;
      return res;
    }
    low = std::max(low, *init_floor);
  }
  Rational up = cfg.k_init;
  if (up <= low) up = low > 0 ? 2 * low : Rational(1);
  Rational k = up;
  for (int i = 0; i < cfg.iterations; ++i) {
    DichotomyStep s = test_bound(lambda, p, q, nvars, params, k, cfg.eps_opt);
    s.phase = res.k ? "bisect" : "expand";
    res.trace.push_back(s);
    if (s.accepted) {
      up = k;
      if (!res.k || k < *res.k) res.k = k;
      k = (low + up) / 2;
    } else {
      low = k;
      if (res.k) {
        k = (low + up) / 2;
      } else {
        up = 2 * k;
        k = up;
      }
    }
  }
  if (!res.k)
    throw Error(ErrorKind::NoInductiveBound,
                "no inductive bound accepted within " + std::to_string(cfg.iterations) + " iterations");
  return res;
}

BoxRange polynomial_box_range(const Polynomial& p, const std::vector<RationalRange>& box) {
  const std::size_t n = p.arity();
  if (box.size() != n) throw Error(ErrorKind::DimensionMismatch, "box dimension does not match the polynomial");
  BoxRange out;
  if (p.total_degree() <= 2 && n <= 10) {
    Quadratic q = quadratic_form(p);
    std::vector<int> choice(n, 0);  // 0 = lower, 1 = upper, 2 = free
    bool first = true;
    auto record = [&](const std::vector<Rational>& x) {
      Rational v = p.evaluate(x);
      if (first || v < out.min) out.min = v;
      if (first || v > out.max) out.max = v;
      first = false;
    };
    while (true) {
      bool skip = false;
      for (std::size_t i = 0; i < n; ++i)
        if (choice[i] != 0 && box[i].lower == box[i].upper) skip = true;
      if (!skip) {
        std::vector<Rational> x(n);
        std::vector<std::size_t> free;
        for (std::size_t i = 0; i < n; ++i) {
          if (choice[i] == 2) free.push_back(i);
          else x[i] = choice[i] == 0 ? box[i].lower : box[i].upper;
        }
        if (free.empty()) {
          record(x);
        } else {
          std::vector<std::vector<Rational>> a(free.size(), std::vector<Rational>(free.size()));
          std::vector<Rational> r(free.size());
          for (std::size_t u = 0; u < free.size(); ++u) {
            std::size_t i = free[u];
            r[u] = -q.b[i];
            for (std::size_t j = 0; j < n; ++j)
              if (choice[j] != 2) r[u] -= 2 * q.h[i][j] * x[j];
            for (std::size_t v = 0; v < free.size(); ++v) a[u][v] = 2 * q.h[i][free[v]];
          }
          if (auto sol = solve_unique(a, r)) {
            bool inside = true;
            for (std::size_t u = 0; u < free.size(); ++u) {
              const Rational& s = (*sol)[u];
              if (s < box[free[u]].lower || s > box[free[u]].upper) inside = false;
              x[free[u]] = s;
            }
            if (inside) record(x);
          }
        }
      }
      std::size_t i = 0;
      while (i < n && choice[i] == 2) choice[i++] = 0;
      if (i == n) break;
      ++choice[i];
    }
    if (n == 0) record({});
    out.exact = true;
    return out;
  }
  IBox root;
  for (const auto& r : box) root.push_back({Interval::enclose(r.lower).lo, Interval::enclose(r.upper).hi});
  CompiledPoly f(p);
  std::mt19937_64 rng(3);
  BnbOutcome hi = maximize(f, false, root, nullptr, 1e-9, 200000, rng);
  BnbOutcome lo = maximize(f, true, root, nullptr, 1e-9, 200000, rng);
  out.max = to_rational(hi.upper);
  out.min = -to_rational(lo.upper);
  out.exact = false;
  return out;
}

}  // namespace pilat
