#include "mtm/balance.hpp"

#include <charconv>
#include <ostream>
#include <stdexcept>

#include <Eigen/LU>

namespace mtm {
namespace {

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

/// Point type is a state index; densities are table lookups.
struct DiscreteMove {
  using Point = std::size_t;
  const DiscreteKernelSpec* spec;
  Vector log_pi;
  std::vector<Matrix> log_T;

  DiscreteMove(const DiscreteKernelSpec& s, std::size_t M) : spec(&s) {
    log_pi = s.target_probs.array().log();
    for (std::size_t m = 0; m < M; ++m) log_T.push_back(s.proposal(m).array().log().matrix());
  }

  Point draw(std::size_t, const Point&, Rng&) const {
    throw std::logic_error("discrete moves are enumerated, not sampled");
  }
  double log_target(const Point& p) const { return log_pi[static_cast<Eigen::Index>(p)]; }
  double log_proposal(std::size_t m, const Point& from, const Point& to) const {
    return log_T[m](static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to));
  }
  std::span<const double> coords(const Point& p) const {
    const auto& v = spec->states[p];
    return {v.data(), static_cast<std::size_t>(v.size())};
  }
};

/// Advances a base-n counter; returns false after the last tuple.
bool next_tuple(std::vector<std::size_t>& digits, std::size_t n) {
  for (auto& d : digits) {
    if (++d < n) return true;
    d = 0;
  }
  return false;
}

void check_enumeration_bounds(const DiscreteKernelSpec& spec, std::size_t M) {
  if (M == 0) throw ConfigError("enumeration: M must be at least 1");
  if (spec.size() > 12 || M > 3) {
    throw ConfigError("enumeration is limited to 12 states and M <= 3");
  }
  if (spec.proposal_probs.size() != 1 && spec.proposal_probs.size() < M) {
    throw ConfigError("enumeration: fewer proposal matrices than candidates");
  }
}

void check_shapes(const DiscreteKernelSpec& spec) {
  const auto n = static_cast<Eigen::Index>(spec.size());
  if (n == 0) throw ConfigError("discrete kernel: no states");
  if (spec.target_probs.size() != n) throw ConfigError("discrete kernel: pi has wrong length");
  if (spec.proposal_probs.empty()) throw ConfigError("discrete kernel: no proposal matrices");
  for (const auto& T : spec.proposal_probs) {
    if (T.rows() != n || T.cols() != n) throw ConfigError("discrete kernel: T has wrong shape");
  }
}

struct MtmLayout {
  std::size_t d;
  std::size_t M;
  std::size_t x() const { return 0; }
  std::size_t y(std::size_t m) const { return d + m * d; }
  std::size_t j() const { return d + M * d; }
  /// Slot of x*_m for m != J.
  std::size_t reverse(std::size_t m, std::size_t J) const {
    return j() + 1 + (m < J ? m : m - 1) * d;
  }
  std::size_t size() const { return d + M * d + 1 + (M - 1) * d; }
};

}  // namespace

// ---------------------------------------------------------------- spec and report

std::size_t ExtendedSpaceSpec::size() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.size;
  return n;
}

std::vector<std::size_t> ExtendedSpaceSpec::continuous_indices() const {
  std::vector<std::size_t> out;
  std::size_t k = 0;
  for (const auto& b : blocks) {
    for (std::size_t i = 0; i < b.size; ++i, ++k) {
      if (b.continuous) out.push_back(k);
    }
  }
  return out;
}

const std::string& ExtendedSpaceSpec::role_of(std::size_t k) const {
  for (const auto& b : blocks) {
    if (k < b.size) return b.role;
    k -= b.size;
  }
  throw std::out_of_range("extended point index out of range");
}

bool VerificationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

void write_report_text(std::ostream& out, const VerificationReport& report) {
  std::size_t failed = 0;
  for (const auto& c : report.checks) {
    out << (c.passed ? "PASS " : "FAIL ") << c.check << "  max_violation=" << format_double(c.max_violation);
    if (!c.detail.empty()) out << "  (" << c.detail << ')';
    out << '\n';
    failed += c.passed ? 0 : 1;
  }
  out << report.checks.size() - failed << '/' << report.checks.size() << " checks passed\n";
}

void write_report_csv(std::ostream& out, const VerificationReport& report) {
  out << "check,max_violation,passed\n";
  for (const auto& c : report.checks) {
    out << c.check << ',' << format_double(c.max_violation) << ',' << (c.passed ? "true" : "false")
        << '\n';
  }
}

// ---------------------------------------------------------------- continuous checks

CheckResult check_involution(const ExtendedSpaceSpec& spec, std::span<const Vector> samples,
                             double tolerance) {
  CheckResult r{"involution", 0.0, true, {}};
  std::size_t worst = 0;
  for (const auto& p : samples) {
    const Vector back = spec.involution(spec.involution(p));
    if (back.size() != p.size()) {
      r.passed = false;
      r.max_violation = kInf;
      r.detail = "g(g(x)) changed the point's length";
      return r;
    }
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      const double v = std::abs(back[k] - p[k]);
      if (!(v <= r.max_violation)) {
        r.max_violation = std::isnan(v) ? kInf : v;
        worst = static_cast<std::size_t>(k);
      }
    }
  }
  r.passed = r.max_violation <= tolerance;
  if (!r.passed) r.detail = "worst block: " + spec.role_of(worst);
  return r;
}

double jacobian_log_abs(const ExtendedSpaceSpec& spec, const Vector& point) {
  const auto idx = spec.continuous_indices();
  const auto n = static_cast<Eigen::Index>(idx.size());
  if (n == 0) return 0.0;
  Matrix jac(n, n);
  for (Eigen::Index b = 0; b < n; ++b) {
    const auto k = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(b)]);
    const double h = 1e-5 * std::max(1.0, std::abs(point[k]));
    Vector plus = point;
    Vector minus = point;
    plus[k] += h;
    minus[k] -= h;
    // Divide by the step actually taken so exact permutations give exact ones.
    const double step = plus[k] - minus[k];
    const Vector gp = spec.involution(plus);
    const Vector gm = spec.involution(minus);
    for (Eigen::Index a = 0; a < n; ++a) {
      const auto i = static_cast<Eigen::Index>(idx[static_cast<std::size_t>(a)]);
      jac(a, b) = (gp[i] - gm[i]) / step;
    }
  }
  Eigen::FullPivLU<Matrix> lu(jac);
  if (!lu.isInvertible()) throw DegenerateTransformError("involution Jacobian is singular");
  const double log_abs = lu.matrixLU().diagonal().array().abs().log().sum();
  if (!std::isfinite(log_abs)) throw DegenerateTransformError("involution Jacobian is singular");
  return log_abs;
}

double acceptance_log_ratio_from_spec(const ExtendedSpaceSpec& spec, const Vector& point) {
  const double here = spec.log_joint(point);
  const double there = spec.log_joint(spec.involution(point));
  if (here == kNegInf && there == kNegInf) {
    throw UndefinedRatioError("extended density is zero at the point and its image");
  }
  if (there == kNegInf) return kNegInf;
  if (here == kNegInf) return kInf;
  return there - here + jacobian_log_abs(spec, point);
}

double acceptance_from_spec(const ExtendedSpaceSpec& spec, const Vector& point) {
  const double r = acceptance_log_ratio_from_spec(spec, point);
  return r >= 0.0 ? 1.0 : std::exp(r);
}

ExtendedSpaceSpec mh_extended_spec(std::shared_ptr<const Target> target,
                                   std::shared_ptr<const Proposal> proposal) {
  const std::size_t d = target->dim();
  ExtendedSpaceSpec spec;
  spec.blocks = {{"x", d, true}, {"y", d, true}};
  const auto D = static_cast<Eigen::Index>(d);
  spec.log_joint = [target, proposal, D](const Vector& p) {
    const Vector x = p.head(D);
    const Vector y = p.tail(D);
    const double lp = target->log_density(x);
    if (lp == kNegInf) return kNegInf;
    return lp + proposal->log_density(0, x, y);
  };
  spec.involution = [D](const Vector& p) {
    Vector out(p.size());
    out.head(D) = p.tail(D);
    out.tail(D) = p.head(D);
    return out;
  };
  return spec;
}

ExtendedSpaceSpec mtm_extended_spec(std::shared_ptr<const Target> target,
                                    std::shared_ptr<const Proposal> proposal, WeightSpec weight) {
  const MtmLayout L{target->dim(), proposal->size()};
  if (L.M < 1) throw ConfigError("mtm spec: M must be at least 1");
  ExtendedSpaceSpec spec;
  spec.blocks.push_back({"x", L.d, true});
  for (std::size_t m = 0; m < L.M; ++m) spec.blocks.push_back({"y" + std::to_string(m + 1), L.d, true});
  spec.blocks.push_back({"J", 1, false});
  for (std::size_t k = 0; k + 1 < L.M; ++k) {
    spec.blocks.push_back({"x*" + std::to_string(k + 1), L.d, true});
  }
  const auto D = static_cast<Eigen::Index>(L.d);
  const auto block = [D](const Vector& p, std::size_t start) -> Vector {
    return p.segment(static_cast<Eigen::Index>(start), D);
  };

  spec.log_joint = [target, proposal, weight, L, block](const Vector& p) {
    const double j = p[static_cast<Eigen::Index>(L.j())];
    if (!(j >= 0.0 && j < static_cast<double>(L.M))) return kNegInf;
    const auto J = static_cast<std::size_t>(j);
    const Vector x = block(p, L.x());
    const FullMove move{target.get(), proposal.get()};
    const double lpx = move.log_target(x);
    if (lpx == kNegInf) return kNegInf;
    double total = lpx;
    std::vector<double> w(L.M);
    for (std::size_t m = 0; m < L.M; ++m) {
      const Vector y = block(p, L.y(m));
      const double lty = move.log_proposal(m, x, y);
      total += lty;
      w[m] = log_weight(weight, move.coords(y), move.coords(x), move.log_target(y), lty,
                        move.log_proposal(m, y, x));
    }
    const double norm = log_sum_exp(w);
    if (norm == kNegInf) return kNegInf;
    total += w[J] - norm;
    const Vector yJ = block(p, L.y(J));
    for (std::size_t m = 0; m < L.M; ++m) {
      if (m != J) total += move.log_proposal(m, yJ, block(p, L.reverse(m, J)));
    }
    return total;
  };

  spec.involution = [L, D](const Vector& p) {
    const auto J = static_cast<std::size_t>(p[static_cast<Eigen::Index>(L.j())]);
    const auto seg = [D](std::size_t start) { return static_cast<Eigen::Index>(start); };
    Vector out = p;
    out.segment(seg(L.x()), D) = p.segment(seg(L.y(J)), D);
    out.segment(seg(L.y(J)), D) = p.segment(seg(L.x()), D);
    for (std::size_t m = 0; m < L.M; ++m) {
      if (m == J) continue;
      out.segment(seg(L.y(m)), D) = p.segment(seg(L.reverse(m, J)), D);
      out.segment(seg(L.reverse(m, J)), D) = p.segment(seg(L.y(m)), D);
    }
    return out;
  };
  return spec;
}

Vector sample_mtm_extended_point(const Target& target, const Proposal& proposal,
                                 const WeightSpec& weight, const Vector& x, Rng& rng) {
  const MtmLayout L{target.dim(), proposal.size()};
  const FullMove move{&target, &proposal};
  Trial<Vector> trial;
  const auto outcome = mtm_transition(move, weight, false, L.M, x, move.log_target(x), rng, trial);
  if (outcome.zero_weight) return {};
  const auto D = static_cast<Eigen::Index>(L.d);
  Vector p(static_cast<Eigen::Index>(L.size()));
  p.segment(0, D) = x;
  for (std::size_t m = 0; m < L.M; ++m) {
    p.segment(static_cast<Eigen::Index>(L.y(m)), D) = trial.candidates[m];
  }
  p[static_cast<Eigen::Index>(L.j())] = static_cast<double>(trial.selected);
  for (std::size_t m = 0; m < L.M; ++m) {
    if (m == trial.selected) continue;
    p.segment(static_cast<Eigen::Index>(L.reverse(m, trial.selected)), D) = trial.reverse[m];
  }
  return p;
}

ExtendedSpaceSpec reciprocal_extended_spec(double c) {
  if (!(c > 0.0)) throw ConfigError("reciprocal spec: c must be positive");
  ExtendedSpaceSpec spec;
  spec.blocks = {{"x", 1, true}};
  spec.log_joint = [](const Vector& p) { return p[0] > 0.0 ? -p[0] : kNegInf; };
  spec.involution = [c](const Vector& p) {
    Vector out(1);
    out[0] = c / p[0];
    return out;
  };
  return spec;
}

// ---------------------------------------------------------------- discrete kernels

bool DiscreteKernelSpec::symmetric() const {
  return std::all_of(proposal_probs.begin(), proposal_probs.end(),
                     [](const Matrix& T) { return (T - T.transpose()).cwiseAbs().maxCoeff() <= 1e-15; });
}

void DiscreteKernelSpec::validate() const {
  check_shapes(*this);
  if ((target_probs.array() < 0.0).any() || std::abs(target_probs.sum() - 1.0) > 1e-12) {
    throw ConfigError("discrete kernel: pi is not a probability vector");
  }
  for (const auto& T : proposal_probs) {
    if ((T.array() < 0.0).any()) throw ConfigError("discrete kernel: negative proposal entry");
    if (((T.rowwise().sum().array() - 1.0).abs() > 1e-12).any()) {
      throw ConfigError("discrete kernel: proposal rows do not sum to 1");
    }
  }
}

DiscreteKernelSpec line_walk_spec(const Vector& target_probs) {
  constexpr Eigen::Index n = 5;
  DiscreteKernelSpec spec;
  for (Eigen::Index i = 0; i < n; ++i) spec.states.push_back(Vector::Constant(1, static_cast<double>(i)));
  spec.target_probs = target_probs;
  Matrix T = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    T(i, i > 0 ? i - 1 : i) += 0.5;
    T(i, i + 1 < n ? i + 1 : i) += 0.5;
  }
  spec.proposal_probs = {T};
  spec.validate();
  return spec;
}

Matrix enumerate_mtm_transition_matrix(const DiscreteKernelSpec& spec, std::size_t M,
                                       const WeightSpec& weight, AcceptancePath path) {
  spec.validate();
  check_enumeration_bounds(spec, M);
  const std::size_t n = spec.size();
  const bool restricted =
      path == AcceptancePath::kRestrictedAuto && is_restricted_form(weight, spec.symmetric());
  const DiscreteMove move(spec, M);
  Matrix P = Matrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));

  Trial<std::size_t> trial;
  std::vector<std::size_t> ys(M, 0);
  std::vector<std::size_t> rev(M > 1 ? M - 1 : 0, 0);
  for (std::size_t x = 0; x < n; ++x) {
    const auto xi = static_cast<Eigen::Index>(x);
    const double log_pi_x = move.log_target(x);
    std::fill(ys.begin(), ys.end(), 0);
    do {
      double p_candidates = 1.0;
      for (std::size_t m = 0; m < M; ++m) {
        p_candidates *= spec.proposal(m)(xi, static_cast<Eigen::Index>(ys[m]));
      }
      if (p_candidates == 0.0) continue;
      trial.candidates = ys;
      detail::forward_weights(move, weight, x, trial);
      const double norm = log_sum_exp(trial.forward_log_weights);
      if (norm == kNegInf) {
        P(xi, xi) += p_candidates;
        continue;
      }
      for (std::size_t J = 0; J < M; ++J) {
        const double p_select = std::exp(trial.forward_log_weights[J] - norm);
        if (p_select == 0.0) continue;
        trial.selected = J;
        const std::size_t yJ = ys[J];
        const auto yi = static_cast<Eigen::Index>(yJ);
        std::fill(rev.begin(), rev.end(), 0);
        do {
          trial.reverse.assign(M, x);
          double p_reverse = 1.0;
          for (std::size_t m = 0, k = 0; m < M; ++m) {
            if (m == J) continue;
            trial.reverse[m] = rev[k++];
            p_reverse *= spec.proposal(m)(yi, static_cast<Eigen::Index>(trial.reverse[m]));
          }
          if (p_reverse == 0.0) continue;
          detail::backward_weights_and_ratios(move, weight, x, log_pi_x, trial);
          const double ratio = restricted ? trial.log_ratio_restricted : trial.log_ratio_general;
          const double a = ratio >= 0.0 ? 1.0 : std::exp(ratio);
          const double mass = p_candidates * p_select * p_reverse;
          P(xi, yi) += mass * a;
          P(xi, xi) += mass * (1.0 - a);
        } while (next_tuple(rev, n));
      }
    } while (next_tuple(ys, n));
  }
  return P;
}

CheckResult check_detailed_balance(const Matrix& P, const Vector& pi, double tolerance) {
  if (P.rows() != P.cols() || P.rows() != pi.size()) {
    throw std::invalid_argument("check_detailed_balance: shape mismatch");
  }
  CheckResult r{"detailed-balance", 0.0, true, {}};
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < P.cols(); ++j) {
      const double v = std::abs(pi[i] * P(i, j) - pi[j] * P(j, i));
      if (!(v <= r.max_violation)) {
        r.max_violation = std::isnan(v) ? kInf : v;
        r.detail = "worst pair (" + std::to_string(i) + ", " + std::to_string(j) + ")";
      }
    }
  }
  r.passed = r.max_violation < tolerance;
  if (r.passed) r.detail.clear();
  return r;
}

CheckResult check_stationarity(const Matrix& P, const Vector& pi, double tolerance) {
  if (P.rows() != P.cols() || P.rows() != pi.size()) {
    throw std::invalid_argument("check_stationarity: shape mismatch");
  }
  const Vector diff = (pi.transpose() * P).transpose() - pi;
  CheckResult r{"stationarity", diff.cwiseAbs().maxCoeff(), true, {}};
  if (std::isnan(r.max_violation)) r.max_violation = kInf;
  r.passed = r.max_violation < tolerance;
  return r;
}

CheckResult check_row_sums(const Matrix& P, double tolerance) {
  const double v = (P.rowwise().sum().array() - 1.0).abs().maxCoeff();
  CheckResult r{"row-sums", std::isnan(v) ? kInf : v, true, {}};
  r.passed = r.max_violation < tolerance;
  return r;
}

CheckResult check_marginality(const DiscreteKernelSpec& spec, std::size_t M,
                              const WeightSpec& weight, double tolerance) {
  check_shapes(spec);
  check_enumeration_bounds(spec, M);
  const std::size_t n = spec.size();
  const DiscreteMove move(spec, M);
  CheckResult r{"marginality", 0.0, true, {}};
  Trial<std::size_t> trial;
  std::vector<std::size_t> ys(M, 0);
  std::vector<std::size_t> rev(M > 1 ? M - 1 : 0, 0);
  for (std::size_t x = 0; x < n; ++x) {
    const auto xi = static_cast<Eigen::Index>(x);
    double total = 0.0;
    std::fill(ys.begin(), ys.end(), 0);
    do {
      double p_candidates = 1.0;
      for (std::size_t m = 0; m < M; ++m) {
        p_candidates *= spec.proposal(m)(xi, static_cast<Eigen::Index>(ys[m]));
      }
      if (p_candidates == 0.0) continue;
      trial.candidates = ys;
      detail::forward_weights(move, weight, x, trial);
      const double norm = log_sum_exp(trial.forward_log_weights);
      for (std::size_t J = 0; J < M; ++J) {
        // With no valid selection distribution J is taken as uniform.
        const double p_select = norm == kNegInf ? 1.0 / static_cast<double>(M)
                                                : std::exp(trial.forward_log_weights[J] - norm);
        const auto yi = static_cast<Eigen::Index>(ys[J]);
        double p_reverse_total = 0.0;
        std::fill(rev.begin(), rev.end(), 0);
        do {
          double p_reverse = 1.0;
          for (std::size_t m = 0, k = 0; m < M; ++m) {
            if (m == J) continue;
            p_reverse *= spec.proposal(m)(yi, static_cast<Eigen::Index>(rev[k++]));
          }
          p_reverse_total += p_reverse;
        } while (next_tuple(rev, n));
        total += p_candidates * p_select * p_reverse_total;
      }
    } while (next_tuple(ys, n));
    const double pi_x = spec.target_probs[xi];
    const double v = std::abs(pi_x * total - pi_x);
    if (!(v <= r.max_violation)) {
      r.max_violation = std::isnan(v) ? kInf : v;
      r.detail = "worst state " + std::to_string(x);
    }
  }
  r.passed = r.max_violation < tolerance;
  if (r.passed) r.detail.clear();
  return r;
}

// ---------------------------------------------------------------- suite

namespace {

const std::vector<WeightSpec>& all_weights() {
  static const std::vector<WeightSpec> kinds = {
      {WeightKind::kConstant},     {WeightKind::kImportance},
      {WeightKind::kProportional}, {WeightKind::kLocallyBalanced},
      {WeightKind::kJumpDistance, 3.0},
  };
  return kinds;
}

CheckResult named(CheckResult r, const std::string& name) {
  r.check = name;
  return r;
}

}  // namespace

VerificationReport run_verification_suite(std::uint64_t seed, std::size_t n_points) {
  VerificationReport report;
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.5);

  auto target = std::make_shared<BananaTarget>(BananaParams{0.1, 2});
  ProposalConfig mh_config;
  mh_config.kind = ProposalKind::kHomFull;
  mh_config.adapt = false;
  auto mh_proposal = std::make_shared<Proposal>(mh_config, target->dim());
  ProposalConfig mtm_config = mh_config;
  mtm_config.kind = ProposalKind::kHetFull;
  mtm_config.M = 3;
  auto mtm_proposal = std::make_shared<Proposal>(mtm_config, target->dim());

  const auto mh = mh_extended_spec(target, mh_proposal);
  std::vector<Vector> mh_points;
  for (std::size_t k = 0; k < n_points; ++k) {
    Vector x(2);
    x << normal(rng), normal(rng);
    Vector p(4);
    p << x, mh_proposal->draw(0, x, rng);
    mh_points.push_back(p);
  }

  std::vector<std::vector<Vector>> mtm_points(all_weights().size());
  std::vector<ExtendedSpaceSpec> mtm_specs;
  for (std::size_t w = 0; w < all_weights().size(); ++w) {
    mtm_specs.push_back(mtm_extended_spec(target, mtm_proposal, all_weights()[w]));
    while (mtm_points[w].size() < n_points / all_weights().size() + 1) {
      Vector x(2);
      x << normal(rng), normal(rng);
      auto p = sample_mtm_extended_point(*target, *mtm_proposal, all_weights()[w], x, rng);
      if (p.size() > 0) mtm_points[w].push_back(std::move(p));
    }
  }

  report.add(named(check_involution(mh, mh_points), "involution/mh"));
  {
    CheckResult worst{"involution/mtm", 0.0, true, {}};
    for (std::size_t w = 0; w < mtm_specs.size(); ++w) {
      auto r = check_involution(mtm_specs[w], mtm_points[w]);
      if (r.max_violation >= worst.max_violation) worst = r;
    }
    report.add(named(worst, "involution/mtm"));
  }

  // Ratio reciprocity r(p) r(g(p)) = 1, and the MH spec against its closed form.
  const auto reciprocity = [](const ExtendedSpaceSpec& spec, std::span<const Vector> points,
                              const std::string& name) {
    CheckResult r{name, 0.0, true, {}};
    for (const auto& p : points) {
      const double v = std::abs(acceptance_log_ratio_from_spec(spec, p) +
                                acceptance_log_ratio_from_spec(spec, spec.involution(p)));
      r.max_violation = std::max(r.max_violation, std::isnan(v) ? kInf : v);
    }
    r.passed = r.max_violation < 1e-8;
    return r;
  };
  report.add(reciprocity(mh, mh_points, "ratio-reciprocity/mh"));
  {
    CheckResult worst{"ratio-reciprocity/mtm", 0.0, true, {}};
    for (std::size_t w = 0; w < mtm_specs.size(); ++w) {
      auto r = reciprocity(mtm_specs[w], mtm_points[w], "ratio-reciprocity/mtm");
      if (r.max_violation >= worst.max_violation) worst = r;
    }
    report.add(worst);
  }
  {
    CheckResult r{"mh-closed-form", 0.0, true, {}};
    for (const auto& p : mh_points) {
      const Vector x = p.head(2);
      const Vector y = p.tail(2);
      const double closed = target->log_density(y) + mh_proposal->log_density(0, y, x) -
                            target->log_density(x) - mh_proposal->log_density(0, x, y);
      const double v = std::abs(acceptance_log_ratio_from_spec(mh, p) - closed);
      r.max_violation = std::max(r.max_violation, std::isnan(v) ? kInf : v);
    }
    r.passed = r.max_violation < 1e-12;
    report.add(r);
  }

  // Jacobian reciprocity through the finite-difference path.
  const auto jacobian_reciprocity = [](const ExtendedSpaceSpec& spec,
                                       std::span<const Vector> points, const std::string& name) {
    CheckResult r{name, 0.0, true, {}};
    for (const auto& p : points) {
      const double v =
          std::abs(jacobian_log_abs(spec, p) + jacobian_log_abs(spec, spec.involution(p)));
      r.max_violation = std::max(r.max_violation, std::isnan(v) ? kInf : v);
    }
    r.passed = r.max_violation < 1e-6;
    return r;
  };
  report.add(jacobian_reciprocity(mh, mh_points, "jacobian-reciprocity/mh"));
  report.add(jacobian_reciprocity(mtm_specs[2], mtm_points[2], "jacobian-reciprocity/mtm"));
  {
    const auto recip = reciprocal_extended_spec(2.0);
    std::vector<Vector> points;
    std::uniform_real_distribution<double> unif(0.1, 10.0);
    for (std::size_t k = 0; k < n_points; ++k) points.push_back(Vector::Constant(1, unif(rng)));
    report.add(named(check_involution(recip, points, 1e-12), "involution/reciprocal"));
    report.add(jacobian_reciprocity(recip, points, "jacobian-reciprocity/reciprocal"));
  }

  // Exact discrete oracles.
  Vector uneven(5);
  uneven << 0.4, 0.1, 0.2, 0.1, 0.2;
  const std::vector<std::pair<std::string, DiscreteKernelSpec>> discrete = {
      {"line-uniform", line_walk_spec(Vector::Constant(5, 0.2))},
      {"line-uneven", line_walk_spec(uneven)},
  };
  for (const auto& [label, spec] : discrete) {
    for (const auto& weight : all_weights()) {
      for (std::size_t M = 1; M <= 3; ++M) {
        std::vector<AcceptancePath> paths = {AcceptancePath::kGeneral};
        if (is_restricted_form(weight, spec.symmetric())) {
          paths.push_back(AcceptancePath::kRestrictedAuto);
        }
        for (auto path : paths) {
          const std::string name = label + "/" + to_string(weight) + "/M=" + std::to_string(M) +
                                   (path == AcceptancePath::kGeneral ? "/general" : "/restricted");
          const Matrix P = enumerate_mtm_transition_matrix(spec, M, weight, path);
          report.add(named(check_row_sums(P), "row-sums/" + name));
          report.add(named(check_stationarity(P, spec.target_probs), "stationarity/" + name));
          report.add(named(check_detailed_balance(P, spec.target_probs), "detailed-balance/" + name));
        }
        report.add(named(check_marginality(spec, M, weight),
                         "marginality/" + label + "/" + to_string(weight) + "/M=" +
                             std::to_string(M)));
      }
    }
  }
  return report;
}

}  // namespace mtm
