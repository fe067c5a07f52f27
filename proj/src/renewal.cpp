#include "pin/renewal.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "pin/convolution.hpp"
#include "pin/csv.hpp"
#include "pin/error.hpp"

namespace pin {

namespace {

constexpr std::size_t kExplicitSumLength = 20000;

// Neumaier accumulator.
struct CompensatedSum {
  double s = 0.0, c = 0.0;
  void add(double x) {
    const double t = s + x;
    c += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

// d/dx log L(x) for the supported families.
double log_derivative(const SlowlyVarying& L, double x) {
  if (L.family() == SlowFamily::constant) return 0.0;
  const double lg = std::log(std::numbers::e + x);
  return L.param() / ((std::numbers::e + x) * lg);
}

// sum_{n > M} L(n) n^-p by Euler-Maclaurin, p > 1.
double power_sum_tail(const SlowlyVarying& L, double p, double M) {
  double integral = 0.0;
  if (L.family() == SlowFamily::constant) {
    integral = L(M) * std::pow(M, 1.0 - p) / (p - 1.0);
  } else {
    const double logM = std::log(M);
    auto g = [&](double s) { return L.eval_log(logM + s) * std::exp((1.0 - p) * s); };
    boost::math::quadrature::exp_sinh<double> integrator;
    integral = std::pow(M, 1.0 - p) * integrator.integrate(g, 0.0, std::numeric_limits<double>::infinity());
  }
  const double f = L(M) * std::pow(M, -p);
  const double d1 = f * (-p / M + log_derivative(L, M));
  const double d3 = -f * p * (p + 1.0) * (p + 2.0) / (M * M * M);
  return integral - f / 2.0 - d1 / 12.0 + d3 / 720.0;
}

std::string family_name(RenewalFamily f) {
  switch (f) {
    case RenewalFamily::power_law: return "power_law";
    case RenewalFamily::deterministic: return "deterministic";
    case RenewalFamily::two_point: return "two_point";
    case RenewalFamily::tabulated: return "tabulated";
    case RenewalFamily::intersection: return "intersection";
  }
  return "unknown";
}

RenewalFamily family_from_name(const std::string& s) {
  for (auto f : {RenewalFamily::power_law, RenewalFamily::deterministic, RenewalFamily::two_point,
                 RenewalFamily::tabulated, RenewalFamily::intersection}) {
    if (family_name(f) == s) return f;
  }
  throw DomainError("unknown renewal family '" + s + "'");
}

}  // namespace

double stable_constant(double alpha) { return alpha * std::sin(alpha * std::numbers::pi) / std::numbers::pi; }

void RenewalLaw::finish_tables() {
  const std::size_t n = K_.size();
  u_.assign(n, 0.0);
  u_[0] = 1.0;
  conv::causal_solve(K_, {}, 1.0, u_, conv::Summation::compensated);
}

std::string RenewalLaw::cache_key() const {
  std::ostringstream os;
  os << family_name(family_) << ";alpha=" << csv::num(alpha_) << ";L=" << L_.key() << ':' << csv::num(L_.param())
     << ";n_max=" << n_max();
  return os.str();
}

std::int64_t RenewalLaw::draw_increment(Rng& rng) const {
  const double v = rng.uniform();
  const std::size_t nm = n_max();
  if (v <= tail_[nm]) {
    const double x = static_cast<double>(nm) * std::pow(v / tail_[nm], -1.0 / alpha_);
    const double c = std::ceil(x);
    if (!(c < 9.0e18)) return std::numeric_limits<std::int64_t>::max() / 4;
    return std::max<std::int64_t>(static_cast<std::int64_t>(c), static_cast<std::int64_t>(nm) + 1);
  }
  // tail_ is nonincreasing; the increment is the first n with tail(n) < v.
  const auto it = std::partition_point(tail_.begin(), tail_.end(), [v](double t) { return t >= v; });
  return static_cast<std::int64_t>(it - tail_.begin());
}

RenewalLaw build_renewal(double alpha, const SlowlyVarying& L, std::size_t n_max) {
  if (!(alpha > 0.0)) throw DomainError("build_renewal: alpha must be positive");
  if (n_max < 2) throw DomainError("build_renewal: n_max must be at least 2");
  const double p = 1.0 + alpha;
  const std::size_t m0 = std::max(n_max, kExplicitSumLength);

  std::vector<double> f(m0 + 1, 0.0);
  for (std::size_t n = 1; n <= m0; ++n) f[n] = L(static_cast<double>(n)) * std::pow(static_cast<double>(n), -p);

  CompensatedSum head, beyond;
  for (std::size_t n = 1; n <= n_max; ++n) head.add(f[n]);
  for (std::size_t n = n_max + 1; n <= m0; ++n) beyond.add(f[n]);
  beyond.add(power_sum_tail(L, p, static_cast<double>(m0)));
  const double z = head.value() + beyond.value();
  if (!(z > 0.0) || !std::isfinite(z)) throw DomainError("build_renewal: normalization failed");

  RenewalLaw law;
  law.family_ = RenewalFamily::power_law;
  law.alpha_ = alpha;
  law.L_ = L;
  law.L_eff_ = L.scaled(1.0 / z);
  law.C_alpha_ = alpha < 1.0 ? stable_constant(alpha) : std::numeric_limits<double>::quiet_NaN();
  law.M_ = alpha < 1.0 ? law.L_eff_.scaled(1.0 / law.C_alpha_) : law.L_eff_;
  law.K_.assign(n_max + 1, 0.0);
  for (std::size_t n = 1; n <= n_max; ++n) law.K_[n] = f[n] / z;
  law.tail_.assign(n_max + 1, 0.0);
  law.tail_[n_max] = beyond.value() / z;
  for (std::size_t n = n_max; n-- > 0;) law.tail_[n] = law.tail_[n + 1] + law.K_[n + 1];
  law.tail_[0] = 1.0;

  if (alpha > 1.0) {
    CompensatedSum m;
    for (std::size_t n = 1; n <= m0; ++n) m.add(static_cast<double>(n) * f[n]);
    m.add(power_sum_tail(L, alpha, static_cast<double>(m0)));
    law.mean_ = m.value() / z;
  } else {
    law.mean_ = std::numeric_limits<double>::infinity();
  }
  law.finish_tables();
  return law;
}

RenewalLaw tabulated_law(std::vector<double> probs, std::size_t n_max) {
  if (n_max < 1) throw DomainError("tabulated_law: n_max must be positive");
  if (probs.empty() || probs.size() > n_max) throw DomainError("tabulated_law: support must lie in 1..n_max");
  CompensatedSum total, mean;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] >= 0.0)) throw DomainError("tabulated_law: negative probability");
    total.add(probs[i]);
    mean.add(static_cast<double>(i + 1) * probs[i]);
  }
  if (std::abs(total.value() - 1.0) > 1e-12) throw DomainError("tabulated_law: probabilities must sum to 1");

  RenewalLaw law;
  law.family_ = RenewalFamily::tabulated;
  law.alpha_ = std::numeric_limits<double>::quiet_NaN();
  law.C_alpha_ = std::numeric_limits<double>::quiet_NaN();
  law.mean_ = mean.value();
  law.K_.assign(n_max + 1, 0.0);
  std::copy(probs.begin(), probs.end(), law.K_.begin() + 1);
  law.tail_.assign(n_max + 1, 0.0);
  for (std::size_t n = n_max; n-- > 0;) law.tail_[n] = law.tail_[n + 1] + law.K_[n + 1];
  law.tail_[0] = 1.0;
  law.finish_tables();
  return law;
}

RenewalLaw deterministic_law(std::size_t n_max) {
  RenewalLaw law = tabulated_law({1.0}, n_max);
  law.family_ = RenewalFamily::deterministic;
  return law;
}

RenewalLaw two_point_law(std::size_t n_max) {
  if (n_max < 2) throw DomainError("two_point_law: n_max must be at least 2");
  RenewalLaw law = tabulated_law({0.5, 0.5}, n_max);
  law.family_ = RenewalFamily::two_point;
  return law;
}

RenewalLaw intersection_law(const RenewalLaw& base, std::size_t n_max) {
  if (base.family() != RenewalFamily::power_law || !(base.alpha() > 0.5 && base.alpha() < 1.0)) {
    throw DomainError("intersection_law: needs a power-law renewal with alpha in (1/2, 1)");
  }
  if (n_max == 0) n_max = base.n_max();
  if (n_max > base.n_max()) throw DomainError("intersection_law: n_max beyond the base table");
  const std::size_t n = n_max + 1;
  RenewalLaw law;
  law.family_ = RenewalFamily::intersection;
  law.alpha_ = 2.0 * base.alpha() - 1.0;
  law.C_alpha_ = stable_constant(law.alpha_);
  law.mean_ = std::numeric_limits<double>::infinity();

  const SlowlyVarying& le = base.effective_L();
  const double c = le.scale() / base.C_alpha();
  law.M_ = le.family() == SlowFamily::constant
               ? SlowlyVarying::constant(1.0).scaled(c * c * le.param() * le.param())
               : SlowlyVarying::log_power(2.0 * le.param()).scaled(c * c);
  law.L_ = law.M_;
  law.L_eff_ = law.M_;

  law.u_.resize(n);
  for (std::size_t i = 0; i < n; ++i) law.u_[i] = base.u(i) * base.u(i);
  law.K_.assign(n, 0.0);
  conv::causal_solve(law.u_, law.u_, -1.0, law.K_, conv::Summation::compensated);
  law.K_[0] = 0.0;

  law.tail_.assign(n, 0.0);
  CompensatedSum acc;
  law.tail_[0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    acc.add(law.K_[i]);
    law.tail_[i] = std::max(0.0, 1.0 - acc.value());
  }
  return law;
}

ContactReport contact_asymptotics_check(const RenewalLaw& law, std::size_t n_lo, std::size_t n_hi) {
  ContactReport rep;
  if (!law.heavy_tailed() || !(law.alpha() > 0.0 && law.alpha() < 1.0)) {
    rep.skipped = true;
    rep.diagnostic = "contact asymptotics need a heavy-tailed law with exponent in (0, 1)";
    return rep;
  }
  if (n_lo < 1 || n_lo > n_hi || n_hi > law.n_max()) throw DomainError("contact_asymptotics_check: bad window");
  const auto& M = law.contact_scale();
  for (std::size_t n = n_lo; n <= n_hi; ++n) {
    const double x = static_cast<double>(n);
    const double dev = std::abs(law.u(n) * M(x) * std::pow(x, 1.0 - law.alpha()) - 1.0);
    if (dev > rep.max_rel_dev) {
      rep.max_rel_dev = dev;
      rep.worst_n = n;
    }
  }
  return rep;
}

double renewal_residual(const RenewalLaw& law) {
  const auto K = law.K_table();
  const auto u = law.u_table();
  const auto c = conv::fft_convolve(K, u, u.size());
  double worst = 0.0;
  for (std::size_t n = 1; n < u.size(); ++n) worst = std::max(worst, std::abs(u[n] - c[n]));
  return worst;
}

std::vector<std::int64_t> sample_renewal(const RenewalLaw& law, std::int64_t horizon, Rng& rng) {
  if (horizon < 0) throw DomainError("sample_renewal: negative horizon");
  std::vector<std::int64_t> pts{0};
  std::int64_t pos = 0;
  while (true) {
    const std::int64_t step = law.draw_increment(rng);
    if (step > horizon - pos) break;
    pos += step;
    pts.push_back(pos);
  }
  return pts;
}

RegularityReport regularity_check(const RenewalLaw& law, double eps, double delta,
                                  std::span<const std::size_t> n_grid) {
  if (!(eps > 0.0) || !(delta > 0.0 && delta <= 1.0)) throw DomainError("regularity_check: need eps > 0, 0 < delta <= 1");
  RegularityReport rep;
  for (std::size_t n : n_grid) {
    if (n == 0) continue;
    const auto lmax = static_cast<std::size_t>(std::floor(eps * static_cast<double>(n)));
    if (n + lmax > law.n_max()) throw DomainError("regularity_check: grid exceeds the tabulated range");
    const double un = law.u(n);
    for (std::size_t l = 1; l <= lmax; ++l) {
      const double c = std::abs(law.u(n + l) / un - 1.0) /
                       std::pow(static_cast<double>(l) / static_cast<double>(n), delta);
      if (c > rep.worst_C) {
        rep.worst_C = c;
        rep.worst_n = n;
        rep.worst_l = l;
      }
    }
  }
  return rep;
}

void write_law_csv(const RenewalLaw& law, std::ostream& os) {
  os << "# schema: renewal_law v1\n";
  os << "# law: family=" << family_name(law.family()) << " alpha=" << csv::num(law.alpha())
     << " L=" << law.L().key() << " L_param=" << csv::num(law.L().param())
     << " L_scale=" << csv::num(law.L().scale()) << " Leff_scale=" << csv::num(law.effective_L().scale())
     << " M_scale=" << csv::num(law.contact_scale().scale()) << " M_param=" << csv::num(law.contact_scale().param())
     << " C_alpha=" << csv::num(law.C_alpha()) << " mean=" << csv::num(law.mean_return_time())
     << " n_max=" << law.n_max() << "\n";
  os << "n,K,Kbar,u\n";
  for (std::size_t n = 0; n <= law.n_max(); ++n) {
    os << n << ',' << csv::num(law.K(n)) << ',' << csv::num(law.tail(n)) << ',' << csv::num(law.u(n)) << '\n';
  }
}

RenewalLaw read_law_csv(std::istream& is) {
  std::string line;
  std::map<std::string, std::string> meta;
  if (!std::getline(is, line) || line != "# schema: renewal_law v1") throw DomainError("read_law_csv: bad schema line");
  if (!std::getline(is, line) || line.rfind("# law:", 0) != 0) throw DomainError("read_law_csv: missing law line");
  {
    std::istringstream ls(line.substr(6));
    std::string tok;
    while (ls >> tok) {
      const auto eq = tok.find('=');
      if (eq != std::string::npos) meta[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
  }
  if (!std::getline(is, line) || line != "n,K,Kbar,u") throw DomainError("read_law_csv: bad column header");
  auto get = [&](const char* key) {
    const auto it = meta.find(key);
    if (it == meta.end()) throw DomainError(std::string("read_law_csv: missing ") + key);
    return std::stod(it->second);
  };

  RenewalLaw law;
  law.family_ = family_from_name(meta["family"]);
  law.alpha_ = get("alpha");
  law.C_alpha_ = get("C_alpha");
  law.mean_ = get("mean");
  const auto base = SlowlyVarying::from_key(meta["L"], get("L_param"));
  law.L_ = base.scaled(get("L_scale") / base.scale());
  law.L_eff_ = base.scaled(get("Leff_scale") / base.scale());
  law.M_ = SlowlyVarying::from_key(meta["L"], get("M_param")).scaled(get("M_scale"));
  const auto n_max = static_cast<std::size_t>(get("n_max"));
  law.K_.resize(n_max + 1);
  law.tail_.resize(n_max + 1);
  law.u_.resize(n_max + 1);
  for (std::size_t n = 0; n <= n_max; ++n) {
    if (!std::getline(is, line)) throw DomainError("read_law_csv: truncated table");
    std::istringstream ls(line);
    std::string a, b, c, d;
    std::getline(ls, a, ',');
    std::getline(ls, b, ',');
    std::getline(ls, c, ',');
    std::getline(ls, d, ',');
    if (std::stoul(a) != n) throw DomainError("read_law_csv: rows out of order");
    law.K_[n] = std::stod(b);
    law.tail_[n] = std::stod(c);
    law.u_[n] = std::stod(d);
  }
  return law;
}

}  // namespace pin
