#include "qrm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "qrm/error.hpp"
#include "qrm/linalg.hpp"

namespace qrm {

namespace {

constexpr double kGauss2[2] = {0.21132486540518711775, 0.78867513459481288225};

std::vector<int> ascending(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Plane wave

Vec2c PlaneWave::value(Point x) const {
  const Complex phase = std::exp(Complex(0.0, k) * sqrt_kappa() * (direction[0] * x.x + direction[1] * x.y));
  return {-direction[1] * phase, direction[0] * phase};
}

Complex PlaneWave::curl(Point x) const {
  const Complex iks = Complex(0.0, k) * sqrt_kappa();
  return iks * std::exp(iks * (direction[0] * x.x + direction[1] * x.y));
}

Vec2c PlaneWave::curl_curl(Point x) const {
  // grad(curl E) = (i k sqrt(kappa))^2 eta exp(...).
  const Complex iks = Complex(0.0, k) * sqrt_kappa();
  const Complex e = std::exp(iks * (direction[0] * x.x + direction[1] * x.y));
  const Complex d1 = iks * iks * direction[0] * e;
  const Complex d2 = iks * iks * direction[1] * e;
  return {d2, -d1};
}

FieldFunction PlaneWave::field() const {
  const PlaneWave self = *this;
  return {[self](Point x) { return self.value(x); }, [self](Point x) { return self.curl(x); }};
}

void PlaneWave::validate() const {
  const double n = std::hypot(direction[0], direction[1]);
  if (std::abs(n - 1.0) > 1e-12) throw InvalidArgument("plane wave: direction must be a unit vector");
  if (!(k > 0.0)) throw InvalidArgument("plane wave: k must be positive");
  if (!(kappa.real() > 0.0)) throw InvalidArgument("plane wave: Re kappa must be positive");
}

PlaneWave PlaneWave::from_angle(double theta, double k, Complex kappa) {
  PlaneWave w;
  w.direction = {std::cos(theta), std::sin(theta)};
  w.k = k;
  w.kappa = kappa;
  return w;
}

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::Analytic: return "analytic";
    case Provenance::DiscreteOracle: return "discrete-oracle";
    case Provenance::Perturbed: return "perturbed";
    case Provenance::File: return "file";
  }
  return "?";
}

void CauchyData::validate(const BoundaryPartition& partition) const {
  if (f.size() != edges.size() || g.size() != edges.size()) {
    throw InvalidArgument("Cauchy data: f, g and edge list differ in length");
  }
  const std::vector<int> g0 = ascending(partition.gamma0);
  const std::vector<int> mine = ascending(edges);
  if (std::adjacent_find(mine.begin(), mine.end()) != mine.end()) {
    throw InvalidArgument("Cauchy data: duplicate edge");
  }
  if (!std::includes(g0.begin(), g0.end(), mine.begin(), mine.end())) {
    throw InvalidArgument("Cauchy data: data given on edges outside gamma0");
  }
}

// ---------------------------------------------------------------------------

ManufacturedData plane_wave_data(const PlaneWave& wave, const Mesh& mesh,
                                 const BoundaryPartition& partition) {
  wave.validate();
  ManufacturedData out;
  out.exact = interpolate(wave.field(), mesh);
  CauchyData& d = out.data;
  d.provenance = Provenance::Analytic;
  d.edges = ascending(partition.gamma0);
  d.f.reserve(d.edges.size());
  d.g.reserve(d.edges.size());
  for (int e : d.edges) {
    d.f.push_back(static_cast<double>(mesh.trace_sign(e)) * out.exact[e]);
    const Point a = mesh.vertices()[mesh.edges()[e].v[0]];
    const Point b = mesh.vertices()[mesh.edges()[e].v[1]];
    Complex s = 0.0;
    for (double xi : kGauss2) s += 0.5 * wave.curl(a + xi * (b - a));
    d.g.push_back(s);
  }
  return out;
}

std::vector<Complex> solve_direct_problem(const AssembledForms& forms,
                                          std::span<const Complex> boundary_dofs) {
  const std::size_t n = forms.size();
  if (boundary_dofs.size() != n) throw InvalidArgument("solve_direct_problem: length mismatch");
  const std::vector<std::size_t> inner = forms.dofs.of_class(DofClass::Interior);
  const std::vector<std::size_t> bnd = forms.dofs.excluding({DofClass::Interior});
  const std::size_t m = inner.size();

  std::vector<Complex> e(n, 0.0);
  for (std::size_t i : bnd) e[i] = boundary_dofs[i];
  if (m == 0) return e;

  // [A_r -A_i; A_i A_r] [Re E; Im E] = -(A E_bnd) on interior rows.
  const linalg::SparseMatrix ar = forms.a_re().submatrix(inner, inner);
  const linalg::SparseMatrix ai = forms.a_im().submatrix(inner, inner);
  std::vector<linalg::Triplet> t;
  t.reserve(2 * ar.nnz() + 2 * ai.nnz());
  for (const auto& x : ar.triplets()) {
    t.push_back({x.row, x.col, x.value});
    t.push_back({m + x.row, m + x.col, x.value});
  }
  for (const auto& x : ai.triplets()) {
    t.push_back({x.row, m + x.col, -x.value});
    t.push_back({m + x.row, x.col, x.value});
  }
  const auto sys = linalg::SparseMatrix::from_triplets(2 * m, 2 * m, std::move(t));

  const std::vector<Complex> lift = forms.apply_a(e);
  std::vector<double> rhs(2 * m);
  for (std::size_t j = 0; j < m; ++j) {
    rhs[j] = -lift[inner[j]].real();
    rhs[m + j] = -lift[inner[j]].imag();
  }
  std::vector<double> x;
  try {
    x = linalg::sparse_lu_solve(sys, rhs);
  } catch (const NumericalError& err) {
    throw NumericalError(std::string("direct problem is singular (discrete resonance?): ") + err.what(),
                         err.row());
  }
  for (std::size_t j = 0; j < m; ++j) e[inner[j]] = {x[j], x[m + j]};
  return e;
}

double oracle_angle(std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  return 2.0 * std::numbers::pi * static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

ManufacturedData discrete_oracle(const Mesh& mesh, const BoundaryPartition& partition,
                                 const AssembledForms& forms, Complex wave_kappa,
                                 std::uint64_t seed) {
  if (forms.size() != mesh.num_edges()) throw InvalidArgument("discrete_oracle: forms do not match mesh");
  const PlaneWave wave = PlaneWave::from_angle(oracle_angle(seed), forms.k, wave_kappa);
  wave.validate();

  ManufacturedData out;
  out.exact = solve_direct_problem(forms, interpolate(wave.field(), mesh));
  const std::vector<Complex> ae = forms.apply_a(out.exact);

  CauchyData& d = out.data;
  d.provenance = Provenance::DiscreteOracle;
  d.seed = seed;
  d.edges = ascending(partition.gamma0);
  for (int e : d.edges) {
    const double s = forms.trace_sign[e];
    d.f.push_back(s * out.exact[e]);
    // b_g[e] = -s * g_e must equal (A E_h)_e.
    d.g.push_back(-s * ae[e]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Noise

double NormalStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double NormalStream::next() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  return r * std::cos(a);
}

namespace {

std::vector<Complex> perturb(const std::vector<Complex>& x, double p, NormalStream& rng, const char* name) {
  std::vector<Complex> b(x.size());
  for (auto& v : b) {
    const double re = rng.next();
    v = {re, rng.next()};
  }
  if (p == 0.0) return x;
  const double nx = linalg::norm2(x);
  if (nx == 0.0) {
    throw InvalidArgument(std::string("add_noise: ||") + name + "|| = 0, relative noise undefined");
  }
  const double nb = linalg::norm2(b);
  std::vector<Complex> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + (p * nx / nb) * b[i];
  return out;
}

}  // namespace

CauchyData add_noise(const CauchyData& data, double p, std::uint64_t seed) {
  if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidArgument("add_noise: p must be >= 0");
  if (p == 0.0) return data;
  NormalStream rng(seed);
  CauchyData out = data;
  out.f = perturb(data.f, p, rng, "f");
  out.g = perturb(data.g, p, rng, "g");
  out.provenance = Provenance::Perturbed;
  out.noise = p;
  out.seed = seed;
  return out;
}

// ---------------------------------------------------------------------------
// File format

void write_cauchy_data(std::ostream& out, const CauchyData& data, const std::string& header) {
  if (!header.empty()) {
    std::istringstream lines(header);
    std::string line;
    while (std::getline(lines, line)) out << "# " << line << '\n';
  }
  out << "# provenance " << to_string(data.provenance) << '\n';
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu %.17g ", data.size(), data.noise);
  out << buf;
  if (data.seed) {
    out << *data.seed << '\n';
  } else {
    out << "-\n";
  }
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%d %.17g %.17g %.17g %.17g\n", data.edges[i], data.f[i].real(),
                  data.f[i].imag(), data.g[i].real(), data.g[i].imag());
    out << buf;
  }
}

CauchyData read_cauchy_data(std::istream& in) {
  CauchyData d;
  d.provenance = Provenance::File;
  std::string line;
  int line_no = 0;
  auto next = [&](std::istringstream& ss) {
    while (std::getline(in, line)) {
      ++line_no;
      std::string body = line;
      if (const auto hash = body.find('#'); hash != std::string::npos) {
        const std::string comment = body.substr(hash + 1);
        std::istringstream cs(comment);
        std::string key, value;
        if (cs >> key >> value && key == "provenance") {
          if (value == "analytic") d.provenance = Provenance::Analytic;
          if (value == "discrete-oracle") d.provenance = Provenance::DiscreteOracle;
          if (value == "perturbed") d.provenance = Provenance::Perturbed;
        }
        body.erase(hash);
      }
      if (body.find_first_not_of(" \t\r") == std::string::npos) continue;
      ss.clear();
      ss.str(body);
      return true;
    }
    return false;
  };
  auto fail = [&](const std::string& what) {
    throw FormatError("data file line " + std::to_string(line_no) + ": " + what);
  };

  std::istringstream ss;
  if (!next(ss)) throw FormatError("data file: missing header");
  long long n = 0;
  std::string seed;
  if (!(ss >> n >> d.noise >> seed) || n < 0 || !(d.noise >= 0.0)) fail("malformed header");
  if (seed != "-") {
    try {
      std::size_t used = 0;
      d.seed = std::stoull(seed, &used);
      if (used != seed.size()) fail("malformed seed");
    } catch (const std::logic_error&) {
      fail("malformed seed");
    }
  }
  for (long long i = 0; i < n; ++i) {
    if (!next(ss)) throw FormatError("data file truncated");
    int e = 0;
    double fr = 0, fi = 0, gr = 0, gi = 0;
    std::string extra;
    if (!(ss >> e >> fr >> fi >> gr >> gi) || (ss >> extra)) fail("malformed data line");
    d.edges.push_back(e);
    d.f.emplace_back(fr, fi);
    d.g.emplace_back(gr, gi);
  }
  if (next(ss)) fail("unexpected trailing content");
  return d;
}

}  // namespace qrm
