#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qrm/edgefem.hpp"
#include "qrm/mesh.hpp"

namespace qrm {

/// E(x) = eta_perp exp(i k sqrt(kappa) eta.x), eta_perp = (-eta_2, eta_1).
/// curl E = i k sqrt(kappa) exp(...), and curl curl E = k^2 kappa E.
struct PlaneWave {
  std::array<double, 2> direction{1.0, 0.0};
  double k = 1.0;
  Complex kappa{1.0, 1.0};

  /// Principal square root, branch cut on the negative reals.
  Complex sqrt_kappa() const { return std::sqrt(kappa); }
  Vec2c value(Point x) const;
  Complex curl(Point x) const;
  /// Vector curl of the scalar curl, (d2 c, -d1 c), evaluated analytically.
  Vec2c curl_curl(Point x) const;
  FieldFunction field() const;
  /// |direction| = 1, k > 0, Re kappa > 0.
  void validate() const;

  static PlaneWave from_angle(double theta, double k, Complex kappa);
};

enum class Provenance { Analytic, DiscreteOracle, Perturbed, File };
std::string to_string(Provenance p);

/// Cauchy data on gamma0 in boundary-tangent convention: f_e = int_e E.t ds
/// and g_e = mean of curl E over e (for the discrete oracle, the value that
/// makes the discrete load exact).
struct CauchyData {
  std::vector<int> edges;
  std::vector<Complex> f;
  std::vector<Complex> g;
  Provenance provenance = Provenance::Analytic;
  double noise = 0.0;
  std::optional<std::uint64_t> seed;

  std::size_t size() const { return edges.size(); }
  /// Throws InvalidArgument unless lengths agree and edges lie in gamma0.
  void validate(const BoundaryPartition& partition) const;
};

/// Data plus the DOF vector of the field that produced them.
struct ManufacturedData {
  CauchyData data;
  std::vector<Complex> exact;
};

ManufacturedData plane_wave_data(const PlaneWave& wave, const Mesh& mesh,
                                 const BoundaryPartition& partition);

/// Solves (K - k^2 M_kappa) E = 0 on interior DOFs with E prescribed on every
/// boundary DOF. Throws NumericalError at a discrete resonance.
std::vector<Complex> solve_direct_problem(const AssembledForms& forms,
                                          std::span<const Complex> boundary_dofs);

/// Exact discrete Cauchy data. The seed picks the direction of a plane wave
/// (wavenumber forms.k, index `wave_kappa`) whose interpolant is the
/// Dirichlet data on the whole boundary; the resulting discrete field E_h
/// gives f from its gamma0 DOFs and g from (A E_h) on gamma0 rows, so that
/// a(E_h, psi) = l(psi) holds exactly for every discrete psi in M.
/// Direction angle (radians) the discrete oracle derives from a seed.
double oracle_angle(std::uint64_t seed);

ManufacturedData discrete_oracle(const Mesh& mesh, const BoundaryPartition& partition,
                                 const AssembledForms& forms, Complex wave_kappa,
                                 std::uint64_t seed);

/// Seeded standard normals: mt19937_64 feeding Box-Muller on 53-bit
/// uniforms, so streams agree across platforms and standard libraries.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}
  double next();
  static std::string algorithm() { return "mt19937_64+box-muller"; }

 private:
  double uniform();
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// f^p = f + p ||f|| / ||b_f|| b_f, likewise g, with independent standard
/// normal real and imaginary parts, l2 norms over DOF vectors.
CauchyData add_noise(const CauchyData& data, double p, std::uint64_t seed);

/// Header "nedges p seed", then "edge Re_f Im_f Re_g Im_g" per line; '#'
/// starts a comment. A missing seed is written as '-'.
void write_cauchy_data(std::ostream& out, const CauchyData& data, const std::string& header = {});
CauchyData read_cauchy_data(std::istream& in);

}  // namespace qrm
