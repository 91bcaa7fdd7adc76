#include "bdris/channel.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include "bdris/rng.hpp"

namespace bdris {

namespace {

constexpr std::array<char, 8> kMagic = {'B', 'D', 'R', 'I', 'S', 'C', 'H', 'N'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t side_index(const std::vector<Side> &sides, int user) {
  std::uint64_t idx = 0;
  for (int k = 0; k < user; ++k)
    idx += (sides[k] == sides[user]);
  return idx;
}

Complex circular_normal(GaussianSource &src) {
  const double re = src.normal();
  const double im = src.normal();
  return {re * kInvSqrt2, im * kInvSqrt2};
}

// LoS/NLoS mix with the same draws for every kappa, so kappa = 0 reproduces
// the Rayleigh realization exactly.
double los_weight(FadingKind kind, double kappa) {
  return kind == FadingKind::kRician ? std::sqrt(kappa / (1.0 + kappa)) : 0.0;
}
double nlos_weight(FadingKind kind, double kappa) {
  return kind == FadingKind::kRician ? std::sqrt(1.0 / (1.0 + kappa)) : 1.0;
}

template <typename T> T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  } else {
    return v;
  }
}

class Writer {
public:
  explicit Writer(std::ofstream &out) : out_(out) {}
  template <typename T> void put(T v) {
    v = to_little(v);
    out_.write(reinterpret_cast<const char *>(&v), sizeof(T));
  }
  void put(Complex c) {
    put(c.real());
    put(c.imag());
  }

private:
  std::ofstream &out_;
};

class Reader {
public:
  explicit Reader(std::ifstream &in) : in_(in) {}
  template <typename T> T get() {
    T v;
    in_.read(reinterpret_cast<char *>(&v), sizeof(T));
    if (in_.gcount() != std::streamsize(sizeof(T)))
      throw ChannelFileError(ChannelFileError::Kind::kMalformed,
                             "channel file truncated");
    return to_little(v);
  }
  Complex get_complex() {
    const double re = get<double>();
    const double im = get<double>();
    return {re, im};
  }

private:
  std::ifstream &in_;
};

} // namespace

bool operator==(const ChannelSet &a, const ChannelSet &b) {
  if (a.seed != b.seed || a.sides != b.sides || a.h.size() != b.h.size())
    return false;
  if (a.g.rows() != b.g.rows() || a.g.cols() != b.g.cols() || a.g != b.g)
    return false;
  for (std::size_t k = 0; k < a.h.size(); ++k)
    if (a.h[k].size() != b.h[k].size() || a.h[k] != b.h[k])
      return false;
  return true;
}

double pathloss(double d, double d0, double zeta0_db, double exponent) {
  if (!(d > 0) || !(d0 > 0))
    throw std::invalid_argument("pathloss: distances must be positive");
  return db_to_linear(zeta0_db) * std::pow(d / d0, -exponent);
}

ComplexVector ula_steering(int size, double angle_rad) {
  ComplexVector a(size);
  const double phase = std::numbers::pi * std::sin(angle_rad);
  for (int n = 0; n < size; ++n)
    a(n) = std::polar(1.0, phase * n);
  return a;
}

ComplexMatrix bs_ris_los(const Scenario &s) {
  const double deg = std::numbers::pi / 180.0;
  const ComplexVector at_ris = ula_steering(s.cells, s.geometry.ris_aoa_deg * deg);
  const ComplexVector at_bs =
      ula_steering(s.bs_antennas, s.geometry.bs_aod_deg * deg);
  return at_ris * at_bs.adjoint();
}

double user_azimuth(const Scenario &s, std::uint64_t seed, int user) {
  const auto sides = s.user_sides();
  GaussianSource src(make_engine(
      seed, {std::uint64_t(Stream::kUserAngle), std::uint64_t(sides[user]),
             side_index(sides, user)}));
  return std::numbers::pi * (src.uniform() - 0.5);
}

ChannelSet generate_channels(const Scenario &s, std::uint64_t seed) {
  validate_scenario(s);
  const auto &geo = s.geometry;
  const auto &pl = s.pathloss;
  const auto kind = s.fading.kind;

  ChannelSet cs;
  cs.seed = seed;
  cs.sides = s.user_sides();

  const double pl_bi = pathloss(geo.d_bi, geo.d0, pl.zeta0_db, pl.exponent_bi);
  const double pl_iu = pathloss(geo.d_iu, geo.d0, pl.zeta0_db, pl.exponent_iu);

  {
    GaussianSource src(make_engine(seed, {std::uint64_t(Stream::kBsRis)}));
    ComplexMatrix nlos(s.cells, s.bs_antennas);
    for (Index i = 0; i < nlos.rows(); ++i)
      for (Index j = 0; j < nlos.cols(); ++j)
        nlos(i, j) = circular_normal(src);
    const double a = los_weight(kind, s.fading.kappa_bi);
    const double b = nlos_weight(kind, s.fading.kappa_bi);
    cs.g = std::sqrt(pl_bi) * (a * bs_ris_los(s) + b * nlos);
  }

  cs.h.reserve(cs.sides.size());
  for (int k = 0; k < s.users(); ++k) {
    GaussianSource src(make_engine(
        seed, {std::uint64_t(Stream::kUserLink), std::uint64_t(cs.sides[k]),
               side_index(cs.sides, k)}));
    ComplexVector nlos(s.cells);
    for (Index m = 0; m < nlos.size(); ++m)
      nlos(m) = circular_normal(src);
    const ComplexVector los = ula_steering(s.cells, user_azimuth(s, seed, k));
    const double a = los_weight(kind, s.fading.kappa_iu);
    const double b = nlos_weight(kind, s.fading.kappa_iu);
    cs.h.push_back(std::sqrt(pl_iu) * (a * los + b * nlos));
  }
  return cs;
}

ChannelSet channel_subset(const ChannelSet &cs, std::span<const int> users) {
  ChannelSet out;
  out.g = cs.g;
  out.seed = cs.seed;
  for (int k : users) {
    if (k < 0 || k >= cs.users())
      throw std::invalid_argument("channel_subset: user index out of range");
    out.h.push_back(cs.h[k]);
    out.sides.push_back(cs.sides[k]);
  }
  return out;
}

void save_channels(const ChannelSet &cs, const std::filesystem::path &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw ChannelFileError(ChannelFileError::Kind::kIo,
                           "cannot open '" + path.string() + "' for writing");
  Writer w(out);
  out.write(kMagic.data(), kMagic.size());
  w.put(kVersion);
  w.put(std::uint32_t(cs.cells()));
  w.put(std::uint32_t(cs.bs_antennas()));
  w.put(std::uint32_t(cs.users()));
  w.put(cs.seed);
  for (Side s : cs.sides)
    w.put(std::uint8_t(s));
  for (Index i = 0; i < cs.g.rows(); ++i)
    for (Index j = 0; j < cs.g.cols(); ++j)
      w.put(cs.g(i, j));
  for (const auto &hk : cs.h) {
    if (hk.size() != cs.g.rows())
      throw std::invalid_argument("save_channels: inconsistent dimensions");
    for (Index m = 0; m < hk.size(); ++m)
      w.put(hk(m));
  }
  out.flush();
  if (!out)
    throw ChannelFileError(ChannelFileError::Kind::kIo,
                           "write failed for '" + path.string() + "'");
}

ChannelSet load_channels(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ChannelFileError(ChannelFileError::Kind::kIo,
                           "cannot open '" + path.string() + "'");
  std::error_code ec;
  const auto file_size = std::filesystem::file_size(path, ec);
  if (ec)
    throw ChannelFileError(ChannelFileError::Kind::kIo,
                           "cannot stat '" + path.string() + "'");

  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != std::streamsize(magic.size()) || magic != kMagic)
    throw ChannelFileError(ChannelFileError::Kind::kMalformed,
                           "bad magic in channel file");
  Reader r(in);
  if (r.get<std::uint32_t>() != kVersion)
    throw ChannelFileError(ChannelFileError::Kind::kMalformed,
                           "unsupported channel file version");
  const std::uint64_t m = r.get<std::uint32_t>();
  const std::uint64_t n = r.get<std::uint32_t>();
  const std::uint64_t k = r.get<std::uint32_t>();
  const std::uint64_t header = kMagic.size() + 4 * 4 + 8;
  const std::uint64_t expected = header + k + 16 * (m * n + k * m);
  if (m == 0 || n == 0 || file_size != expected)
    throw ChannelFileError(ChannelFileError::Kind::kMalformed,
                           "declared dimensions do not match file size");

  ChannelSet cs;
  cs.seed = r.get<std::uint64_t>();
  for (std::uint64_t u = 0; u < k; ++u) {
    const auto side = r.get<std::uint8_t>();
    if (side > 1)
      throw ChannelFileError(ChannelFileError::Kind::kMalformed,
                             "invalid side label");
    cs.sides.push_back(Side(side));
  }
  cs.g.resize(Index(m), Index(n));
  for (Index i = 0; i < cs.g.rows(); ++i)
    for (Index j = 0; j < cs.g.cols(); ++j)
      cs.g(i, j) = r.get_complex();
  for (std::uint64_t u = 0; u < k; ++u) {
    ComplexVector hk(static_cast<Index>(m));
    for (Index c = 0; c < hk.size(); ++c)
      hk(c) = r.get_complex();
    cs.h.push_back(std::move(hk));
  }
  return cs;
}

} // namespace bdris
