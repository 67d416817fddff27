#include "casad/model_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "casad/errors.hpp"

namespace casad {

namespace {

constexpr char kMagic[9] = {'C', 'A', 'S', 'A', 'D', 'M', 'D', 'L', '\x01'};

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<unsigned char, 8> b;
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b.data()), 8);
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> b;
  in.read(reinterpret_cast<char*>(b.data()), 8);
  if (!in) throw MalformedLine("truncated model file");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

double get_f64(std::istream& in) {
  const std::uint64_t bits = get_u64(in);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

}  // namespace

void save_model(const SsaModel& model, std::ostream& out) {
  out.write(kMagic, sizeof(kMagic));
  put_u64(out, model.config().train_length);
  put_u64(out, model.lag());
  put_u64(out, model.dimension());
  const auto& rule = model.config().rule;
  const unsigned char kind =
      rule.kind == DimensionRule::Kind::Explicit ? 0 : 1;
  out.write(reinterpret_cast<const char*>(&kind), 1);
  put_f64(out, rule.energy);
  put_f64(out, model.total_energy());
  put_f64(out, model.training_score_max());
  for (double e : model.eigenvalues()) put_f64(out, e);
  for (double c : model.centroid()) put_f64(out, c);
  const Matrix& u = model.basis();
  for (std::size_t i = 0; i < u.rows(); ++i) {
    for (std::size_t j = 0; j < u.cols(); ++j) put_f64(out, u(i, j));
  }
}

void save_model(const SsaModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw EmptyResult("cannot open model file for writing: " + path);
  save_model(model, out);
  if (!out) throw EmptyResult("failed writing model file: " + path);
}

SsaModel load_model(std::istream& in) {
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw MalformedLine("not a model file (bad magic)");
  }
  LagConfig config;
  config.train_length = static_cast<std::size_t>(get_u64(in));
  config.lag = static_cast<std::size_t>(get_u64(in));
  const std::size_t r = static_cast<std::size_t>(get_u64(in));
  unsigned char kind = 0;
  in.read(reinterpret_cast<char*>(&kind), 1);
  if (!in) throw MalformedLine("truncated model file");
  const double energy = get_f64(in);
  config.rule = kind == 0 ? DimensionRule::explicit_r(r)
                          : DimensionRule::energy_fraction(energy);
  const double total_energy = get_f64(in);
  const double training_score_max = get_f64(in);

  std::vector<double> eigenvalues(r), centroid(r);
  for (auto& e : eigenvalues) e = get_f64(in);
  for (auto& c : centroid) c = get_f64(in);
  Matrix basis(config.lag, r);
  for (std::size_t i = 0; i < config.lag; ++i) {
    for (std::size_t j = 0; j < r; ++j) basis(i, j) = get_f64(in);
  }
  return SsaModel::from_parts(config, r, std::move(basis),
                              std::move(eigenvalues), std::move(centroid),
                              total_energy, training_score_max);
}

SsaModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EmptyResult("cannot open model file: " + path);
  return load_model(in);
}

}  // namespace casad
