#include "chandis/channels.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

#include <json.hpp>

#include "chandis/errors.hpp"

namespace chandis {

namespace {

void check_kraus_count(std::size_t n) {
  if (n > kMaxKrausCount) {
    throw SizeError("Kraus count " + std::to_string(n) + " exceeds cap " + std::to_string(kMaxKrausCount));
  }
}

ComplexMatrix hermitize(const ComplexMatrix& m) { return 0.5 * (m + m.adjoint()); }

}  // namespace

KrausChannel::KrausChannel(std::vector<ComplexMatrix> kraus, std::string label, Unchecked)
    : kraus_(std::move(kraus)), label_(std::move(label)) {
  if (kraus_.empty()) throw ShapeError("KrausChannel: empty Kraus set");
  out_dim_ = static_cast<std::size_t>(kraus_.front().rows());
  in_dim_ = static_cast<std::size_t>(kraus_.front().cols());
  for (const auto& k : kraus_) {
    if (static_cast<std::size_t>(k.rows()) != out_dim_ || static_cast<std::size_t>(k.cols()) != in_dim_) {
      throw ShapeError("KrausChannel: Kraus operators have inconsistent shapes");
    }
  }
  if (in_dim_ == 0 || out_dim_ == 0 || in_dim_ > kMaxDim || out_dim_ > kMaxDim) {
    throw SizeError("KrausChannel: dimension out of range");
  }
  check_kraus_count(kraus_.size());
}

KrausChannel::KrausChannel(std::vector<ComplexMatrix> kraus, std::string label)
    : KrausChannel(std::move(kraus), std::move(label), Unchecked{}) {
  for (const auto& k : kraus_) {
    if (!k.allFinite()) throw ContractError("KrausChannel: non-finite entry");
  }
  if (trace_preservation_error(*this) > kHermitianTol) {
    throw ContractError("KrausChannel '" + label_ + "' is not trace preserving");
  }
  if (in_dim_ * out_dim_ <= 256 && choi_min_eigenvalue(*this) < kPsdTol) {
    throw ContractError("KrausChannel '" + label_ + "' is not completely positive");
  }
}

KrausChannel KrausChannel::trusted(std::vector<ComplexMatrix> kraus, std::string label) {
  return KrausChannel(std::move(kraus), std::move(label), Unchecked{});
}

double trace_preservation_error(const KrausChannel& ch) {
  const auto n = static_cast<Eigen::Index>(ch.in_dim());
  ComplexMatrix acc = ComplexMatrix::Zero(n, n);
  for (const auto& k : ch.kraus()) acc.noalias() += k.adjoint() * k;
  return (acc - ComplexMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

double choi_min_eigenvalue(const KrausChannel& ch) {
  return hermitian_eigenvalues(hermitize(choi(ch))).minCoeff();
}

bool is_cptp(const KrausChannel& ch) {
  return trace_preservation_error(ch) <= kHermitianTol && choi_min_eigenvalue(ch) >= kPsdTol;
}

ComplexMatrix apply(const KrausChannel& ch, const ComplexMatrix& rho) {
  if (static_cast<std::size_t>(rho.rows()) != ch.in_dim() || rho.rows() != rho.cols()) {
    throw ShapeError("apply: state dim " + std::to_string(rho.rows()) + " != channel input dim " +
                     std::to_string(ch.in_dim()));
  }
  const auto m = static_cast<Eigen::Index>(ch.out_dim());
  ComplexMatrix out = ComplexMatrix::Zero(m, m);
  ComplexMatrix tmp;
  for (const auto& k : ch.kraus()) {
    tmp.noalias() = k * rho;
    out.noalias() += tmp * k.adjoint();
  }
  return out;
}

DensityMatrix apply(const KrausChannel& ch, const DensityMatrix& rho) {
  return DensityMatrix::trusted(hermitize(apply(ch, rho.matrix())));
}

ComplexMatrix apply_dual(const KrausChannel& ch, const ComplexMatrix& observable) {
  if (static_cast<std::size_t>(observable.rows()) != ch.out_dim() || observable.rows() != observable.cols()) {
    throw ShapeError("apply_dual: observable dim does not match channel output dim");
  }
  const auto n = static_cast<Eigen::Index>(ch.in_dim());
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  ComplexMatrix tmp;
  for (const auto& k : ch.kraus()) {
    tmp.noalias() = k.adjoint() * observable;
    out.noalias() += tmp * k;
  }
  return out;
}

KrausChannel identity_channel(std::size_t dim) {
  if (dim == 0 || dim > kMaxDim) throw SizeError("identity_channel: bad dimension");
  const auto n = static_cast<Eigen::Index>(dim);
  return KrausChannel::trusted({ComplexMatrix::Identity(n, n)}, "identity");
}

KrausChannel depolarizing(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw ContractError("depolarizing: alpha must lie in [0, 1], got " + std::to_string(alpha));
  }
  const double a = std::sqrt(1.0 - alpha);
  const double b = std::sqrt(alpha / 3.0);
  return KrausChannel::trusted({a * pauli::identity(), b * pauli::x(), b * pauli::y(), b * pauli::z()},
                               "depolarizing(" + std::to_string(alpha) + ")");
}

namespace {

// |out><in| for a 2-dim ket and a 4-dim bra, scaled.
ComplexMatrix outer(const ComplexVector& ket, const ComplexVector& bra, double scale = 1.0) {
  return scale * ket * bra.adjoint();
}

ComplexVector ket(std::initializer_list<cplx> amps) {
  ComplexVector v(static_cast<Eigen::Index>(amps.size()));
  Eigen::Index i = 0;
  for (auto a : amps) v(i++) = a;
  return v;
}

}  // namespace

KrausChannel eb_channel_a() {
  const double h = std::numbers::sqrt2 / 2.0;
  const auto k0 = ket({1, 0});
  const auto k1 = ket({0, 1});
  const auto b00 = ket({1, 0, 0, 0});
  const auto b01 = ket({0, 1, 0, 0});
  const auto b10 = ket({0, 0, 1, 0});
  const auto b11 = ket({0, 0, 0, 1});
  return KrausChannel({outer(k0, b00), outer(k0, b01), outer(k0, b10), outer(k0, b11, h), outer(k1, b11, h)},
                      "eb-A");
}

KrausChannel eb_channel_b() {
  const double h = std::numbers::sqrt2 / 2.0;
  const auto k0 = ket({1, 0});
  const auto k1 = ket({0, 1});
  const auto plus = ket({h, h});
  const auto b00 = ket({1, 0, 0, 0});
  const auto b01 = ket({0, 1, 0, 0});
  const auto b1plus = ket({0, 0, h, h});
  const auto b1minus = ket({0, 0, h, -h});
  return KrausChannel({outer(plus, b00), outer(plus, b01), outer(k1, b1plus), outer(k0, b1minus, h),
                       outer(k1, b1minus, h)},
                      "eb-B");
}

KrausChannel tensor(const KrausChannel& a, const KrausChannel& b) {
  check_kraus_count(a.size() * b.size());
  std::vector<ComplexMatrix> out;
  out.reserve(a.size() * b.size());
  for (const auto& ka : a.kraus())
    for (const auto& kb : b.kraus()) out.push_back(chandis::tensor(ka, kb));
  return KrausChannel::trusted(std::move(out), a.label() + "*" + b.label());
}

KrausChannel tensor_channels(const KrausChannel& ch, std::size_t p) {
  if (p == 0) throw ContractError("tensor_channels: p must be at least 1");
  std::size_t count = 1;
  for (std::size_t i = 0; i < p; ++i) {
    count *= ch.size();
    check_kraus_count(count);
  }
  KrausChannel out = ch;
  for (std::size_t i = 1; i < p; ++i) out = tensor(out, ch);
  return KrausChannel::trusted(std::vector<ComplexMatrix>(out.kraus()),
                               p == 1 ? ch.label() : ch.label() + "^" + std::to_string(p));
}

KrausChannel embed(const KrausChannel& ch, std::size_t qubits_before, std::size_t qubits_after) {
  if (qubits_before >= 12 || qubits_after >= 12) throw SizeError("embed: register too large");
  const auto before = static_cast<Eigen::Index>(std::size_t{1} << qubits_before);
  const auto after = static_cast<Eigen::Index>(std::size_t{1} << qubits_after);
  std::vector<ComplexMatrix> out;
  out.reserve(ch.size());
  for (const auto& k : ch.kraus()) {
    ComplexMatrix m = k;
    if (before > 1) m = chandis::tensor(ComplexMatrix::Identity(before, before), m);
    if (after > 1) m = chandis::tensor(m, ComplexMatrix::Identity(after, after));
    out.push_back(std::move(m));
  }
  return KrausChannel::trusted(std::move(out), ch.label());
}

KrausChannel extend_identity(const KrausChannel& ch, std::size_t r) { return embed(ch, 0, r); }

KrausChannel compose(const KrausChannel& b, const KrausChannel& a) {
  if (a.out_dim() != b.in_dim()) {
    throw ShapeError("compose: output dim of first channel does not match input dim of second");
  }
  check_kraus_count(a.size() * b.size());
  std::vector<ComplexMatrix> out;
  out.reserve(a.size() * b.size());
  for (const auto& kb : b.kraus())
    for (const auto& ka : a.kraus()) out.push_back(kb * ka);
  return KrausChannel::trusted(std::move(out), b.label() + "o" + a.label());
}

ComplexMatrix choi(const KrausChannel& ch) {
  const auto din = static_cast<Eigen::Index>(ch.in_dim());
  const auto dout = static_cast<Eigen::Index>(ch.out_dim());
  // sum_k vec_k vec_k^dagger / d_in with vec_k = sum_i (K_k |i>) (x) |i>
  ComplexMatrix acc = ComplexMatrix::Zero(dout * din, dout * din);
  ComplexVector v(dout * din);
  for (const auto& k : ch.kraus()) {
    for (Eigen::Index a = 0; a < dout; ++a)
      for (Eigen::Index i = 0; i < din; ++i) v(a * din + i) = k(a, i);
    acc.noalias() += v * v.adjoint();
  }
  return acc / static_cast<double>(din);
}

ComplexMatrix insert_fresh_qubit(const ComplexMatrix& rho, QubitPosition position) {
  ComplexMatrix zero = ComplexMatrix::Zero(2, 2);
  zero(0, 0) = 1.0;
  return position == QubitPosition::Front ? chandis::tensor(zero, rho) : chandis::tensor(rho, zero);
}

DensityMatrix insert_fresh_qubit(const DensityMatrix& rho, QubitPosition position) {
  return DensityMatrix::trusted(insert_fresh_qubit(rho.matrix(), position));
}

ComplexMatrix fresh_qubit_dual(const ComplexMatrix& observable, QubitPosition position) {
  const Eigen::Index d = observable.rows();
  if (d % 2 != 0 || observable.cols() != d) throw ShapeError("fresh_qubit_dual: odd dimension");
  const Eigen::Index h = d / 2;
  if (position == QubitPosition::Front) return observable.topLeftCorner(h, h);
  ComplexMatrix out(h, h);
  for (Eigen::Index j = 0; j < h; ++j)
    for (Eigen::Index i = 0; i < h; ++i) out(i, j) = observable(2 * i, 2 * j);
  return out;
}

namespace {

using nlohmann::json;

cplx parse_complex(const json& v) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ConfigError("channel config: complex entries must be [re, im] pairs");
}

ComplexMatrix parse_matrix(const json& rows) {
  if (!rows.is_array() || rows.empty() || !rows[0].is_array() || rows[0].empty()) {
    throw ConfigError("channel config: matrix must be a non-empty array of rows");
  }
  const auto r = static_cast<Eigen::Index>(rows.size());
  const auto c = static_cast<Eigen::Index>(rows[0].size());
  ComplexMatrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c) {
      throw ConfigError("channel config: ragged matrix rows");
    }
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = parse_complex(row[static_cast<std::size_t>(j)]);
  }
  return m;
}

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed) {
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError("channel config: unknown key '" + key + "'");
  }
}

KrausChannel channel_from_json(const json& obj) {
  if (!obj.is_object() || !obj.contains("type") || !obj["type"].is_string()) {
    throw ConfigError("channel config: expected an object with a string 'type'");
  }
  const auto type = obj["type"].get<std::string>();
  if (type == "depolarizing") {
    reject_unknown(obj, {"type", "alpha"});
    if (!obj.contains("alpha") || !obj["alpha"].is_number()) {
      throw ConfigError("channel config: depolarizing needs numeric 'alpha'");
    }
    const double alpha = obj["alpha"].get<double>();
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("channel config: alpha outside [0, 1]");
    return depolarizing(alpha);
  }
  if (type == "kraus") {
    reject_unknown(obj, {"type", "matrices", "label"});
    if (!obj.contains("matrices") || !obj["matrices"].is_array()) {
      throw ConfigError("channel config: kraus needs 'matrices'");
    }
    std::vector<ComplexMatrix> ks;
    for (const auto& m : obj["matrices"]) ks.push_back(parse_matrix(m));
    std::string label = obj.value("label", std::string("kraus"));
    try {
      return KrausChannel(std::move(ks), std::move(label));
    } catch (const std::exception& e) {
      throw ConfigError(std::string("channel config: ") + e.what());
    }
  }
  if (type == "eb-A") {
    reject_unknown(obj, {"type"});
    return eb_channel_a();
  }
  if (type == "eb-B") {
    reject_unknown(obj, {"type"});
    return eb_channel_b();
  }
  if (type == "identity") {
    reject_unknown(obj, {"type", "dim"});
    const auto dim = obj.value("dim", 2);
    if (dim <= 0) throw ConfigError("channel config: identity dim must be positive");
    return identity_channel(static_cast<std::size_t>(dim));
  }
  throw ConfigError("channel config: unknown channel type '" + type + "'");
}

}  // namespace

KrausChannel parse_channel(std::string_view json_text) {
  json obj;
  try {
    obj = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("channel config: ") + e.what());
  }
  return channel_from_json(obj);
}

KrausChannel channel_by_name(std::string_view name) {
  if (name == "eb-A") return eb_channel_a();
  if (name == "eb-B") return eb_channel_b();
  if (name == "identity") return identity_channel(2);
  for (std::string_view prefix : {"dep:", "depolarizing:"}) {
    if (name.starts_with(prefix)) {
      const auto rest = name.substr(prefix.size());
      double alpha = 0.0;
      const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), alpha);
      if (ec != std::errc{} || ptr != rest.data() + rest.size()) {
        throw ConfigError("bad depolarizing factor in channel name '" + std::string(name) + "'");
      }
      if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("depolarizing factor outside [0, 1]");
      return depolarizing(alpha);
    }
  }
  if (!name.empty() && name.front() == '{') return parse_channel(name);
  throw ConfigError("unknown channel '" + std::string(name) + "'");
}

}  // namespace chandis
