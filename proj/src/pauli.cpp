#include "qvol/pauli.hpp"

#include <stdexcept>

namespace qvol {

PauliString::PauliString(int num_qubits)
    : x_(num_qubits, 0), z_(num_qubits, 0), phase_(0) {
  if (num_qubits < 0)
    throw std::invalid_argument("PauliString: negative qubit count");
}

PauliString::PauliString(std::vector<std::uint8_t> x,
                         std::vector<std::uint8_t> z, int phase_power)
    : x_(std::move(x)), z_(std::move(z)), phase_(((phase_power % 4) + 4) % 4) {
  if (x_.size() != z_.size())
    throw std::invalid_argument("PauliString: inconsistent bit vectors");
  for (std::size_t i = 0; i < x_.size(); ++i)
    if (x_[i] > 1 || z_[i] > 1)
      throw std::invalid_argument("PauliString: bits must be 0 or 1");
}

PauliString PauliString::from_xz(const std::vector<int>& x,
                                 const std::vector<int>& z) {
  if (x.size() != z.size())
    throw std::invalid_argument("from_xz: size mismatch");
  std::vector<std::uint8_t> xb(x.begin(), x.end()), zb(z.begin(), z.end());
  return PauliString(std::move(xb), std::move(zb), 0);
}

cplx PauliString::phase() const {
  static const cplx table[4] = {cplx(1, 0), cplx(0, 1), cplx(-1, 0),
                                cplx(0, -1)};
  return table[phase_];
}

bool PauliString::is_identity_pattern() const {
  for (std::size_t i = 0; i < x_.size(); ++i)
    if (x_[i] || z_[i]) return false;
  return true;
}

bool PauliString::is_hermitian() const {
  int xz = 0;
  for (std::size_t i = 0; i < x_.size(); ++i) xz += x_[i] & z_[i];
  return ((phase_ - xz) % 2) == 0;
}

bool PauliString::commutes(const PauliString& other) const {
  if (x_.size() != other.x_.size())
    throw std::invalid_argument("commutes: size mismatch");
  int sym = 0;
  for (std::size_t i = 0; i < x_.size(); ++i)
    sym += (x_[i] & other.z_[i]) ^ (z_[i] & other.x_[i]);
  return (sym % 2) == 0;
}

PauliString PauliString::operator*(const PauliString& other) const {
  if (x_.size() != other.x_.size())
    throw std::invalid_argument("PauliString product: size mismatch");
  // (X^a Z^b)(X^c Z^d): commuting Z^b past X^c costs (-1)^(b.c).
  int bc = 0;
  std::vector<std::uint8_t> x(x_.size()), z(z_.size());
  for (std::size_t i = 0; i < x_.size(); ++i) {
    bc += z_[i] & other.x_[i];
    x[i] = x_[i] ^ other.x_[i];
    z[i] = z_[i] ^ other.z_[i];
  }
  return PauliString(std::move(x), std::move(z),
                     phase_ + other.phase_ + 2 * (bc % 2));
}

bool PauliString::operator==(const PauliString& other) const {
  return x_ == other.x_ && z_ == other.z_ && phase_ == other.phase_;
}

PauliString PauliString::transposed() const {
  int ab = 0;
  for (std::size_t i = 0; i < x_.size(); ++i) ab += x_[i] & z_[i];
  return PauliString(x_, z_, phase_ + 2 * (ab % 2));
}

PauliString PauliString::adjoint() const {
  int ab = 0;
  for (std::size_t i = 0; i < x_.size(); ++i) ab += x_[i] & z_[i];
  return PauliString(x_, z_, -phase_ + 2 * (ab % 2));
}

void PauliString::conjugate_h(int q) {
  // H X H = Z, H Z H = X, so H (X^x Z^z) H = Z^x X^z = (-1)^(xz) X^z Z^x.
  if (x_[q] & z_[q]) phase_ = (phase_ + 2) % 4;
  std::swap(x_[q], z_[q]);
}

void PauliString::conjugate_s(int q) {
  // S X Sdg = iXZ, S Z Sdg = Z.
  phase_ = (phase_ + x_[q]) % 4;
  z_[q] ^= x_[q];
}

void PauliString::conjugate_cnot(int control, int target) {
  // X_c -> X_c X_t, Z_t -> Z_c Z_t; no phase in the i^p X^a Z^b convention.
  x_[target] ^= x_[control];
  z_[control] ^= z_[target];
}

void PauliString::apply(StateVector& state) const {
  const int m = state.num_qubits();
  if (m != num_qubits())
    throw std::invalid_argument("PauliString::apply: size mismatch");
  std::size_t xmask = 0, zmask = 0;
  for (int q = 0; q < m; ++q) {
    if (x_[q]) xmask |= std::size_t(1) << (m - 1 - q);
    if (z_[q]) zmask |= std::size_t(1) << (m - 1 - q);
  }
  const cplx ph = phase();
  const auto& in = state.amplitudes();
  std::vector<cplx> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    const bool neg = __builtin_parityll(i & zmask);
    out[i ^ xmask] = (neg ? -ph : ph) * in[i];
  }
  state.amplitudes() = std::move(out);
}

Eigen::MatrixXcd PauliString::dense() const {
  const int m = num_qubits();
  const std::size_t d = std::size_t(1) << m;
  std::size_t xmask = 0, zmask = 0;
  for (int q = 0; q < m; ++q) {
    if (x_[q]) xmask |= std::size_t(1) << (m - 1 - q);
    if (z_[q]) zmask |= std::size_t(1) << (m - 1 - q);
  }
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
  const cplx ph = phase();
  for (std::size_t col = 0; col < d; ++col) {
    const bool neg = __builtin_parityll(col & zmask);
    out(col ^ xmask, col) = neg ? -ph : ph;
  }
  return out;
}

std::string PauliString::str() const {
  int y_count = 0;
  std::string letters;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    if (x_[i] && z_[i]) {
      letters += 'Y';
      ++y_count;
    } else if (x_[i]) {
      letters += 'X';
    } else if (z_[i]) {
      letters += 'Z';
    } else {
      letters += 'I';
    }
  }
  static const char* prefix[4] = {"+", "+i", "-", "-i"};
  return prefix[((phase_ - y_count) % 4 + 4) % 4] + letters;
}

}  // namespace qvol
