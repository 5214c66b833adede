#include "lastiter/moments.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include <gmpxx.h>

#include "lastiter/errors.hpp"

namespace lastiter {

namespace {

constexpr int kScaleBits = 1074;

// x * 2^1074 as an exact integer.
mpz_class scaled_integer(double x) {
  int e = 0;
  const double m = std::frexp(x, &e);
  const auto mantissa = static_cast<std::int64_t>(std::ldexp(m, 53));
  mpz_class z(static_cast<long>(mantissa));
  const int shift = e - 53 + kScaleBits;
  if (shift >= 0) {
    mpz_mul_2exp(z.get_mpz_t(), z.get_mpz_t(), static_cast<mp_bitcnt_t>(shift));
  } else {
    mpz_tdiv_q_2exp(z.get_mpz_t(), z.get_mpz_t(), static_cast<mp_bitcnt_t>(-shift));
  }
  return z;
}

mpz_class power_of_two(int bits) {
  mpz_class z(1);
  mpz_mul_2exp(z.get_mpz_t(), z.get_mpz_t(), static_cast<mp_bitcnt_t>(bits));
  return z;
}

mpz_class parse_hex(const nlohmann::json& j, const char* key) {
  mpz_class z;
  if (z.set_str(j.at(key).get<std::string>(), 16) != 0)
    throw PreconditionError(std::string("moments: '") + key + "' is not a hex integer");
  return z;
}

}  // namespace

struct MomentAccumulator::Impl {
  std::uint64_t n = 0;
  mpz_class sum;     // scale 2^1074
  mpz_class sum_sq;  // scale 2^2148
};

MomentAccumulator::MomentAccumulator() : impl_(std::make_unique<Impl>()) {}
MomentAccumulator::MomentAccumulator(const MomentAccumulator& other)
    : impl_(std::make_unique<Impl>(*other.impl_)) {}
MomentAccumulator::MomentAccumulator(MomentAccumulator&&) noexcept = default;
MomentAccumulator& MomentAccumulator::operator=(const MomentAccumulator& other) {
  if (this != &other) *impl_ = *other.impl_;
  return *this;
}
MomentAccumulator& MomentAccumulator::operator=(MomentAccumulator&&) noexcept = default;
MomentAccumulator::~MomentAccumulator() = default;

void MomentAccumulator::add(double x) {
  if (!std::isfinite(x)) throw PreconditionError("moments: non-finite sample");
  const mpz_class z = scaled_integer(x);
  ++impl_->n;
  impl_->sum += z;
  impl_->sum_sq += z * z;
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  impl_->n += other.impl_->n;
  impl_->sum += other.impl_->sum;
  impl_->sum_sq += other.impl_->sum_sq;
}

std::uint64_t MomentAccumulator::count() const noexcept { return impl_->n; }

double MomentAccumulator::mean() const {
  if (impl_->n == 0) throw PreconditionError("moments: mean of an empty accumulator");
  mpq_class q(impl_->sum, mpz_class(static_cast<unsigned long>(impl_->n)) * power_of_two(kScaleBits));
  q.canonicalize();
  return q.get_d();
}

double MomentAccumulator::variance() const {
  if (impl_->n < 2) throw PreconditionError("moments: variance needs at least two samples");
  const mpz_class n(static_cast<unsigned long>(impl_->n));
  const mpz_class num = n * impl_->sum_sq - impl_->sum * impl_->sum;
  mpq_class q(num, n * (n - 1) * power_of_two(2 * kScaleBits));
  q.canonicalize();
  return q.get_d();
}

bool MomentAccumulator::operator==(const MomentAccumulator& other) const {
  return impl_->n == other.impl_->n && impl_->sum == other.impl_->sum &&
         impl_->sum_sq == other.impl_->sum_sq;
}

nlohmann::json MomentAccumulator::to_json() const {
  return {{"count", impl_->n},
          {"sum", impl_->sum.get_str(16)},
          {"sum_sq", impl_->sum_sq.get_str(16)},
          {"scale_bits", kScaleBits}};
}

MomentAccumulator MomentAccumulator::from_json(const nlohmann::json& j) {
  MomentAccumulator m;
  try {
    if (j.at("scale_bits").get<int>() != kScaleBits)
      throw PreconditionError("moments: unsupported scale");
    m.impl_->n = j.at("count").get<std::uint64_t>();
    m.impl_->sum = parse_hex(j, "sum");
    m.impl_->sum_sq = parse_hex(j, "sum_sq");
  } catch (const nlohmann::json::exception& e) {
    throw PreconditionError(std::string("moments: ") + e.what());
  }
  if (m.impl_->sum_sq < 0) throw PreconditionError("moments: negative sum of squares");
  return m;
}

}  // namespace lastiter
