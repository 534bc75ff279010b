#pragma once

// CSV / JSON sequence files. Sequences are `t,a,u_1..u_d`, states are
// `t,x_1..x_d`, both with a header row. JSON sequences are objects with "a",
// "u" (n rows of d) and optional "x0".

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

#include "swr/recurrence.hpp"

namespace swr {

/// A file that cannot be opened or parsed.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SequenceFile {
  Vector<double> a;
  TimeMajor<double> u;
  RowVector<double> x0;  // empty when the file has none

  Coefficients coefficients() const { return Coefficients(a); }
  Inputs inputs() const;
};

/// `digits` significant digits; 17 round-trips every double.
std::string format_real(double x, int digits = 17);

void write_sequence_csv(std::ostream& out, const Vector<double>& a, const TimeMajor<double>& u, int digits = 17);
void write_states_csv(std::ostream& out, const TimeMajor<double>& x, int digits = 17);

SequenceFile parse_sequence_csv(std::istream& in);
TimeMajor<double> parse_states_csv(std::istream& in);
SequenceFile parse_sequence_json(std::istream& in);

/// Dispatches on the extension (".json" or anything else as CSV).
SequenceFile read_sequence(const std::string& path);
TimeMajor<double> read_states(const std::string& path);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

}  // namespace swr
