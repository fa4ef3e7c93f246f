#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace peaks {

enum class errc {
  evaluation,            // a sequence or expression evaluation failed
  parameter,             // argument outside its admissible range
  domination,            // an envelope / decrement inequality was violated
  certificate_required,  // the operation needs a tail bound or verified pair
  not_useful,            // the pair never exceeds h(0): the formula is +inf
  domain,                // value outside the invertible range of a function
  precondition,          // a sampled structural precondition failed
  orbit_divergence,      // an orbit coordinate left the safe magnitude range
  degenerate_input,      // no usable sample (e.g. no point with P in (0,inf))
  parse,                 // problem file or expression syntax error
  range,                 // a verified quantity landed outside its contract
  io,                    // file could not be read or written
  usage,                 // bad command line
};

class error : public std::runtime_error {
 public:
  error(errc code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

struct parse_error : error {
  parse_error(std::string message, std::size_t byte_offset)
      : error(errc::parse, std::move(message)), offset(byte_offset) {}
  std::size_t offset;
};

struct evaluation_error : error {
  evaluation_error(std::string message, long at_index)
      : error(errc::evaluation, std::move(message)), index(at_index) {}
  long index;
};

// Carries the first index where u_k exceeded its envelope value.
struct domination_error : error {
  domination_error(std::string message, long at_k, double term_value,
                   double bound_value)
      : error(errc::domination, std::move(message)),
        k(at_k),
        term(term_value),
        bound(bound_value) {}
  long k;
  double term;
  double bound;
};

struct orbit_divergence_error : error {
  orbit_divergence_error(std::string message, long at_step)
      : error(errc::orbit_divergence, std::move(message)), step(at_step) {}
  long step;
};

}  // namespace peaks
