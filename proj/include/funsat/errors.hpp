#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace funsat {

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
  public:
	using std::runtime_error::runtime_error;
};

/// Malformed or semantically invalid `.bench` input.
class ParseError : public Error
{
  public:
	ParseError(std::size_t line, const std::string &what)
	    : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line)
	{
	}

	/// 1-based source line, or 0 when the problem is not tied to a line.
	std::size_t line() const { return line_; }

  private:
	std::size_t line_;
};

/// A structural invariant of a netlist does not hold.
class NetlistError : public Error
{
  public:
	using Error::Error;
};

/// Vector or sequence sizes do not match the circuit they are applied to.
class DimensionMismatch : public Error
{
  public:
	using Error::Error;
};

/// Exhaustive enumeration would exceed the configured cap.
class EnumerationCapExceeded : public Error
{
  public:
	using Error::Error;
};

/// The solver hit its conflict budget before reaching an answer.
class BudgetExceeded : public Error
{
  public:
	using Error::Error;
};

/// The wall-clock budget of a run expired.
class TimeoutError : public Error
{
  public:
	using Error::Error;
};

/// An attack reached its configured maximum unrolling depth.
class DepthCapReached : public Error
{
  public:
	using Error::Error;
};

/// No key is consistent with the oracle responses collected so far.
class InconsistentOracle : public Error
{
  public:
	using Error::Error;
};

/// An encryptor could not build an instance with the requested parameters.
class GenerationFailure : public Error
{
  public:
	using Error::Error;
};

} // namespace funsat
