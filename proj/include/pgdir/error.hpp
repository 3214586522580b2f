// Copyright pgdir contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#ifndef PGDIR_ERROR_HPP
#define PGDIR_ERROR_HPP

#include <stdexcept>
#include <string>

namespace pgdir
{

// Base class for every error raised by the library. Callers that only care about
// "something in the pipeline failed" catch this one.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Degenerate or inverted element, bad material, bad load.
class AssemblyError : public Error
{
public:
  using Error::Error;
};

// Malformed input file (mesh, Matrix Market, JSON container).
class ParseError : public Error
{
public:
  using Error::Error;
};

// Incompatible shapes, spatial kinds or parametric grids.
class ShapeError : public Error
{
public:
  using Error::Error;
};

// Index or parameter value outside its admissible range.
class RangeError : public Error
{
public:
  using Error::Error;
};

// Reference DOF set does not suppress all rigid motions.
class InvalidReferenceSet : public Error
{
public:
  using Error::Error;
};

// A linear system that must be SPD could not be factorized.
class SingularSystem : public Error
{
public:
  using Error::Error;
};

// A required file or directory entry does not exist.
class MissingInput : public Error
{
public:
  using Error::Error;
};

}  // namespace pgdir

#endif  // PGDIR_ERROR_HPP
