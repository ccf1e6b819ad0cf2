#pragma once

#include <stdexcept>
#include <string>

namespace addinv {

//! Numerical failure inside the estimation pipeline (as opposed to a
//! precondition violation, which is reported as std::invalid_argument).
class PipelineError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! A kernel window contains no observations at an evaluation point.
class EmptyWindowError : public PipelineError
{
public:
  using PipelineError::PipelineError;
};

//! The design density vanishes on part of the backfitting grid.
class DegenerateDesignError : public PipelineError
{
public:
  using PipelineError::PipelineError;
};

class QuadratureError : public PipelineError
{
public:
  using PipelineError::PipelineError;
};

} // namespace addinv
