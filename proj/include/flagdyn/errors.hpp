#pragma once

#include <stdexcept>
#include <string>

namespace flagdyn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input matrix is not (close enough to) an element of SL(n,R).
class InvalidGroupElementError : public Error {
public:
    using Error::Error;
};

/// A diagonal entry of the Iwasawa A factor collapsed below 1e-14.
class NumericalRankError : public Error {
public:
    using Error::Error;
};

/// Log-eigenvalues are not separated by more than the regularity tolerance.
class NotRegularError : public Error {
public:
    using Error::Error;
};

class ComplexSpectrumError : public Error {
public:
    using Error::Error;
};

class NotASubgroupError : public Error {
public:
    using Error::Error;
};

class NoConvergenceError : public Error {
public:
    using Error::Error;
};

class UnsupportedSpaceError : public Error {
public:
    using Error::Error;
};

class NoRegularElementError : public Error {
public:
    using Error::Error;
};

/// Two distinct control sets reach each other; epsilon is too coarse.
class CycleError : public Error {
public:
    using Error::Error;
};

class FactorizationError : public Error {
public:
    using Error::Error;
};

}  // namespace flagdyn
