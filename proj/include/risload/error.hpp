// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace risload {

/// Base class for all library failures that carry a numerical meaning.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A fixed-point or outer iteration did not reach its tolerance.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, double residual, int iterations)
        : Error(what), residual_(residual), iterations_(iterations) {}
    double residual() const noexcept { return residual_; }
    int iterations() const noexcept { return iterations_; }

private:
    double residual_;
    int iterations_;
};

/// Some UE has an exactly-zero useful gain, so no finite load serves it.
class DemandUnservable : public Error {
public:
    DemandUnservable(const std::string& what, int ue) : Error(what), ue_(ue) {}
    int ue() const noexcept { return ue_; }

private:
    int ue_;
};

/// Exhaustive enumeration would exceed the configured candidate budget.
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

/// Interior-point solve or MM step failed.
class SolverFailure : public Error {
public:
    SolverFailure(const std::string& what, int iteration = -1, int cell = -1)
        : Error(what), iteration_(iteration), cell_(cell) {}
    int iteration() const noexcept { return iteration_; }
    int cell() const noexcept { return cell_; }

private:
    int iteration_;
    int cell_;
};

/// A requested plot series is not present in the result table.
class MissingSeries : public Error {
public:
    using Error::Error;
};

/// Malformed experiment or scenario description.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace risload
