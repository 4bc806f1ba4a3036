#pragma once

#include <stdexcept>
#include <string>

namespace egm {

// Base error. The four direct subclasses below map 1:1 onto CLI exit codes
// (config=2, io=3, data=4, checkpoint=5); more specific errors derive from them
// so library callers can catch precisely and the CLI can catch coarsely.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};
struct DataError : Error {
    using Error::Error;
};
struct CheckpointError : Error {
    using Error::Error;
};

// --- signal / preprocessing ---
struct AllZeroSignal : DataError {
    AllZeroSignal() : DataError("signal is identically zero") {}
};
struct SignalTooShort : DataError {
    using DataError::DataError;
};
struct WrongLength : DataError {
    using DataError::DataError;
};
struct OverlappingSplit : DataError {
    using DataError::DataError;
};
struct UnassignedPatient : DataError {
    using DataError::DataError;
};
struct MissingAnnotations : DataError {
    using DataError::DataError;
};
struct UnlabeledData : DataError {
    using DataError::DataError;
};

// --- rule classifier ---
struct InvalidCycleLength : DataError {
    using DataError::DataError;
};
struct InconsistentInput : DataError {
    using DataError::DataError;
};
struct EmptyGrid : ConfigError {
    using ConfigError::ConfigError;
};

// --- metrics ---
struct LengthMismatch : DataError {
    using DataError::DataError;
};
struct EmptyInput : DataError {
    using DataError::DataError;
};
struct EmptyMatrix : DataError {
    using DataError::DataError;
};
struct InvalidLabel : DataError {
    using DataError::DataError;
};

// --- neural net ---
struct ShapeMismatch : DataError {
    using DataError::DataError;
};
struct WrongInputLength : DataError {
    using DataError::DataError;
};
struct NonFiniteLoss : Error {
    using Error::Error;
};
struct InvalidConfig : ConfigError {
    using ConfigError::ConfigError;
};

// --- checkpoints ---
struct CorruptCheckpoint : CheckpointError {
    using CheckpointError::CheckpointError;
};
struct VersionMismatch : CheckpointError {
    using CheckpointError::CheckpointError;
};
struct KeySetMismatch : CheckpointError {
    using CheckpointError::CheckpointError;
};

} // namespace egm
