#pragma once

#include <stdexcept>
#include <string>

namespace loadcast {

// Base error. `module()` names the pipeline stage that raised it and `kind()`
// the failure class; the CLI prints both on its machine-readable error line.
class Error : public std::runtime_error {
public:
    Error(std::string module, std::string kind, const std::string& what)
        : std::runtime_error(what), module_(std::move(module)), kind_(std::move(kind)) {}

    const std::string& module() const noexcept { return module_; }
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string module_;
    std::string kind_;
};

#define LOADCAST_DEFINE_ERROR(Name, Module)                                  \
    class Name : public Error {                                              \
    public:                                                                  \
        explicit Name(const std::string& what) : Error(Module, #Name, what) {} \
    };

LOADCAST_DEFINE_ERROR(MalformedRow, "road_ingest")
LOADCAST_DEFINE_ERROR(GapError, "road_ingest")
LOADCAST_DEFINE_ERROR(BoundsError, "road_ingest")
LOADCAST_DEFINE_ERROR(DegenerateSeries, "road_ingest")
LOADCAST_DEFINE_ERROR(ZeroSpeedInterval, "call_simulator")
LOADCAST_DEFINE_ERROR(DegenerateFeature, "features")
LOADCAST_DEFINE_ERROR(InsufficientData, "features")
LOADCAST_DEFINE_ERROR(EmptyBatch, "neuralnet")
LOADCAST_DEFINE_ERROR(ShapeMismatch, "neuralnet")
LOADCAST_DEFINE_ERROR(ConfigError, "cli")

#undef LOADCAST_DEFINE_ERROR

// Precondition violations on public entry points.
class InvalidArgument : public Error {
public:
    InvalidArgument(std::string module, const std::string& what)
        : Error(std::move(module), "InvalidArgument", what) {}
};

}  // namespace loadcast
