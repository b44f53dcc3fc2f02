#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace semcast {

enum class Errc {
  // scene-ir
  EmptyInput,
  UnbalancedTag,
  MalformedAttribute,
  MalformedMarkup,
  MultipleCodeBlocks,
  NonPrefixedTag,
  EmptyGraph,
  BadNodePath,
  // semantic-uplink
  InvalidPeriod,
  ZeroDuration,
  AdapterUnavailable,
  TraceMiss,
  OutOfRange,
  TimestampRegression,
  // agent-orchestrator
  BackendUnavailable,
  EmptyCompletion,
  EmptyDescription,
  ValidationExhausted,
  ParseFailure,
  EmptyAfterFilter,
  // mulsemedia
  EmptyLayout,
  // transport
  NoSamples,
  NonMonotoneSample,
  NegativeRtt,
  BrokerUnavailable,
  PayloadTooLarge,
  EmptyWindow,
  ProtocolError,
  // baseline / bench
  EmptyTrace,
  NegativeComponent,
  ZeroBaseline,
  OursExceedsBaseline,
  EmptyText,
  DatasetMissing,
  PartialRun,
  // gateway
  DuplicateKey,
  StorageFailure,
  EmptyStore,
  ConfigError,
  InvalidArgument,
};

constexpr std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::UnbalancedTag: return "UnbalancedTag";
    case Errc::MalformedAttribute: return "MalformedAttribute";
    case Errc::MalformedMarkup: return "MalformedMarkup";
    case Errc::MultipleCodeBlocks: return "MultipleCodeBlocks";
    case Errc::NonPrefixedTag: return "NonPrefixedTag";
    case Errc::EmptyGraph: return "EmptyGraph";
    case Errc::BadNodePath: return "BadNodePath";
    case Errc::InvalidPeriod: return "InvalidPeriod";
    case Errc::ZeroDuration: return "ZeroDuration";
    case Errc::AdapterUnavailable: return "AdapterUnavailable";
    case Errc::TraceMiss: return "TraceMiss";
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::TimestampRegression: return "TimestampRegression";
    case Errc::BackendUnavailable: return "BackendUnavailable";
    case Errc::EmptyCompletion: return "EmptyCompletion";
    case Errc::EmptyDescription: return "EmptyDescription";
    case Errc::ValidationExhausted: return "ValidationExhausted";
    case Errc::ParseFailure: return "ParseFailure";
    case Errc::EmptyAfterFilter: return "EmptyAfterFilter";
    case Errc::EmptyLayout: return "EmptyLayout";
    case Errc::NoSamples: return "NoSamples";
    case Errc::NonMonotoneSample: return "NonMonotoneSample";
    case Errc::NegativeRtt: return "NegativeRtt";
    case Errc::BrokerUnavailable: return "BrokerUnavailable";
    case Errc::PayloadTooLarge: return "PayloadTooLarge";
    case Errc::EmptyWindow: return "EmptyWindow";
    case Errc::ProtocolError: return "ProtocolError";
    case Errc::EmptyTrace: return "EmptyTrace";
    case Errc::NegativeComponent: return "NegativeComponent";
    case Errc::ZeroBaseline: return "ZeroBaseline";
    case Errc::OursExceedsBaseline: return "OursExceedsBaseline";
    case Errc::EmptyText: return "EmptyText";
    case Errc::DatasetMissing: return "DatasetMissing";
    case Errc::PartialRun: return "PartialRun";
    case Errc::DuplicateKey: return "DuplicateKey";
    case Errc::StorageFailure: return "StorageFailure";
    case Errc::EmptyStore: return "EmptyStore";
    case Errc::ConfigError: return "ConfigError";
    case Errc::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure raised by the library. The code names the failure class;
/// the message carries the detail (offsets, paths, values).
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace semcast
