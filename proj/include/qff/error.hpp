#pragma once

#include <stdexcept>
#include <string>

namespace qff {

enum class Errc {
  NonPrime,
  SizeExceeded,
  ZeroPolynomial,
  DivisionByZero,
  EvenCharacteristic,
  OddCharacteristic,
  NotEffective,
  Overflow,
  ParseError,
  CapExceeded,
  OverlappingSupport,
  IsSquareClass,
  ConstantFieldExtension,
  NotAGenerator,
  InvalidDiscriminantShape,
  NoSuchDiscriminant,
  EvenDegreePlace,
  NotIntegralAtModulus,
  InfinityInModulus,
  RingMismatch,
  NotPrimitive,
  PlaceInSupport,
  NotASubgroup,
  PrincipalCharacter,
  PoleAt,
  EvaluationOnCriticalCircle,
  OutsideValidityRegion,
  FieldMismatch,
  BadConfig,
};

inline const char* errc_name(Errc e) {
  switch (e) {
    case Errc::NonPrime: return "NonPrime";
    case Errc::SizeExceeded: return "SizeExceeded";
    case Errc::ZeroPolynomial: return "ZeroPolynomial";
    case Errc::DivisionByZero: return "DivisionByZero";
    case Errc::EvenCharacteristic: return "EvenCharacteristic";
    case Errc::OddCharacteristic: return "OddCharacteristic";
    case Errc::NotEffective: return "NotEffective";
    case Errc::Overflow: return "Overflow";
    case Errc::ParseError: return "ParseError";
    case Errc::CapExceeded: return "CapExceeded";
    case Errc::OverlappingSupport: return "OverlappingSupport";
    case Errc::IsSquareClass: return "IsSquareClass";
    case Errc::ConstantFieldExtension: return "ConstantFieldExtension";
    case Errc::NotAGenerator: return "NotAGenerator";
    case Errc::InvalidDiscriminantShape: return "InvalidDiscriminantShape";
    case Errc::NoSuchDiscriminant: return "NoSuchDiscriminant";
    case Errc::EvenDegreePlace: return "EvenDegreePlace";
    case Errc::NotIntegralAtModulus: return "NotIntegralAtModulus";
    case Errc::InfinityInModulus: return "InfinityInModulus";
    case Errc::RingMismatch: return "RingMismatch";
    case Errc::NotPrimitive: return "NotPrimitive";
    case Errc::PlaceInSupport: return "PlaceInSupport";
    case Errc::NotASubgroup: return "NotASubgroup";
    case Errc::PrincipalCharacter: return "PrincipalCharacter";
    case Errc::PoleAt: return "PoleAt";
    case Errc::EvaluationOnCriticalCircle: return "EvaluationOnCriticalCircle";
    case Errc::OutsideValidityRegion: return "OutsideValidityRegion";
    case Errc::FieldMismatch: return "FieldMismatch";
    case Errc::BadConfig: return "BadConfig";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

}  // namespace qff
