#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>

namespace dq {

/// The five inherent data quality characteristics.
enum class CharacteristicId {
  accuracy,
  completeness,
  consistency,
  credibility,
  currentness,
};

/// Data quality properties. Acronyms follow the certification laboratory's
/// Spanish abbreviations (EXAC_SINT, COMP_REG, ...).
enum class PropertyId {
  syntactic_accuracy,      // EXAC_SINT
  semantic_accuracy,       // EXAC_SEMAN
  accuracy_range,          // RAN_EXAC
  file_completeness,       // COMP_FICH
  record_completeness,     // COMP_REG
  data_value_completeness, // COMP_VAL_ESP
  false_file_completeness, // FAL_COMP_FICH
  format_consistency,      // CONS_FORM
  semantic_consistency,    // CONS_SEMAN
  referential_integrity,   // INT_REF
  inconsistency_risk,      // RIES_INCO
  source_credibility,      // CRED_FUEN
  value_credibility,       // CRED_VAL_DAT
  timeliness_of_update,    // CONV_ACT
  update_frequency,        // FREC_ACT
};

inline constexpr std::size_t kCharacteristicCount = 5;
inline constexpr std::size_t kPropertyCount = 15;

inline constexpr std::array<CharacteristicId, kCharacteristicCount> kAllCharacteristics{
    CharacteristicId::accuracy, CharacteristicId::completeness, CharacteristicId::consistency,
    CharacteristicId::credibility, CharacteristicId::currentness};

inline constexpr std::array<PropertyId, kPropertyCount> kAllProperties{
    PropertyId::syntactic_accuracy,     PropertyId::semantic_accuracy,
    PropertyId::accuracy_range,         PropertyId::file_completeness,
    PropertyId::record_completeness,    PropertyId::data_value_completeness,
    PropertyId::false_file_completeness, PropertyId::format_consistency,
    PropertyId::semantic_consistency,   PropertyId::referential_integrity,
    PropertyId::inconsistency_risk,     PropertyId::source_credibility,
    PropertyId::value_credibility,      PropertyId::timeliness_of_update,
    PropertyId::update_frequency};

[[nodiscard]] CharacteristicId characteristic_of(PropertyId p);

/// Properties of one characteristic, in taxonomy order.
[[nodiscard]] std::span<const PropertyId> properties_of(CharacteristicId c);

[[nodiscard]] std::string_view acronym(PropertyId p);
[[nodiscard]] std::string_view display_name(PropertyId p);
[[nodiscard]] std::string_view name(CharacteristicId c);

[[nodiscard]] std::optional<PropertyId> property_from_acronym(std::string_view s);
/// Accepts the English name, case-insensitively ("Accuracy", "accuracy").
[[nodiscard]] std::optional<CharacteristicId> characteristic_from_name(std::string_view s);

[[nodiscard]] constexpr std::size_t index_of(CharacteristicId c) {
  return static_cast<std::size_t>(c);
}
[[nodiscard]] constexpr std::size_t index_of(PropertyId p) { return static_cast<std::size_t>(p); }

}  // namespace dq
