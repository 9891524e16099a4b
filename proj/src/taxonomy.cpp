#include "dq/taxonomy.hpp"

#include <algorithm>
#include <cctype>

namespace dq {

namespace {

struct PropertyInfo {
  PropertyId id;
  CharacteristicId characteristic;
  std::string_view acronym;
  std::string_view display;
};

constexpr std::array<PropertyInfo, kPropertyCount> kProperties{{
    {PropertyId::syntactic_accuracy, CharacteristicId::accuracy, "EXAC_SINT", "Syntactic Accuracy"},
    {PropertyId::semantic_accuracy, CharacteristicId::accuracy, "EXAC_SEMAN", "Semantic Accuracy"},
    {PropertyId::accuracy_range, CharacteristicId::accuracy, "RAN_EXAC", "Range of Accuracy"},
    {PropertyId::file_completeness, CharacteristicId::completeness, "COMP_FICH", "File Completeness"},
    {PropertyId::record_completeness, CharacteristicId::completeness, "COMP_REG",
     "Record Completeness"},
    {PropertyId::data_value_completeness, CharacteristicId::completeness, "COMP_VAL_ESP",
     "Data Value Completeness"},
    {PropertyId::false_file_completeness, CharacteristicId::completeness, "FAL_COMP_FICH",
     "False Completeness of File"},
    {PropertyId::format_consistency, CharacteristicId::consistency, "CONS_FORM",
     "Format Consistency"},
    {PropertyId::semantic_consistency, CharacteristicId::consistency, "CONS_SEMAN",
     "Semantic Consistency"},
    {PropertyId::referential_integrity, CharacteristicId::consistency, "INT_REF",
     "Referential Integrity"},
    {PropertyId::inconsistency_risk, CharacteristicId::consistency, "RIES_INCO",
     "Risk of Inconsistency"},
    {PropertyId::source_credibility, CharacteristicId::credibility, "CRED_FUEN",
     "Data Source Credibility"},
    {PropertyId::value_credibility, CharacteristicId::credibility, "CRED_VAL_DAT",
     "Data Values Credibility"},
    {PropertyId::timeliness_of_update, CharacteristicId::currentness, "CONV_ACT",
     "Timeliness of Update"},
    {PropertyId::update_frequency, CharacteristicId::currentness, "FREC_ACT", "Update Frequency"},
}};

// kAllProperties is grouped by characteristic, so each characteristic owns a
// contiguous slice of it.
constexpr std::array<std::pair<std::size_t, std::size_t>, kCharacteristicCount> kSlices{{
    {0, 3}, {3, 4}, {7, 4}, {11, 2}, {13, 2}}};

constexpr std::array<std::string_view, kCharacteristicCount> kCharacteristicNames{
    "Accuracy", "Completeness", "Consistency", "Credibility", "Currentness"};

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

}  // namespace

CharacteristicId characteristic_of(PropertyId p) { return kProperties[index_of(p)].characteristic; }

std::span<const PropertyId> properties_of(CharacteristicId c) {
  auto [offset, count] = kSlices[index_of(c)];
  return std::span<const PropertyId>(kAllProperties).subspan(offset, count);
}

std::string_view acronym(PropertyId p) { return kProperties[index_of(p)].acronym; }

std::string_view display_name(PropertyId p) { return kProperties[index_of(p)].display; }

std::string_view name(CharacteristicId c) { return kCharacteristicNames[index_of(c)]; }

std::optional<PropertyId> property_from_acronym(std::string_view s) {
  for (const auto& info : kProperties) {
    if (info.acronym == s) return info.id;
  }
  return std::nullopt;
}

std::optional<CharacteristicId> characteristic_from_name(std::string_view s) {
  for (auto c : kAllCharacteristics) {
    if (iequals(name(c), s)) return c;
  }
  return std::nullopt;
}

}  // namespace dq
