#include "conex/episode_record.hpp"

#include <array>
#include <stdexcept>
#include <utility>

namespace conex {

namespace {

constexpr std::array<std::pair<Algorithm, std::string_view>, 3> kAlgorithmNames{{
    {Algorithm::StepMix, "StepMix"},
    {Algorithm::EpsMix, "EpsMix"},
    {Algorithm::OptimisticOnly, "OptimisticOnly"},
}};

constexpr std::array<std::pair<SelectionKind, std::string_view>, 4> kKindNames{{
    {SelectionKind::Baseline, "Baseline"},
    {SelectionKind::Optimistic, "Optimistic"},
    {SelectionKind::Mixture, "Mixture"},
    {SelectionKind::EpisodicMixture, "EpisodicMixture"},
}};

}  // namespace

std::string_view to_string(Algorithm algorithm) {
  for (const auto& [value, name] : kAlgorithmNames)
    if (value == algorithm) return name;
  return "?";
}

std::string_view to_string(SelectionKind kind) {
  for (const auto& [value, name] : kKindNames)
    if (value == kind) return name;
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  for (const auto& [value, text] : kAlgorithmNames)
    if (text == name) return value;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) +
                              "' (expected StepMix, EpsMix or OptimisticOnly)");
}

SelectionKind parse_selection_kind(std::string_view name) {
  for (const auto& [value, text] : kKindNames)
    if (text == name) return value;
  throw std::invalid_argument("unknown selection kind '" + std::string(name) + "'");
}

}  // namespace conex
