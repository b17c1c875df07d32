#pragma once

// Plain-text serialization of environments and policies.
//
// Both formats are whitespace-separated tokens. Reals are written with 17
// significant digits and '.' as the decimal separator, independent of the
// process locale, so a write/read cycle reproduces every double exactly.
//
//   conex-mdp 1
//   states S
//   actions A
//   horizon H
//   start_state s1
//   transitions
//   <H*S*A lines, one per (h,s,a) in row-major order, S reals each>
//   rewards
//   <H*S lines, one per (h,s), A reals each>
//
//   conex-policy 1
//   states S
//   actions A
//   horizon H
//   probabilities
//   <H*S lines, one per (h,s), A reals each>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "conex/tabular_mdp.hpp"

namespace conex {

/// 17 significant digits, '.' decimal separator.
std::string format_real(double value);

/// Locale-independent parse of a full token. Throws std::invalid_argument.
double parse_real(std::string_view token);

/// Parses a base-10 unsigned integer token. Throws std::invalid_argument.
std::size_t parse_count(std::string_view token);

void write_mdp(std::ostream& out, const TabularMdp& mdp);
TabularMdp read_mdp(std::istream& in);

void write_policy(std::ostream& out, const StochasticPolicy& policy);
StochasticPolicy read_policy(std::istream& in);

/// File wrappers. I/O failures throw std::runtime_error naming the path.
void save_mdp(const std::filesystem::path& path, const TabularMdp& mdp);
TabularMdp load_mdp(const std::filesystem::path& path);
void save_policy(const std::filesystem::path& path, const StochasticPolicy& policy);
StochasticPolicy load_policy(const std::filesystem::path& path);

}  // namespace conex
