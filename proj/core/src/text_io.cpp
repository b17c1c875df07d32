#include "conex/text_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <vector>

namespace conex {

namespace {

std::string next_token(std::istream& in, const char* context) {
  std::string token;
  if (!(in >> token)) throw std::invalid_argument(std::string("unexpected end of input reading ") + context);
  return token;
}

void expect_token(std::istream& in, std::string_view expected) {
  const std::string token = next_token(in, std::string(expected).c_str());
  if (token != expected) {
    throw std::invalid_argument("expected '" + std::string(expected) + "' but found '" + token + "'");
  }
}

std::size_t read_keyed_count(std::istream& in, std::string_view key) {
  expect_token(in, key);
  return parse_count(next_token(in, std::string(key).c_str()));
}

void read_header(std::istream& in, std::string_view magic) {
  expect_token(in, magic);
  const std::size_t version = parse_count(next_token(in, "format version"));
  if (version != 1) throw std::invalid_argument("unsupported format version " + std::to_string(version));
}

std::vector<double> read_reals(std::istream& in, std::size_t count, const char* context) {
  std::vector<double> values(count);
  for (double& v : values) v = parse_real(next_token(in, context));
  return values;
}

void write_rows(std::ostream& out, const std::vector<double>& values, std::size_t width) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << format_real(values[i]) << ((i + 1) % width == 0 ? '\n' : ' ');
  }
}

Shape read_shape(std::istream& in) {
  Shape shape;
  shape.states = read_keyed_count(in, "states");
  shape.actions = read_keyed_count(in, "actions");
  shape.horizon = read_keyed_count(in, "horizon");
  validate_shape(shape);
  return shape;
}

void write_shape(std::ostream& out, const Shape& shape) {
  out << "states " << shape.states << '\n'
      << "actions " << shape.actions << '\n'
      << "horizon " << shape.horizon << '\n';
}

template <typename Fn>
void write_file(const std::filesystem::path& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  fn(out);
  out.flush();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "' for reading");
  return in;
}

}  // namespace

std::string format_real(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return {buf, result.ptr};
}

double parse_real(std::string_view token) {
  double value = 0.0;
  const auto* end = token.data() + token.size();
  const auto result = std::from_chars(token.data(), end, value);
  if (result.ec != std::errc() || result.ptr != end) {
    throw std::invalid_argument("not a real number: '" + std::string(token) + "'");
  }
  return value;
}

std::size_t parse_count(std::string_view token) {
  std::size_t value = 0;
  const auto* end = token.data() + token.size();
  const auto result = std::from_chars(token.data(), end, value);
  if (result.ec != std::errc() || result.ptr != end) {
    throw std::invalid_argument("not a nonnegative integer: '" + std::string(token) + "'");
  }
  return value;
}

void write_mdp(std::ostream& out, const TabularMdp& mdp) {
  out << "conex-mdp 1\n";
  write_shape(out, mdp.shape());
  out << "start_state " << mdp.start_state() << '\n';
  out << "transitions\n";
  write_rows(out, mdp.transitions(), mdp.shape().states);
  out << "rewards\n";
  write_rows(out, mdp.rewards().values(), mdp.shape().actions);
}

TabularMdp read_mdp(std::istream& in) {
  read_header(in, "conex-mdp");
  const Shape shape = read_shape(in);
  const std::size_t start = read_keyed_count(in, "start_state");
  expect_token(in, "transitions");
  auto transitions = read_reals(in, shape.horizon * shape.state_actions() * shape.states, "transitions");
  expect_token(in, "rewards");
  auto rewards = read_reals(in, shape.horizon * shape.state_actions(), "rewards");
  return {shape, std::move(transitions), RewardTable(shape, std::move(rewards)), start};
}

void write_policy(std::ostream& out, const StochasticPolicy& policy) {
  out << "conex-policy 1\n";
  write_shape(out, policy.shape());
  out << "probabilities\n";
  write_rows(out, policy.probs(), policy.shape().actions);
}

StochasticPolicy read_policy(std::istream& in) {
  read_header(in, "conex-policy");
  const Shape shape = read_shape(in);
  expect_token(in, "probabilities");
  return {shape, read_reals(in, shape.horizon * shape.state_actions(), "probabilities")};
}

void save_mdp(const std::filesystem::path& path, const TabularMdp& mdp) {
  write_file(path, [&](std::ostream& out) { write_mdp(out, mdp); });
}

TabularMdp load_mdp(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return read_mdp(in);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

void save_policy(const std::filesystem::path& path, const StochasticPolicy& policy) {
  write_file(path, [&](std::ostream& out) { write_policy(out, policy); });
}

StochasticPolicy load_policy(const std::filesystem::path& path) {
  auto in = open_input(path);
  try {
    return read_policy(in);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

}  // namespace conex
