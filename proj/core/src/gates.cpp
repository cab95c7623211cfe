#include "qprl/gates.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace qprl {

namespace {

std::string_view trimmed(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

long long parse_int(std::string_view s) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument("expected integer, got '" + std::string(s) + "'");
  }
  return value;
}

double parse_double(std::string_view s) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument("expected number, got '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

bool is_rotation(GateKind kind) {
  return kind == GateKind::RX || kind == GateKind::RY || kind == GateKind::RZ;
}

bool is_two_qubit(GateKind kind) {
  return kind == GateKind::CNOT || kind == GateKind::CZ ||
         kind == GateKind::PhaseZZ;
}

std::string_view to_string(GateKind kind) {
  switch (kind) {
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::H: return "H";
    case GateKind::CNOT: return "CNOT";
    case GateKind::CZ: return "CZ";
    case GateKind::PhaseZZ: return "PHASEZZ";
  }
  throw std::invalid_argument("unknown GateKind");
}

std::string angle_text(double angle) {
  constexpr double quarter = std::numbers::pi / 4.0;
  const long long k = std::llround(angle / quarter);
  if (std::abs(angle - static_cast<double>(k) * quarter) <= 1e-12) {
    if (k == 0) return "0";
    const long long g = std::gcd(std::llabs(k), 4ll);
    const long long num = std::llabs(k) / g;
    const long long den = 4 / g;
    std::string out = (k < 0) ? "-" : "";
    if (num != 1) out += std::to_string(num) + "*";
    out += "pi";
    if (den != 1) out += "/" + std::to_string(den);
    return out;
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), angle);
  return std::string(buf, res.ptr);
}

double angle_from_text(std::string_view text) {
  std::string_view s = trimmed(text);
  if (s.empty()) throw std::invalid_argument("empty angle");
  bool negative = false;
  if (s.front() == '-') {
    negative = true;
    s.remove_prefix(1);
  } else if (s.front() == '+') {
    s.remove_prefix(1);
  }
  double value = 0.0;
  const auto pi_pos = s.find("pi");
  if (pi_pos != std::string_view::npos) {
    long long num = 1;
    long long den = 1;
    std::string_view head = s.substr(0, pi_pos);
    std::string_view tail = s.substr(pi_pos + 2);
    if (!head.empty()) {
      if (head.back() != '*') throw std::invalid_argument("bad angle: " + std::string(text));
      num = parse_int(head.substr(0, head.size() - 1));
    }
    if (!tail.empty()) {
      if (tail.front() != '/') throw std::invalid_argument("bad angle: " + std::string(text));
      den = parse_int(tail.substr(1));
      if (den == 0) throw std::invalid_argument("bad angle: " + std::string(text));
    }
    value = static_cast<double>(num) * std::numbers::pi / static_cast<double>(den);
  } else {
    value = parse_double(s);
  }
  return negative ? -value : value;
}

std::string to_text(const GateOp& gate) {
  std::string out{to_string(gate.kind)};
  if (is_rotation(gate.kind) || gate.kind == GateKind::PhaseZZ) {
    out += "(" + angle_text(gate.angle) + ")";
  }
  out += " " + std::to_string(gate.q0);
  if (is_two_qubit(gate.kind)) out += " " + std::to_string(gate.q1);
  return out;
}

GateOp gate_from_text(std::string_view line) {
  std::string_view s = trimmed(line);
  if (s.empty()) throw std::invalid_argument("empty instruction");

  // Head token: NAME or NAME(ANGLE).
  const auto head_end = s.find(' ');
  std::string_view head = (head_end == std::string_view::npos) ? s : s.substr(0, head_end);
  std::string_view rest = (head_end == std::string_view::npos)
                              ? std::string_view{}
                              : trimmed(s.substr(head_end + 1));

  std::string_view name = head;
  bool has_angle = false;
  double angle = 0.0;
  const auto paren = head.find('(');
  if (paren != std::string_view::npos) {
    if (head.back() != ')') throw std::invalid_argument("bad instruction: " + std::string(line));
    name = head.substr(0, paren);
    angle = angle_from_text(head.substr(paren + 1, head.size() - paren - 2));
    has_angle = true;
  }

  // Remaining tokens are qubit indices.
  int qubits[2] = {-1, -1};
  int count = 0;
  while (!rest.empty()) {
    const auto sp = rest.find(' ');
    std::string_view tok = (sp == std::string_view::npos) ? rest : rest.substr(0, sp);
    rest = (sp == std::string_view::npos) ? std::string_view{} : trimmed(rest.substr(sp + 1));
    if (count >= 2) throw std::invalid_argument("too many operands: " + std::string(line));
    const long long q = parse_int(tok);
    if (q < 0) throw std::invalid_argument("negative qubit index: " + std::string(line));
    qubits[count++] = static_cast<int>(q);
  }

  auto require = [&](bool angle_needed, int qubit_count) {
    if (has_angle != angle_needed || count != qubit_count) {
      throw std::invalid_argument("bad instruction: " + std::string(line));
    }
  };
  if (name == "RX") { require(true, 1); return GateOp::rx(qubits[0], angle); }
  if (name == "RY") { require(true, 1); return GateOp::ry(qubits[0], angle); }
  if (name == "RZ") { require(true, 1); return GateOp::rz(qubits[0], angle); }
  if (name == "H") { require(false, 1); return GateOp::h(qubits[0]); }
  if (name == "CNOT") { require(false, 2); return GateOp::cnot(qubits[0], qubits[1]); }
  if (name == "CZ") { require(false, 2); return GateOp::cz(qubits[0], qubits[1]); }
  if (name == "PHASEZZ") { require(true, 2); return GateOp::phase_zz(qubits[0], qubits[1], angle); }
  throw std::invalid_argument("unknown instruction: " + std::string(line));
}

std::string program_to_text(std::span<const GateOp> program) {
  std::string out;
  for (const GateOp& gate : program) {
    out += to_text(gate);
    out += '\n';
  }
  return out;
}

std::vector<GateOp> program_from_text(std::string_view text) {
  std::vector<GateOp> program;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = (nl == std::string_view::npos) ? text : text.substr(0, nl);
    text = (nl == std::string_view::npos) ? std::string_view{} : text.substr(nl + 1);
    line = trimmed(line);
    if (line.empty()) continue;
    program.push_back(gate_from_text(line));
  }
  return program;
}

}  // namespace qprl
