#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qprl {

// Gate vocabulary. RX/RY/RZ follow the half-angle convention
// R_A(theta) = exp(-i*theta*A/2); PhaseZZ(theta) = exp(-i*theta*Z_a Z_b)
// (full angle, so CNOT-RZ(2*theta)-CNOT realizes it).
enum class GateKind { RX, RY, RZ, H, CNOT, CZ, PhaseZZ };

bool is_rotation(GateKind kind);
bool is_two_qubit(GateKind kind);
std::string_view to_string(GateKind kind);

struct GateOp {
  GateKind kind;
  int q0;              // qubit, or control for CNOT, first qubit for CZ/PhaseZZ
  int q1 = -1;         // target / second qubit; -1 for single-qubit kinds
  double angle = 0.0;  // radians; meaningful for rotations and PhaseZZ

  static GateOp rx(int qubit, double angle) { return {GateKind::RX, qubit, -1, angle}; }
  static GateOp ry(int qubit, double angle) { return {GateKind::RY, qubit, -1, angle}; }
  static GateOp rz(int qubit, double angle) { return {GateKind::RZ, qubit, -1, angle}; }
  static GateOp h(int qubit) { return {GateKind::H, qubit}; }
  static GateOp cnot(int control, int target) { return {GateKind::CNOT, control, target}; }
  static GateOp cz(int a, int b) { return {GateKind::CZ, a, b}; }
  static GateOp phase_zz(int a, int b, double angle) { return {GateKind::PhaseZZ, a, b, angle}; }
};

/// Renders an angle the way program listings spell it: exact multiples of
/// pi/4 (within 1e-12) as reduced fractions ("pi/2", "3*pi/4", "-pi"), zero
/// as "0", anything else as the shortest round-tripping decimal.
std::string angle_text(double angle);

/// Inverse of angle_text; also accepts plain decimals. Throws
/// std::invalid_argument on malformed input.
double angle_from_text(std::string_view text);

/// One instruction per line, Quil-like: "RX(pi/4) 2", "H 3", "CNOT 5 9",
/// "CZ 0 1", "RZ(0.25) 7".
std::string to_text(const GateOp& gate);
GateOp gate_from_text(std::string_view line);

std::string program_to_text(std::span<const GateOp> program);
std::vector<GateOp> program_from_text(std::string_view text);

}  // namespace qprl
