#pragma once

#include <span>
#include <string>
#include <vector>

#include "qprl/gates.hpp"

namespace qprl {

/// The hardware-executable vocabulary: CZ, RZ(theta), RX(+pi/2), RX(-pi/2).
enum class NativeKind { RZ, RXp, RXm, CZ };

std::string_view to_string(NativeKind kind);

struct NativeGate {
  NativeKind kind;
  int q0;
  int q1 = -1;         // CZ partner
  double angle = 0.0;  // RZ only

  static NativeGate rz(int qubit, double angle) { return {NativeKind::RZ, qubit, -1, angle}; }
  static NativeGate rxp(int qubit) { return {NativeKind::RXp, qubit}; }
  static NativeGate rxm(int qubit) { return {NativeKind::RXm, qubit}; }
  static NativeGate cz(int a, int b) { return {NativeKind::CZ, a, b}; }
};

struct NativeProgram {
  std::vector<NativeGate> gates;
  std::vector<int> provenance;  // source-gate index per native gate
};

/// Expands one gate into native gates, correct up to global phase:
///   RZ(theta)      -> itself
///   RX(+-pi/2 mod 2*pi) -> RXp / RXm; RX,RY = identity mod 2*pi -> empty
///   other RX/RY    -> ZXZXZ template RZ(c) RXp RZ(b) RXp RZ(a)
///   H              -> RZ(pi/2) RXp RZ(pi/2)
///   CNOT(c,t)      -> the same H template conjugating a CZ (7 gates)
///   CZ             -> itself
/// PhaseZZ has no native form here and is rejected.
std::vector<NativeGate> decompose_gate(const GateOp& gate);

/// Whole-program decomposition followed by one peephole pass that merges
/// list-adjacent same-qubit RZ gates and drops RZ(0 mod 2*pi).
NativeProgram transpile(std::span<const GateOp> program);

/// Native gates viewed as simulator ops (RXp/RXm become RX(+-pi/2)).
GateOp to_gate_op(const NativeGate& gate);
std::vector<GateOp> to_gate_ops(const NativeProgram& program);

std::string to_text(const NativeGate& gate);
std::string native_program_to_text(const NativeProgram& program);

/// True when the two programs implement the same unitary up to one global
/// phase. n <= 4 compares full matrices (tolerance 1e-9 per entry); larger
/// registers compare action on 8 fixed-seed random product states via
/// |<a|b>| >= 1 - 1e-9.
bool verify_equivalence(std::span<const GateOp> a, std::span<const GateOp> b,
                        int n);

}  // namespace qprl
