#pragma once

/**
 * @file quantum_sim.hpp
 * Dense statevector simulation of the hybrid generator's quantum circuit:
 * single-qubit rotations, CNOT entanglers, Pauli-Z expectation readout and
 * exact adjoint-method gradients.
 *
 * Conventions (tests depend on these):
 *  - qubit 0 is the most significant bit of the basis index;
 *  - RY(theta)|0> = cos(theta/2)|0> + sin(theta/2)|1>, i.e. the rotation
 *    matrices are exp(-i*theta/2 * {X,Y,Z});
 *  - gates listed in application order: the first gate in a tape acts first.
 */

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qsynth/common.hpp"

namespace qsynth::sim {

using Complex = std::complex<double>;

/// Rotation angles for one circuit block, one row of three angles per qubit.
using AngleMatrix = Eigen::MatrixXd; // shape d x 3

/// Pure state of `num_qubits` qubits as 2^d complex amplitudes.
class Statevector {
  public:
    explicit Statevector(int num_qubits) : num_qubits_(num_qubits) {
        require(num_qubits >= 1 && num_qubits <= 12,
                "Statevector: qubit count must be in [1, 12], got " +
                    std::to_string(num_qubits));
        amplitudes_.assign(std::size_t{1} << num_qubits, Complex{0.0, 0.0});
        amplitudes_[0] = Complex{1.0, 0.0};
    }

    int num_qubits() const { return num_qubits_; }
    std::size_t dim() const { return amplitudes_.size(); }

    Complex& operator[](std::size_t i) { return amplitudes_[i]; }
    const Complex& operator[](std::size_t i) const { return amplitudes_[i]; }

    const std::vector<Complex>& amplitudes() const { return amplitudes_; }

    double norm_sq() const {
        double s = 0.0;
        for (const auto& a : amplitudes_) {
            s += std::norm(a);
        }
        return s;
    }

    /// Bit value of `qubit` within basis index `idx` (qubit 0 = MSB).
    int bit(std::size_t idx, int qubit) const {
        return static_cast<int>((idx >> (num_qubits_ - 1 - qubit)) & 1U);
    }

  private:
    int num_qubits_;
    std::vector<Complex> amplitudes_;
};

enum class Axis { X, Y, Z };

namespace detail {

inline void check_qubit(const Statevector& state, int qubit,
                        const char* what) {
    require(qubit >= 0 && qubit < state.num_qubits(),
            std::string(what) + ": qubit index " + std::to_string(qubit) +
                " out of range for d=" + std::to_string(state.num_qubits()));
}

/// Applies a 2x2 matrix to the amplitude pairs of one qubit.
inline void apply_single_qubit(Statevector& state, int qubit, Complex m00,
                               Complex m01, Complex m10, Complex m11) {
    const std::size_t stride = std::size_t{1}
                               << (state.num_qubits() - 1 - qubit);
    const std::size_t dim = state.dim();
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t offset = 0; offset < stride; ++offset) {
            const std::size_t i0 = base + offset;
            const std::size_t i1 = i0 + stride;
            const Complex a0 = state[i0];
            const Complex a1 = state[i1];
            state[i0] = m00 * a0 + m01 * a1;
            state[i1] = m10 * a0 + m11 * a1;
        }
    }
}

/// In-place multiplication by the Pauli operator of `axis` on one qubit.
inline void apply_pauli(Statevector& state, Axis axis, int qubit) {
    switch (axis) {
    case Axis::X:
        apply_single_qubit(state, qubit, {0, 0}, {1, 0}, {1, 0}, {0, 0});
        break;
    case Axis::Y:
        apply_single_qubit(state, qubit, {0, 0}, {0, -1}, {0, 1}, {0, 0});
        break;
    case Axis::Z:
        apply_single_qubit(state, qubit, {1, 0}, {0, 0}, {0, 0}, {-1, 0});
        break;
    }
}

} // namespace detail

/// |0>^d.
inline Statevector init_state(int num_qubits) {
    return Statevector(num_qubits);
}

/// Applies exp(-i*angle/2 * P_axis) to one qubit.
inline void apply_rotation(Statevector& state, Axis axis, int qubit,
                           double angle) {
    detail::check_qubit(state, qubit, "apply_rotation");
    require(std::isfinite(angle), "apply_rotation: angle must be finite");
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    switch (axis) {
    case Axis::X:
        detail::apply_single_qubit(state, qubit, {c, 0}, {0, -s}, {0, -s},
                                   {c, 0});
        break;
    case Axis::Y:
        detail::apply_single_qubit(state, qubit, {c, 0}, {-s, 0}, {s, 0},
                                   {c, 0});
        break;
    case Axis::Z:
        detail::apply_single_qubit(state, qubit, {c, -s}, {0, 0}, {0, 0},
                                   {c, s});
        break;
    }
}

/// Flips `target` on the basis states where `control` is set.
inline void apply_cnot(Statevector& state, int control, int target) {
    detail::check_qubit(state, control, "apply_cnot");
    detail::check_qubit(state, target, "apply_cnot");
    require(control != target, "apply_cnot: control == target");
    const std::size_t cbit = std::size_t{1}
                             << (state.num_qubits() - 1 - control);
    const std::size_t tbit = std::size_t{1}
                             << (state.num_qubits() - 1 - target);
    const std::size_t dim = state.dim();
    for (std::size_t i = 0; i < dim; ++i) {
        if ((i & cbit) != 0 && (i & tbit) == 0) {
            std::swap(state[i], state[i | tbit]);
        }
    }
}

/// <Z_qubit>, clamped to [-1, 1] to absorb rounding at the boundary.
inline double expval_z(const Statevector& state, int qubit) {
    detail::check_qubit(state, qubit, "expval_z");
    double value = 0.0;
    const std::size_t dim = state.dim();
    for (std::size_t i = 0; i < dim; ++i) {
        const double p = std::norm(state[i]);
        value += state.bit(i, qubit) ? -p : p;
    }
    return std::clamp(value, -1.0, 1.0);
}

// ---------------------------------------------------------------------------
// Gate tapes
// ---------------------------------------------------------------------------

/// One gate of a circuit. Rotations carry an angle and, when trainable, the
/// index of the parameter the angle came from; occurrences of a shared
/// parameter repeat the same index and their gradients accumulate.
struct GateOp {
    enum class Kind { RX, RY, RZ, CNOT };
    Kind kind;
    int qubit;
    int target = -1;     // CNOT only
    double angle = 0.0;  // rotations only
    int param = -1;      // -1 => not trainable
};

using GateTape = std::vector<GateOp>;

inline void apply_gate(Statevector& state, const GateOp& op) {
    switch (op.kind) {
    case GateOp::Kind::RX:
        apply_rotation(state, Axis::X, op.qubit, op.angle);
        break;
    case GateOp::Kind::RY:
        apply_rotation(state, Axis::Y, op.qubit, op.angle);
        break;
    case GateOp::Kind::RZ:
        apply_rotation(state, Axis::Z, op.qubit, op.angle);
        break;
    case GateOp::Kind::CNOT:
        apply_cnot(state, op.qubit, op.target);
        break;
    }
}

inline void apply_gate_adjoint(Statevector& state, const GateOp& op) {
    GateOp inv = op;
    if (op.kind == GateOp::Kind::CNOT) {
        apply_gate(state, inv); // self-inverse
        return;
    }
    inv.angle = -op.angle;
    apply_gate(state, inv);
}

inline void run_tape(Statevector& state, const GateTape& tape) {
    for (const auto& op : tape) {
        apply_gate(state, op);
    }
}

/// <Z_q> for every qubit of `state`.
inline Vector all_z_expectations(const Statevector& state) {
    Vector out(state.num_qubits());
    for (int q = 0; q < state.num_qubits(); ++q) {
        out[q] = expval_z(state, q);
    }
    return out;
}

namespace detail {

inline Axis rotation_axis(GateOp::Kind kind) {
    switch (kind) {
    case GateOp::Kind::RX:
        return Axis::X;
    case GateOp::Kind::RY:
        return Axis::Y;
    default:
        return Axis::Z;
    }
}

} // namespace detail

/**
 * Jacobian d<Z_q>/d(param_p) of a tape via the adjoint method.
 *
 * One forward pass stores the final state; the backward pass peels gates off
 * while walking d bra vectors (one per Z_q observable). Exact, and
 * O(num_gates * d * 2^d) overall. Gradients of gates sharing a parameter
 * index sum into the same column.
 *
 * Returns a (d x num_params) matrix.
 */
inline Matrix adjoint_jacobian(int num_qubits, const GateTape& tape,
                               int num_params) {
    Statevector phi = init_state(num_qubits);
    run_tape(phi, tape);

    const int d = num_qubits;
    std::vector<Statevector> lambdas;
    lambdas.reserve(static_cast<std::size_t>(d));
    for (int q = 0; q < d; ++q) {
        Statevector lam = phi;
        detail::apply_pauli(lam, Axis::Z, q);
        lambdas.push_back(std::move(lam));
    }

    Matrix jac = Matrix::Zero(d, num_params);
    for (auto it = tape.rbegin(); it != tape.rend(); ++it) {
        const GateOp& op = *it;
        if (op.param >= 0) {
            // dU/dtheta applied to the pre-gate state equals
            // -(i/2) * Pauli * (post-gate state), so the contribution is
            // Im(<lambda_q | Pauli | phi>).
            Statevector mu = phi;
            detail::apply_pauli(mu, detail::rotation_axis(op.kind), op.qubit);
            for (int q = 0; q < d; ++q) {
                Complex inner{0.0, 0.0};
                for (std::size_t i = 0; i < mu.dim(); ++i) {
                    inner += std::conj(lambdas[static_cast<std::size_t>(q)][i]) *
                             mu[i];
                }
                jac(q, op.param) += inner.imag();
            }
        }
        apply_gate_adjoint(phi, op);
        for (auto& lam : lambdas) {
            apply_gate_adjoint(lam, op);
        }
    }
    return jac;
}

/// Same Jacobian via the two-term parameter-shift rule, one shift per gate
/// occurrence. Slower; kept as an independent cross-check for the adjoint
/// path.
inline Matrix parameter_shift_jacobian(int num_qubits, const GateTape& tape,
                                       int num_params) {
    constexpr double shift = std::numbers::pi / 2.0;
    Matrix jac = Matrix::Zero(num_qubits, num_params);
    for (std::size_t g = 0; g < tape.size(); ++g) {
        if (tape[g].param < 0) {
            continue;
        }
        GateTape plus = tape;
        GateTape minus = tape;
        plus[g].angle += shift;
        minus[g].angle -= shift;
        Statevector sp = init_state(num_qubits);
        run_tape(sp, plus);
        Statevector sm = init_state(num_qubits);
        run_tape(sm, minus);
        const Vector ep = all_z_expectations(sp);
        const Vector em = all_z_expectations(sm);
        jac.col(tape[g].param) += (ep - em) / 2.0;
    }
    return jac;
}

// ---------------------------------------------------------------------------
// Generator circuit: RY embedding, then L layers of (RX,RY,RZ per qubit +
// CNOT ring), with the angle matrix shared across layers.
// ---------------------------------------------------------------------------

struct CircuitSpec {
    int num_qubits = 4;
    int num_layers = 8;
    Vector embedding_angles; // z', one angle per qubit

    CircuitSpec() = default;
    CircuitSpec(int d, int layers, Vector embed)
        : num_qubits(d), num_layers(layers),
          embedding_angles(std::move(embed)) {
        require(num_qubits >= 1 && num_qubits <= 12,
                "CircuitSpec: qubit count must be in [1, 12]");
        require(num_layers >= 1, "CircuitSpec: need at least one layer");
        require(embedding_angles.size() == num_qubits,
                "CircuitSpec: embedding angle count must equal qubit count");
        require(embedding_angles.allFinite(),
                "CircuitSpec: embedding angles must be finite");
    }
};

namespace detail {

inline void check_theta(const CircuitSpec& spec, const AngleMatrix& theta) {
    require(theta.rows() == spec.num_qubits && theta.cols() == 3,
            "generator circuit: angle matrix must be d x 3");
    require(theta.allFinite(), "generator circuit: angles must be finite");
}

} // namespace detail

/// Builds the gate tape of the generator circuit. Trainable parameter p of
/// gate (qubit q, column c) is the row-major index q*3+c, repeated across
/// layers. The CNOT ring is empty for d=1 (the single wraparound gate would
/// target its own control).
inline GateTape generator_tape(const CircuitSpec& spec,
                               const AngleMatrix& theta) {
    detail::check_theta(spec, theta);
    const int d = spec.num_qubits;
    GateTape tape;
    tape.reserve(static_cast<std::size_t>(d) *
                 (1 + 4 * static_cast<std::size_t>(spec.num_layers)));
    for (int q = 0; q < d; ++q) {
        tape.push_back({GateOp::Kind::RY, q, -1, spec.embedding_angles[q], -1});
    }
    for (int layer = 0; layer < spec.num_layers; ++layer) {
        for (int q = 0; q < d; ++q) {
            tape.push_back({GateOp::Kind::RX, q, -1, theta(q, 0), q * 3 + 0});
            tape.push_back({GateOp::Kind::RY, q, -1, theta(q, 1), q * 3 + 1});
            tape.push_back({GateOp::Kind::RZ, q, -1, theta(q, 2), q * 3 + 2});
        }
        if (d > 1) {
            for (int q = 0; q < d; ++q) {
                tape.push_back(
                    {GateOp::Kind::CNOT, q, (q + 1) % d, 0.0, -1});
            }
        }
    }
    return tape;
}

/// Runs the generator circuit and reads out x_hat = (<Z_1>,...,<Z_d>).
inline Vector run_generator_circuit(const CircuitSpec& spec,
                                    const AngleMatrix& theta) {
    Statevector state = init_state(spec.num_qubits);
    run_tape(state, generator_tape(spec, theta));
    return all_z_expectations(state);
}

/// d(x_hat_q)/d(theta_{r,c}) as a (d x 3d) matrix; column index is the
/// row-major angle index r*3+c. Layer sharing is already summed.
inline Matrix generator_gradient(const CircuitSpec& spec,
                                 const AngleMatrix& theta) {
    const GateTape tape = generator_tape(spec, theta);
    return adjoint_jacobian(spec.num_qubits, tape, spec.num_qubits * 3);
}

} // namespace qsynth::sim
