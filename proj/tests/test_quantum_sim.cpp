#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include <Eigen/Dense>

#include "qsynth/quantum_sim.hpp"
#include "qsynth/rng.hpp"

using namespace qsynth;
using namespace qsynth::sim;
using Catch::Approx;

namespace {

// --- dense-unitary oracle: full 2^d x 2^d matrix composition -------------

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;

CMat kron(const CMat& a, const CMat& b) {
    CMat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
                a(i, j) * b;
        }
    }
    return out;
}

CMat rotation2(Axis axis, double angle) {
    const std::complex<double> im{0.0, 1.0};
    const double c = std::cos(angle / 2.0);
    const double s = std::sin(angle / 2.0);
    CMat m(2, 2);
    switch (axis) {
    case Axis::X:
        m << c, -im * s, -im * s, c;
        break;
    case Axis::Y:
        m << c, -s, s, c;
        break;
    case Axis::Z:
        m << std::exp(-im * (angle / 2.0)), 0.0, 0.0,
            std::exp(im * (angle / 2.0));
        break;
    }
    return m;
}

// Qubit 0 is the most significant bit, so it is the leftmost kron factor.
CMat lift_single(const CMat& gate, int qubit, int d) {
    CMat out = CMat::Identity(1, 1);
    for (int q = 0; q < d; ++q) {
        out = kron(out, q == qubit ? gate : CMat::Identity(2, 2));
    }
    return out;
}

CMat cnot_dense(int control, int target, int d) {
    const auto dim = std::size_t{1} << d;
    CMat m = CMat::Zero(static_cast<Eigen::Index>(dim),
                        static_cast<Eigen::Index>(dim));
    const std::size_t cbit = std::size_t{1} << (d - 1 - control);
    const std::size_t tbit = std::size_t{1} << (d - 1 - target);
    for (std::size_t j = 0; j < dim; ++j) {
        const std::size_t i = (j & cbit) ? (j ^ tbit) : j;
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = 1.0;
    }
    return m;
}

CMat tape_unitary(const GateTape& tape, int d) {
    const auto dim = Eigen::Index{1} << d;
    CMat u = CMat::Identity(dim, dim);
    for (const auto& op : tape) {
        CMat g;
        switch (op.kind) {
        case GateOp::Kind::RX:
            g = lift_single(rotation2(Axis::X, op.angle), op.qubit, d);
            break;
        case GateOp::Kind::RY:
            g = lift_single(rotation2(Axis::Y, op.angle), op.qubit, d);
            break;
        case GateOp::Kind::RZ:
            g = lift_single(rotation2(Axis::Z, op.angle), op.qubit, d);
            break;
        case GateOp::Kind::CNOT:
            g = cnot_dense(op.qubit, op.target, d);
            break;
        }
        u = g * u; // application order: later gates multiply on the left
    }
    return u;
}

Vector oracle_expectations(const GateTape& tape, int d) {
    const auto dim = Eigen::Index{1} << d;
    CVec psi = CVec::Zero(dim);
    psi[0] = 1.0;
    psi = tape_unitary(tape, d) * psi;
    Vector out(d);
    for (int q = 0; q < d; ++q) {
        double v = 0.0;
        for (Eigen::Index i = 0; i < dim; ++i) {
            const bool one = (static_cast<std::size_t>(i) >>
                              (d - 1 - q)) & 1U;
            v += (one ? -1.0 : 1.0) * std::norm(psi[i]);
        }
        out[q] = v;
    }
    return out;
}

AngleMatrix random_theta(int d, Rng& rng) {
    AngleMatrix theta(d, 3);
    for (int q = 0; q < d; ++q) {
        for (int c = 0; c < 3; ++c) {
            theta(q, c) = rng.uniform(-std::numbers::pi, std::numbers::pi);
        }
    }
    return theta;
}

Vector random_embed(int d, Rng& rng) {
    Vector z(d);
    for (int q = 0; q < d; ++q) {
        z[q] = rng.uniform(-std::numbers::pi, std::numbers::pi);
    }
    return z;
}

Matrix finite_difference_jacobian(const CircuitSpec& spec,
                                  const AngleMatrix& theta, double step) {
    const int d = spec.num_qubits;
    Matrix jac(d, 3 * d);
    for (int q = 0; q < d; ++q) {
        for (int c = 0; c < 3; ++c) {
            AngleMatrix plus = theta;
            AngleMatrix minus = theta;
            plus(q, c) += step;
            minus(q, c) -= step;
            const Vector ep = run_generator_circuit(spec, plus);
            const Vector em = run_generator_circuit(spec, minus);
            jac.col(q * 3 + c) = (ep - em) / (2.0 * step);
        }
    }
    return jac;
}

void check_close(const Matrix& a, const Matrix& b, double rtol, double atol) {
    REQUIRE(a.rows() == b.rows());
    REQUIRE(a.cols() == b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            const double tol = atol + rtol * std::abs(b(i, j));
            INFO("entry (" << i << "," << j << "): " << a(i, j) << " vs "
                           << b(i, j));
            REQUIRE(std::abs(a(i, j) - b(i, j)) <= tol);
        }
    }
}

} // namespace

TEST_CASE("init_state prepares |0...0>", "[quantum]") {
    const Statevector s1 = init_state(1);
    REQUIRE(s1.dim() == 2);
    REQUIRE(s1[0] == Complex{1.0, 0.0});
    REQUIRE(s1[1] == Complex{0.0, 0.0});

    const Statevector s2 = init_state(2);
    REQUIRE(s2.dim() == 4);
    REQUIRE(s2[0] == Complex{1.0, 0.0});
    for (std::size_t i = 1; i < 4; ++i) {
        REQUIRE(s2[i] == Complex{0.0, 0.0});
    }

    const Statevector s4 = init_state(4);
    REQUIRE(s4.dim() == 16);
    REQUIRE(s4[0] == Complex{1.0, 0.0});

    REQUIRE_THROWS_AS(init_state(0), invalid_argument);
    REQUIRE_THROWS_AS(init_state(13), invalid_argument);
}

TEST_CASE("single-qubit rotations", "[quantum]") {
    SECTION("RY(pi) flips |0> to |1> with positive sign") {
        Statevector s = init_state(1);
        apply_rotation(s, Axis::Y, 0, std::numbers::pi);
        REQUIRE(s[0].real() == Approx(0.0).margin(1e-15));
        REQUIRE(s[1].real() == Approx(1.0).margin(1e-15));
        REQUIRE(expval_z(s, 0) == Approx(-1.0).margin(1e-12));
    }
    SECTION("RZ leaves <Z> of |0> at +1") {
        for (const double theta : {0.3, 1.2, -2.5}) {
            Statevector s = init_state(1);
            apply_rotation(s, Axis::Z, 0, theta);
            REQUIRE(expval_z(s, 0) == Approx(1.0).margin(1e-12));
        }
    }
    SECTION("RY(0.7) against the dense matrix oracle") {
        Statevector s = init_state(1);
        apply_rotation(s, Axis::Y, 0, 0.7);
        const CVec psi =
            rotation2(Axis::Y, 0.7) * CVec{{Complex{1, 0}, Complex{0, 0}}};
        REQUIRE(std::abs(s[0] - psi[0]) < 1e-14);
        REQUIRE(std::abs(s[1] - psi[1]) < 1e-14);
        REQUIRE(expval_z(s, 0) == Approx(std::cos(0.7)).epsilon(1e-12));
    }
    SECTION("index checks") {
        Statevector s = init_state(2);
        REQUIRE_THROWS_AS(apply_rotation(s, Axis::X, 2, 0.1),
                          invalid_argument);
        REQUIRE_THROWS_AS(apply_rotation(s, Axis::X, -1, 0.1),
                          invalid_argument);
    }
}

TEST_CASE("cnot on basis and superposed states", "[quantum]") {
    SECTION("|10> -> |11> for control=0 (high bit), target=1") {
        Statevector s = init_state(2);
        s[0] = {0, 0};
        s[2] = {1, 0}; // |10>
        apply_cnot(s, 0, 1);
        REQUIRE(s[3] == Complex{1.0, 0.0});
        REQUIRE(s[2] == Complex{0.0, 0.0});
    }
    SECTION("|00> unchanged") {
        Statevector s = init_state(2);
        apply_cnot(s, 0, 1);
        REQUIRE(s[0] == Complex{1.0, 0.0});
    }
    SECTION("Bell state from (|00>+|10>)/sqrt(2)") {
        Statevector s = init_state(2);
        const double r = 1.0 / std::sqrt(2.0);
        s[0] = {r, 0};
        s[2] = {r, 0};
        apply_cnot(s, 0, 1);
        REQUIRE(s[0].real() == Approx(r));
        REQUIRE(s[3].real() == Approx(r));
        REQUIRE(std::abs(s[1]) == 0.0);
        REQUIRE(std::abs(s[2]) == 0.0);
    }
    SECTION("control == target rejected") {
        Statevector s = init_state(2);
        REQUIRE_THROWS_AS(apply_cnot(s, 1, 1), invalid_argument);
    }
}

TEST_CASE("expval_z basics", "[quantum]") {
    Statevector s = init_state(1);
    REQUIRE(expval_z(s, 0) == 1.0);

    const double r = 1.0 / std::sqrt(2.0);
    s[0] = {r, 0};
    s[1] = {r, 0};
    REQUIRE(expval_z(s, 0) == Approx(0.0).margin(1e-15));
}

TEST_CASE("generator circuit special cases", "[quantum]") {
    SECTION("identity circuit on |00>") {
        const CircuitSpec spec(2, 1, Vector::Zero(2));
        const Vector x = run_generator_circuit(spec, AngleMatrix::Zero(2, 3));
        REQUIRE(x[0] == Approx(1.0));
        REQUIRE(x[1] == Approx(1.0));
    }
    SECTION("d=1 ring is empty and output is cos(z')") {
        for (const double theta : {0.0, 0.4, -1.3, 2.9}) {
            Vector z(1);
            z[0] = theta;
            const CircuitSpec spec(1, 1, z);
            const Vector x =
                run_generator_circuit(spec, AngleMatrix::Zero(1, 3));
            REQUIRE(x[0] == Approx(std::cos(theta)).margin(1e-12));
        }
    }
    SECTION("theta shape is checked") {
        const CircuitSpec spec(2, 1, Vector::Zero(2));
        REQUIRE_THROWS_AS(
            run_generator_circuit(spec, AngleMatrix::Zero(3, 3)),
            invalid_argument);
    }
}

TEST_CASE("generator circuit matches the dense-unitary oracle", "[quantum]") {
    Rng rng(20240913);
    for (int rep = 0; rep < 40; ++rep) {
        const int d = 1 + static_cast<int>(rng.uniform_int(3));
        const int layers = 1 + static_cast<int>(rng.uniform_int(4));
        const CircuitSpec spec(d, layers, random_embed(d, rng));
        const AngleMatrix theta = random_theta(d, rng);
        const Vector fast = run_generator_circuit(spec, theta);
        const Vector slow = oracle_expectations(generator_tape(spec, theta), d);
        for (int q = 0; q < d; ++q) {
            REQUIRE(fast[q] == Approx(slow[q]).margin(1e-10));
            REQUIRE(fast[q] >= -1.0);
            REQUIRE(fast[q] <= 1.0);
        }
    }
}

TEST_CASE("norm preserved through random gate sequences", "[quantum]") {
    Rng rng(77);
    for (int rep = 0; rep < 20; ++rep) {
        const int d = 1 + static_cast<int>(rng.uniform_int(4));
        Statevector s = init_state(d);
        for (int g = 0; g < 60; ++g) {
            const int choice = static_cast<int>(rng.uniform_int(4));
            const int q = static_cast<int>(rng.uniform_int(d));
            if (choice == 3 && d > 1) {
                int t = static_cast<int>(rng.uniform_int(d));
                if (t == q) {
                    t = (t + 1) % d;
                }
                apply_cnot(s, q, t);
            } else {
                const Axis axis = choice == 0   ? Axis::X
                                  : choice == 1 ? Axis::Y
                                                : Axis::Z;
                apply_rotation(s, axis, q, rng.uniform(-3.0, 3.0));
            }
            REQUIRE(std::abs(s.norm_sq() - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("gradient special cases", "[quantum]") {
    SECTION("d<Z>/dTheta_{1,2} = -sin(theta)") {
        for (const double theta : {0.0, 0.3, -1.1, 2.2}) {
            AngleMatrix th = AngleMatrix::Zero(1, 3);
            th(0, 1) = theta;
            const CircuitSpec spec(1, 1, Vector::Zero(1));
            const Matrix jac = generator_gradient(spec, th);
            REQUIRE(jac(0, 1) == Approx(-std::sin(theta)).margin(1e-12));
        }
    }
    SECTION("Z-rotation on a Z eigenstate has zero gradient") {
        for (const int d : {1, 2, 3}) {
            const CircuitSpec spec(d, 1, Vector::Zero(d));
            const Matrix jac =
                generator_gradient(spec, AngleMatrix::Zero(d, 3));
            for (int q = 0; q < d; ++q) {
                REQUIRE(jac(q, q * 3 + 2) == Approx(0.0).margin(1e-14));
            }
        }
    }
}

TEST_CASE("adjoint gradient matches finite differences", "[quantum]") {
    Rng rng(321);
    for (int rep = 0; rep < 12; ++rep) {
        const int d = 1 + static_cast<int>(rng.uniform_int(4));
        const int layers = 1 + static_cast<int>(rng.uniform_int(8));
        const CircuitSpec spec(d, layers, random_embed(d, rng));
        const AngleMatrix theta = random_theta(d, rng);
        const Matrix adj = generator_gradient(spec, theta);
        const Matrix fd = finite_difference_jacobian(spec, theta, 1e-4);
        check_close(adj, fd, 1e-4, 1e-6);
    }
}

TEST_CASE("adjoint gradient matches parameter shift", "[quantum]") {
    Rng rng(9);
    for (int rep = 0; rep < 8; ++rep) {
        const int d = 1 + static_cast<int>(rng.uniform_int(3));
        const int layers = 1 + static_cast<int>(rng.uniform_int(4));
        const CircuitSpec spec(d, layers, random_embed(d, rng));
        const AngleMatrix theta = random_theta(d, rng);
        const GateTape tape = generator_tape(spec, theta);
        const Matrix adj = adjoint_jacobian(d, tape, 3 * d);
        const Matrix shift = parameter_shift_jacobian(d, tape, 3 * d);
        check_close(adj, shift, 1e-10, 1e-12);
    }
}

TEST_CASE("layer sharing sums per-occurrence gradients", "[quantum]") {
    Rng rng(55);
    const int d = 2;
    const CircuitSpec tied(d, 2, random_embed(d, rng));
    const AngleMatrix theta = random_theta(d, rng);

    const Matrix shared = generator_gradient(tied, theta);

    // Untie: same circuit but with distinct parameter indices per layer,
    // then fold the per-occurrence columns back together.
    GateTape untied = generator_tape(tied, theta);
    int next = 0;
    for (auto& op : untied) {
        if (op.param >= 0) {
            op.param = next++;
        }
    }
    const Matrix per_occurrence = adjoint_jacobian(d, untied, next);

    Matrix folded = Matrix::Zero(d, 3 * d);
    int occurrence = 0;
    for (const auto& op : generator_tape(tied, theta)) {
        if (op.param >= 0) {
            folded.col(op.param) += per_occurrence.col(occurrence++);
        }
    }
    check_close(shared, folded, 1e-12, 1e-13);
}
