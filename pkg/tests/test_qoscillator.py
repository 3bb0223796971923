"""Truncated oscillator operators, q-series helpers, and boundary diagonals."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from qbaxter.errors import ConvergenceError, ExclusionPointError, OverflowGuardError
from qbaxter.qoscillator import (
    FockDiagonal,
    kw_diagonal,
    ktw_diagonal,
    osc_a,
    osc_adag,
    osc_fd,
    phi21,
    pochhammer,
    q_power_d,
    rho_minus,
    rho_plus,
)

Q = 0.57 + 0.13j
J = 14


def basis(j, size=J):
    v = np.zeros(size, dtype=complex)
    v[j] = 1.0
    return v


class TestLadderOperators:
    def test_lowering(self):
        assert_allclose(osc_a(J) @ basis(1), basis(0))
        assert_allclose(osc_a(J) @ basis(0), np.zeros(J))

    def test_raising(self):
        assert_allclose(osc_adag(Q, J) @ basis(0), (1 - Q ** 2) * basis(1))
        assert_allclose(osc_adag(Q, J) @ basis(J - 1), np.zeros(J))

    def test_number_relation(self):
        num = osc_adag(Q, J) @ osc_a(J)
        for j in range(J):
            assert_allclose(num @ basis(j), (1 - Q ** (2 * j)) * basis(j), atol=1e-15)

    def test_commutation_relations_on_interior(self):
        a, ad = osc_a(J), osc_adag(Q, J)
        fd = osc_fd(lambda j: (1.3 + 0.4j) ** j, J)
        fd_minus = osc_fd(lambda j: (1.3 + 0.4j) ** (j - 1), J)
        fd_plus = osc_fd(lambda j: (1.3 + 0.4j) ** (j + 1), J)
        assert_allclose(fd @ a, a @ fd_minus, atol=1e-12)
        assert_allclose((fd @ ad)[:J - 1, :J - 1], (ad @ fd_plus)[:J - 1, :J - 1], atol=1e-12)
        aad = a @ ad
        target = np.eye(J) - osc_fd(lambda j: Q ** (2 * (j + 1)), J)
        assert_allclose(aad[:J - 1, :J - 1], target[:J - 1, :J - 1], atol=1e-15)

    def test_cutoff_validation(self):
        with pytest.raises(ValueError):
            osc_a(1)


class TestPochhammer:
    def test_empty_product(self):
        assert pochhammer(0.3 + 0.1j, 0, Q) == 1.0

    def test_vanishes_at_one(self):
        for j in (1, 2, 5):
            assert pochhammer(1.0, j, Q) == 0.0

    def test_shift_property(self):
        rng = np.random.default_rng(0)
        for _ in range(12):
            x = complex(rng.normal(), rng.normal()) * 0.4
            j = int(rng.integers(-3, 4))
            k = int(rng.integers(-3, 4))
            lhs = pochhammer(x, j + k, Q)
            rhs = pochhammer(x, j, Q) * pochhammer(Q ** (2 * j) * x, k, Q)
            assert abs(lhs - rhs) < 1e-12 * max(1.0, abs(lhs))

    def test_infinite_product(self):
        x = 0.4 - 0.2j
        direct = np.prod([1 - Q ** (2 * i) * x for i in range(200)])
        assert abs(pochhammer(x, math.inf, Q) - direct) < 1e-14

    def test_negative_branch_pole(self):
        with pytest.raises(ExclusionPointError):
            pochhammer(Q ** 2, -1, Q)


class TestPhi21:
    def test_zero_argument(self):
        assert phi21(0.3, 0.7j, 0.2, 0.0, Q) == 1.0

    def test_divergent_argument_rejected(self):
        with pytest.raises(ConvergenceError):
            phi21(0.3, 0.7, 0.2, 1.1, Q)

    def test_q_gauss_summation(self):
        rng = np.random.default_rng(1)
        count = 0
        while count < 20:
            q = (0.3 + 0.5 * rng.random()) * np.exp(0.4j * rng.random())
            a = complex(rng.normal(), rng.normal())
            b = complex(rng.normal(), rng.normal())
            c = complex(rng.normal(), rng.normal()) * 0.4
            x = c / (a * b)
            if abs(x) > 0.7:
                continue
            count += 1
            lhs = phi21(a, b, c, x, q)
            rhs = pochhammer(c / a, math.inf, q) * pochhammer(c / b, math.inf, q) \
                / (pochhammer(x, math.inf, q) * pochhammer(c, math.inf, q))
            assert abs(lhs - rhs) / max(1.0, abs(rhs)) < 1e-10

    def test_contiguous_relation(self):
        rng = np.random.default_rng(2)
        count = 0
        while count < 20:
            q = (0.3 + 0.5 * rng.random()) * np.exp(0.4j * rng.random())
            a = complex(rng.normal(), rng.normal())
            b = complex(rng.normal(), rng.normal())
            c = complex(rng.normal(), rng.normal()) * 0.5
            x = complex(rng.normal(), rng.normal()) * 0.3
            if abs(x) > 0.7 or abs(1 - c) < 0.05 or abs(1 - c / q ** 2) < 0.05:
                continue
            count += 1
            lhs = phi21(a, b, c, x, q)
            rhs = phi21(a, b, c / q ** 2, x, q) \
                - (c * x / q ** 2) * (1 - a) * (1 - b) / ((1 - c / q ** 2) * (1 - c)) \
                * phi21(q ** 2 * a, q ** 2 * b, q ** 2 * c, x, q)
            assert abs(lhs - rhs) / max(1.0, abs(lhs)) < 1e-10


class TestBoundaryDiagonals:
    XI = 0.21 + 0.04j
    XIT = 0.12 - 0.03j
    Z = 0.83 + 0.19j
    R = 1.2 - 0.3j

    def test_kw_lowest_levels(self):
        kw = kw_diagonal(self.Z, self.R, self.XI, Q, J)
        assert kw.entry(0) == 1.0
        expected = (Q / self.R) * (self.Z ** 2 - Q ** (-2) * self.XI)
        assert abs(kw.entry(1) - expected) < 1e-14 * abs(expected)

    def test_kw_vanishing_factor_kills_tail(self):
        # powers of two make z^2 - q^(-2) xi an exact floating zero
        kw = kw_diagonal(0.5, self.R, 0.0625, 0.5, J)
        assert kw.entry(0) == 1.0
        for j in range(1, J):
            assert kw.entry(j) == 0.0
        # generic complex point: tiny relative to the later factor growth
        z = np.sqrt(Q ** (-2) * self.XI)
        kw = kw_diagonal(z, self.R, self.XI, Q, J)
        growth = 1.0
        for j in range(1, J):
            assert abs(kw.entry(j)) < 1e-13 * growth
            growth *= abs(Q / self.R) * abs(z ** 2 - Q ** (-2 * (j + 1)) * self.XI)

    def test_ktw_level_zero(self):
        ktw = ktw_diagonal(self.Z, self.R, self.XIT, Q, J)
        expected = 1.0 / (1.0 - Q ** 2 * self.XIT * self.Z ** 2)
        assert abs(ktw.entry(0) - expected) < 1e-14 * abs(expected)

    def test_paired_product_cancels_growth(self):
        kw = kw_diagonal(self.Z, 1.0, self.XI, Q, 40)
        ktw = ktw_diagonal(self.Z, 1.0, self.XIT, Q, 40)
        paired = ktw.mantissa * kw.mantissa * np.exp(ktw.log_mag + kw.log_mag)
        direct = np.array([
            (self.XI * self.XIT) ** j
            * pochhammer(Q ** 2 * self.Z ** 2 / self.XI, j, Q)
            / pochhammer(Q ** 2 * self.XIT * self.Z ** 2, j + 1, Q)
            for j in range(40)])
        assert_allclose(paired, direct, atol=1e-14)

    def test_ktw_vanishing_boundary_projects(self):
        # at xitilde = 0 only the level-0 entry survives (the power factor kills the rest)
        ktw = ktw_diagonal(self.Z, self.R, 0.0, Q, J)
        diag = ktw.diagonal()
        assert diag[0] == 1.0
        assert_allclose(diag[1:], 0.0)

    def test_ktw_pole_detection(self):
        z = np.sqrt(Q ** (-4) / self.XIT)  # pole of the level-1 factor
        with pytest.raises(ExclusionPointError):
            ktw_diagonal(z, self.R, self.XIT, Q, J)

    def test_overflow_guard(self):
        kw = kw_diagonal(1.0, 1.0, 0.3, 0.3, 60)
        with pytest.raises(OverflowGuardError):
            kw.dense()

    def test_scaled(self):
        kw = kw_diagonal(self.Z, self.R, self.XI, Q, J)
        doubled = kw.scaled(2.0)
        assert abs(doubled.entry(3) - 2 * kw.entry(3)) < 1e-12 * abs(kw.entry(3))


class TestBorelImages:
    Zs = 0.91 + 0.23j
    Rs = 1.1 + 0.2j

    def test_weight_actions(self):
        k0 = rho_plus("k0", self.Zs, self.Rs, Q, J)
        for j in (0, 3, J - 1):
            assert abs(k0[j, j] - self.Rs * Q ** (2 * j)) < 1e-14
        k1m = rho_minus("k1", self.Zs, self.Rs, Q, J)
        for j in (0, 2):
            assert abs(k1m[j, j] - self.Rs * Q ** (-2 * j)) < 1e-14

    def test_qcommutator_scalar_identity(self):
        e0 = rho_plus("e0", self.Zs, self.Rs, Q, J)
        e1 = rho_plus("e1", self.Zs, self.Rs, Q, J)
        lhs = Q * (e0 @ e1 - Q ** (-2) * e1 @ e0)
        target = self.Zs ** 2 / (Q - 1 / Q) * np.eye(J)
        assert_allclose(lhs[:J - 1, :J - 1], target[:J - 1, :J - 1], atol=1e-12)

    def test_serre_relations_on_interior(self):
        def brk(x, y, p):
            return x @ y - p * y @ x

        for who in ("plus", "minus"):
            if who == "plus":
                g0 = rho_plus("e0", self.Zs, self.Rs, Q, J)
                g1 = rho_plus("e1", self.Zs, self.Rs, Q, J)
            else:
                g0 = rho_minus("f0", self.Zs, self.Rs, Q, J)
                g1 = rho_minus("f1", self.Zs, self.Rs, Q, J)
            for x, y in ((g0, g1), (g1, g0)):
                nested = brk(x, brk(x, brk(x, y, Q ** 2), 1.0), Q ** -2)
                core = nested[: J - 5, : J - 5]
                scale = max(np.abs(x).max(), np.abs(y).max()) ** 4
                assert np.abs(core).max() < 1e-11 * scale

    def test_unknown_generator(self):
        with pytest.raises(ValueError):
            rho_plus("x9", self.Zs, self.Rs, Q, J)
        with pytest.raises(ValueError):
            rho_minus("e0", self.Zs, self.Rs, Q, J)


class TestFockDiagonal:
    def test_shape_validation(self):
        with pytest.raises(ValueError):
            FockDiagonal(np.ones(3, dtype=complex), np.zeros(4))

    def test_qpower(self):
        m = q_power_d(Q, 5, -2)
        assert abs(m[3, 3] - Q ** -6) < 1e-14
