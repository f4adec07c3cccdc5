import itertools
from fractions import Fraction as F

import pytest

from ncpath.phi_engine import (
    AuditReport,
    GaussianRational,
    PhiContext,
    SourcePolynomial,
    alpha_cancellation_audit,
    apply_L,
    apply_L_to_exp,
    bareiss_determinant,
    build_phi,
    d_det,
    d_inverse_entry,
    dense_d_matrix,
    first_derivative_report,
    midslice_limit_check,
    run_phi_audit,
    second_derivative_report,
)

THETA = [[F(0), F(1, 10)], [F(-1, 10), F(0)]]
XF = [F(3), F(1)]
XIN = [F(5), F(-2)]


def gr(re=0, im=0):
    return GaussianRational(F(re), F(im))


# -- exact number type --------------------------------------------------------


def test_gaussian_rational_arithmetic():
    a = gr(F(1, 2), F(1, 3))
    b = gr(F(2), F(-1))
    assert a + b == gr(F(5, 2), F(-2, 3))
    assert a * b == gr(F(1) + F(1, 3), F(2, 3) - F(1, 2))
    assert (a / b) * b == a
    assert -a + a == gr()
    assert a.conjugate().conjugate() == a
    assert bool(gr()) is False
    with pytest.raises(ZeroDivisionError):
        a / gr()


# -- the coupling matrix ------------------------------------------------------


def test_determinant_closed_form_small():
    assert d_det(1) == 2
    assert d_det(2) == 3
    with pytest.raises(ValueError):
        d_det(0)


@pytest.mark.parametrize("m", range(1, 13))
def test_determinant_matches_dense_expansion(m):
    assert bareiss_determinant(dense_d_matrix(m)) == d_det(m)


def test_bareiss_handles_rational_singular_and_pivoting():
    assert bareiss_determinant([[F(1, 2), F(1, 3)], [F(1, 4), F(1, 5)]]) == \
        F(1, 10) - F(1, 12)
    assert bareiss_determinant([[1, 2], [2, 4]]) == 0
    assert bareiss_determinant([[0, 1], [1, 0]]) == -1  # needs a row swap


def test_inverse_entries_closed_form():
    assert d_inverse_entry(2, 1, 1) == F(2, 3)
    assert d_inverse_entry(2, 1, 2) == F(1, 3)
    assert d_inverse_entry(2, 2, 1) == F(1, 3)  # symmetric extension
    with pytest.raises(ValueError):
        d_inverse_entry(2, 0, 1)


@pytest.mark.parametrize("m", [1, 2, 5, 12])
def test_inverse_times_matrix_is_identity(m):
    dense = dense_d_matrix(m)
    for a in range(1, m + 1):
        for b in range(1, m + 1):
            s = sum(dense[a - 1][c - 1] * d_inverse_entry(m, c, b)
                    for c in range(1, m + 1))
            assert s == (1 if a == b else 0)


# -- the exponent -------------------------------------------------------------


def test_phi_is_bilinear_and_theta_free():
    ctx = PhiContext(3, F(1), F(1, 4))
    phi = build_phi(ctx, THETA, XF, XIN)
    assert phi.polynomial.degree() == 2
    # θ never enters the polynomial: rebuilding with -θ changes nothing
    other = build_phi(ctx, [[F(0), F(-1, 10)], [F(1, 10), F(0)]], XF, XIN)
    assert phi.polynomial == other.polynomial


def test_phi_quadratic_coefficients_symmetric():
    ctx = PhiContext(2, F(1), F(1, 3))
    phi = build_phi(ctx, THETA, XF, XIN)
    for mono, coeff in phi.polynomial.terms.items():
        if len(mono) == 2:
            assert phi.polynomial.coefficient((mono[1], mono[0])) == coeff


@pytest.mark.parametrize("m", [1, 2, 4])
def test_phi_constant_is_free_kernel_exponent(m):
    # at zero sources the exponent reproduces i M |x_f - x_in|² / (2ħT)
    T = F(3, 2)
    ctx = PhiContext(m, T, F(1, 5))
    phi = build_phi(ctx, THETA, XF, XIN)
    d2 = sum((f - i) ** 2 for f, i in zip(XF, XIN))
    assert phi.constant == GaussianRational(0, d2 / (2 * T))


def test_free_kernel_value_matches_closed_fresnel_form():
    import numpy as np

    m, T = 4, 2.0
    ctx = PhiContext(m, F(2), F(0))
    phi = build_phi(ctx, THETA, XF, XIN)
    prefactor = (1.0 / (2j * np.pi * T)) ** (len(XF) / 2.0)
    value = prefactor * np.exp(phi.constant.to_complex())
    d2 = float(sum((f - i) ** 2 for f, i in zip(XF, XIN)))
    closed = (1.0 / (2j * np.pi * T)) ** 1.0 * np.exp(1j * d2 / (2 * T))
    assert abs(value - closed) < 1e-14


def test_first_derivative_exact_structure():
    # the coordinate route is the α-weighted straight-line point; the
    # momentum route is (M/T)·θ·(x_f - x_in) for every slice label
    m, T, alpha = 5, F(2), F(1, 4)
    ctx = PhiContext(m, T, alpha)
    phi = build_phi(ctx, THETA, XF, XIN)
    for a in range(m + 1):
        for i in range(2):
            rep = first_derivative_report(phi, a, i)
            wf = (F(2 * a + 1, 2) + alpha) / (m + 1)
            wi = (F(2 * (m - a) + 1, 2) - alpha) / (m + 1)
            assert rep.coordinate_route == GaussianRational(XF[i] * wf + XIN[i] * wi)
            expected = sum((THETA[i][l] * (XF[l] - XIN[l]) for l in range(2)), F(0)) / T
            assert rep.momentum_route == GaussianRational(expected)


def test_first_derivative_endpoint_limit_structure():
    # endpoints converge onto the boundary points as the slicing refines
    for m in (3, 10, 40):
        ctx = PhiContext(m, F(1), F(1, 3))
        phi = build_phi(ctx, THETA, XF, XIN)
        end = first_derivative_report(phi, m, 0).coordinate_route
        gap = end - GaussianRational(XF[0])
        assert gap.im == 0
        assert abs(gap.re) <= abs(XF[0] - XIN[0]) / (m + 1)
        start = first_derivative_report(phi, 0, 0).coordinate_route
        gap0 = start - GaussianRational(XIN[0])
        assert abs(gap0.re) <= abs(XF[0] - XIN[0]) / (m + 1)


def test_single_l_with_coupling_matches_route_sum():
    ctx = PhiContext(3, F(1), F(0))
    phi = build_phi(ctx, THETA, XF, XIN)
    for a in (0, 2, 3):
        rep = first_derivative_report(phi, a, 0)
        assert apply_L(phi, [(a, 0)]).at_zero() == rep.total


def test_triple_l_vanishes_exactly():
    ctx = PhiContext(2, F(1), F(1, 2))
    phi = build_phi(ctx, THETA, XF, XIN)
    assert len(apply_L(phi, [(0, 0), (1, 1), (2, 0)]).terms) == 0


def _pairing_expansion(phi, indices):
    """Independent oracle: sum over pairings of first and second derivatives."""
    def first(idx):
        return apply_L(phi, [idx]).at_zero()

    def second(i1, i2):
        return apply_L(phi, [i1, i2]).at_zero()

    n = len(indices)
    total = GaussianRational(0)
    # partition indices into singletons and unordered pairs
    def partitions(rest):
        if not rest:
            yield []
            return
        head, tail = rest[0], rest[1:]
        for sub in partitions(tail):
            yield [("s", head)] + sub
        for j in range(len(tail)):
            reduced = tail[:j] + tail[j + 1:]
            for sub in partitions(reduced):
                yield [("p", head, tail[j])] + sub

    for part in partitions(list(range(n))):
        term = GaussianRational(1)
        for piece in part:
            if piece[0] == "s":
                term = term * first(indices[piece[1]])
            else:
                term = term * second(indices[piece[1]], indices[piece[2]])
        total = total + term
    return total


@pytest.mark.parametrize("count", [1, 2, 3, 4])
def test_exponential_action_matches_pairing_expansion(count):
    ctx = PhiContext(3, F(1), F(1, 4))
    phi = build_phi(ctx, THETA, XF, XIN)
    indices = [(0, 0), (1, 1), (2, 0), (3, 1)][:count]
    assert apply_L_to_exp(phi, indices) == _pairing_expansion(phi, indices)


# -- second derivatives -------------------------------------------------------


def test_momentum_momentum_part_uniform():
    # θ^{ik}θ^{jk}·Mħ/(iT) for every slice pair, every α
    T = F(1)
    for m in (1, 3, 6):
        for alpha in (F(-1, 2), F(0), F(1, 3)):
            phi = build_phi(PhiContext(m, T, alpha), THETA, XF, XIN)
            for a in range(m + 1):
                for b in range(m + 1):
                    rep = second_derivative_report(phi, a, b, 0, 0)
                    tsq = sum((THETA[0][k] * THETA[0][k] for k in range(2)), F(0))
                    assert rep.zz == GaussianRational(0, -tsq / T)
                    rep01 = second_derivative_report(phi, a, b, 0, 1)
                    assert rep01.zz == GaussianRational(0)


def test_mixed_sum_case_structure():
    # jz + zj: zero on the diagonal, ±iħθ^{ij}(m+1-|a-b|)/(m+1) off it
    m = 4
    for alpha in (F(-1, 2), F(0), F(2, 5)):
        phi = build_phi(PhiContext(m, F(1), alpha), THETA, XF, XIN)
        for a in range(m + 1):
            for b in range(m + 1):
                rep = second_derivative_report(phi, a, b, 0, 1)
                if a == b:
                    assert rep.jz_plus_zj == GaussianRational(0)
                else:
                    sign = 1 if a < b else -1
                    mag = F(m + 1 - abs(a - b), m + 1)
                    assert rep.jz_plus_zj == GaussianRational(
                        0, sign * THETA[0][1] * mag)


def test_mixed_parts_individually_alpha_dependent():
    m = 3
    phi_a = build_phi(PhiContext(m, F(1), F(0)), THETA, XF, XIN)
    phi_b = build_phi(PhiContext(m, F(1), F(1, 2)), THETA, XF, XIN)
    r_a = second_derivative_report(phi_a, 1, 2, 0, 1)
    r_b = second_derivative_report(phi_b, 1, 2, 0, 1)
    assert r_a.jz != r_b.jz
    assert r_a.jz_plus_zj == r_b.jz_plus_zj


def test_coordinate_coordinate_endpoint_and_diagonal_cases():
    # frozen case structure of the coordinate-coordinate second derivative
    m, alpha = 5, F(1, 3)
    ctx = PhiContext(m, F(1), alpha)
    phi = build_phi(ctx, THETA, XF, XIN)
    eps = ctx.epsilon
    half = F(1, 2)

    def jj(a, b):
        return second_derivative_report(phi, a, b, 0, 0).jj

    assert jj(0, 0) == GaussianRational(0, eps * F(m, m + 1) * (half + alpha) ** 2)
    assert jj(m, m) == GaussianRational(0, eps * F(m, m + 1) * (half - alpha) ** 2)
    for a in range(1, m):
        bracket = F(4 * a * (m - a) + m, 4) + alpha * (m - 2 * a) + m * alpha**2
        assert jj(a, a) == GaussianRational(0, eps * bracket / (m + 1))


def test_coordinate_coordinate_offdiagonal_closed_form():
    # exact interior off-diagonal bracket from the direct double sum:
    # ¼(2a+1)(2m+1-2b) + α(m-b-a) - α², over (m+1); note the -α² tail and
    # the (2a+1) factor, both absent from the leading-order reading but
    # required for exact equality at finite slice count
    m = 4
    for alpha in (F(0), F(1, 4), F(-2, 5)):
        ctx = PhiContext(m, F(1), alpha)
        phi = build_phi(ctx, THETA, XF, XIN)
        eps = ctx.epsilon
        for a in range(1, m):
            for b in range(a + 1, m):
                bracket = (F((2 * a + 1) * (2 * m + 1 - 2 * b), 4)
                           + alpha * (m - b - a) - alpha**2)
                expected = GaussianRational(0, eps * bracket / (m + 1))
                assert second_derivative_report(phi, a, b, 0, 0).jj == expected
                # symmetric under swapping the pair
                assert second_derivative_report(phi, b, a, 0, 0).jj == expected


def test_offdiagonal_jj_component_structure():
    # coordinate-coordinate part is diagonal in the component indices
    phi = build_phi(PhiContext(3, F(1), F(1, 4)), THETA, XF, XIN)
    assert second_derivative_report(phi, 1, 2, 0, 1).jj == GaussianRational(0)


def test_jj_brownian_bridge_shape():
    # at scaled labels a = sm, b = tm the surviving coefficient approaches
    # (iħT/M)·min(s,t)(1 - max(s,t)), the bridge covariance, within O(1/m)
    T = F(1)
    for m in (40, 80):
        phi = build_phi(PhiContext(m, T, F(0)), THETA, XF, XIN)
        for s, t in ((F(1, 4), F(1, 2)), (F(1, 2), F(3, 4)), (F(1, 4), F(3, 4)),
                     (F(1, 2), F(1, 2))):
            a, b = int(s * m), int(t * m)
            value = second_derivative_report(phi, a, b, 0, 0).jj
            target = float(min(s, t) * (1 - max(s, t)))
            assert value.re == 0
            assert abs(float(value.im) - target) < 4.0 / m


# -- limit and audits ---------------------------------------------------------


def test_midslice_limit_exact_values():
    value, error = midslice_limit_check(2, F(1))
    assert (value, error) == (F(2, 3), F(1, 3))
    for m in (10, 100, 1000):
        value, error = midslice_limit_check(m, F(1))
        assert value == F(m, m + 1)
        assert error == F(1, m + 1)
    assert midslice_limit_check(1000, F(1))[1] < F(11, 10000)  # < 1.1e-3


def test_midslice_limit_rejects_odd():
    with pytest.raises(ValueError):
        midslice_limit_check(3, F(1))


def test_midslice_limit_scales_with_duration():
    value, error = midslice_limit_check(4, F(3))
    assert value == F(9) * F(4, 5)
    assert error == F(9, 5)


def test_alpha_cancellation_audit_passes():
    report = alpha_cancellation_audit(3, [F(-1, 2), F(0), F(1, 2)])
    assert isinstance(report, AuditReport)
    assert report.ok


def test_alpha_cancellation_audit_needs_three_values():
    with pytest.raises(ValueError):
        alpha_cancellation_audit(3, [F(0), F(1, 2)])


def test_full_identity_audit_passes():
    report = run_phi_audit(4, [F(-1, 2), F(-1, 4), F(0), F(1, 4), F(1, 2)])
    assert report.ok
    names = [row.name for row in report.rows]
    assert "determinant closed form" in names
    assert "mixed second-derivative cancellation" in names


def test_time_reversal_relabeling_preserves_coefficients():
    # Φ(J, Z; x_f, x_in, α) = Φ(J∘rev, -Z∘rev; x_in, x_f, -α): coefficient
    # map with a sign per momentum-source factor, hence an invariant
    # multiset of absolute coefficients
    m = 3
    ctx = PhiContext(m, F(1), F(1, 4))
    ctx_rev = PhiContext(m, F(1), F(-1, 4))
    phi = build_phi(ctx, THETA, XF, XIN)
    phi_rev = build_phi(ctx_rev, THETA, XIN, XF)

    def relabel(mono):
        out = []
        signs = 1
        for kind, a, i in mono:
            out.append((kind, m - a, i))
            if kind == "Z":
                signs = -signs
        return tuple(sorted(out)), signs

    for mono, coeff in phi.polynomial.terms.items():
        target, sign = relabel(mono)
        assert phi_rev.polynomial.coefficient(target) == coeff * sign
    multiset = sorted((abs(c.re), abs(c.im)) for c in phi.polynomial.terms.values())
    multiset_rev = sorted((abs(c.re), abs(c.im))
                          for c in phi_rev.polynomial.terms.values())
    assert multiset == multiset_rev


def test_source_polynomial_basics():
    p = SourcePolynomial()
    v = ("J", 0, 0)
    p.add_term((v, v), GaussianRational(F(1, 2)))
    d2 = p.differentiate(v).differentiate(v).at_zero()
    assert d2 == GaussianRational(1)
    assert p.coefficient((v, v)) == GaussianRational(F(1, 2))


def test_context_validation():
    with pytest.raises(ValueError):
        PhiContext(0, F(1), F(0))
    with pytest.raises(ValueError):
        PhiContext(2, F(0), F(0))
    with pytest.raises(ValueError):
        PhiContext(2, F(1), F(3, 4))
    assert PhiContext(3, F(2), F(0)).epsilon == F(1, 2)
