import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chi_fourier import (EXPANSION_TOL, RationalPhase, _parseval_sums, big_f, chi_direct, chi_direct_doubled,
                         chi_fourier_eval, chi_fourier_values, cosine_exp_sum, cosine_exp_sum_array,
                         fourier_coefficient, fourier_coefficients, norm, parseval_scan, parseval_sum,
                         verify_expansion)

from conftest import PARSEVAL_CONSTANT


def _chi_enumerado(q, x, h):
    """Contagem explícita dos múltiplos de q na janela."""
    total = Fraction(0)
    for n in range(x - h, x + h + 1):
        if n % q or n == x:
            continue
        peso = Fraction(1, 2) if abs(n - x) == h else Fraction(1)
        total += peso if n > x else -peso
    return -total


def test_chi_direct_examples():
    assert chi_direct(3, 10, 2) == Fraction(1, 2)
    assert chi_direct(4, 11, 2) == -1
    for x in range(5, 40):
        assert chi_direct(1, x, 4) == 0


def test_chi_direct_requires_valid_window():
    with pytest.raises(ValueError):
        chi_direct(3, 1, 2)
    with pytest.raises(ValueError):
        chi_direct(0, 10, 2)


@given(st.integers(min_value=1, max_value=60), st.integers(min_value=1, max_value=30),
       st.integers(min_value=0, max_value=500))
def test_chi_direct_matches_enumeration(q, h, deslocamento):
    x = h + deslocamento
    valor = chi_direct(q, x, h)
    assert valor == _chi_enumerado(q, x, h)
    assert (2 * valor).denominator == 1


def test_chi_direct_is_periodic():
    x = np.arange(50, 150)
    assert np.array_equal(chi_direct_doubled(7, x, 5), chi_direct_doubled(7, x + 7, 5))


def test_big_f_examples():
    assert big_f(Fraction(1, 2), 5) == 0.0
    assert big_f(RationalPhase(1, 2), 1) == 0.0
    assert big_f(Fraction(1, 3), 2) == pytest.approx(math.sqrt(3), abs=1e-12)
    assert big_f(Fraction(1, 4), 4) == 0.0


@pytest.mark.parametrize('a', [Fraction(0), Fraction(2, 3), Fraction(-1, 5), Fraction(1)])
def test_big_f_domain(a):
    with pytest.raises(ValueError):
        big_f(a, 3)


def test_fourier_coefficients_are_positive_in_lower_half():
    for q in range(2, 40):
        for h in range(1, 12):
            for j in range(1, q // 2 + 1):
                assert fourier_coefficient(j, q, h).value >= 0


def test_fourier_coefficient_mirror():
    c = fourier_coefficient(1, 7, 3).value
    assert fourier_coefficient(6, 7, 3).value == -c
    assert fourier_coefficient(0, 7, 3).value == 0.0
    assert fourier_coefficient(7, 7, 3).value == 0.0
    np.testing.assert_allclose(fourier_coefficients(7, 3)[1:4], [fourier_coefficient(j, 7, 3).value
                                                                 for j in range(1, 4)])


def test_chi_fourier_examples():
    assert chi_fourier_eval(3, 10, 2) == pytest.approx(0.5, abs=1e-12)
    for x in (5, 6, 17, 1000):
        assert chi_fourier_eval(2, x, 3) == pytest.approx(0.0, abs=1e-15)
        assert chi_fourier_eval(1, x, 3) == 0.0


@given(st.integers(min_value=1, max_value=120), st.integers(min_value=1, max_value=40),
       st.lists(st.integers(min_value=0, max_value=10 ** 6), min_size=1, max_size=20))
def test_expansion_matches_direct_count(q, h, deslocamentos):
    x = np.array(deslocamentos, dtype=np.int64) + h
    direto = chi_direct_doubled(q, x, h) / 2
    fourier = chi_fourier_values(q, x, h)
    np.testing.assert_allclose(fourier, direto, rtol=0, atol=EXPANSION_TOL * q)


def test_verify_expansion_rows():
    linhas = verify_expansion(50, 7, 1000, samples=100)
    assert [l['q'] for l in linhas] == list(range(1, 51))
    for linha in linhas:
        assert 1000 < linha['x'] <= 2000
        assert linha['abs_err'] <= EXPANSION_TOL * linha['q']
    assert verify_expansion(50, 7, 1000, samples=100) == linhas


def test_verify_expansion_rejects_bad_window():
    with pytest.raises(ValueError):
        verify_expansion(10, 20, 10)


def test_parseval_sum_examples():
    assert parseval_sum(3, 2) == pytest.approx(2 / 3, abs=1e-12)
    assert parseval_sum(2, 5) == 0.0
    with pytest.raises(ValueError):
        parseval_sum(1, 3)
    assert parseval_sum(10, 10) <= PARSEVAL_CONSTANT


def test_parseval_vectorized_matches_scalar():
    hs = np.arange(1, 30, dtype=np.int64)
    for q in (3, 4, 9, 16, 25):
        esperado = [parseval_sum(q, int(h)) for h in hs]
        np.testing.assert_allclose(_parseval_sums(q, hs), esperado, rtol=1e-12, atol=1e-15)


def test_parseval_scan_small_range():
    scan = parseval_scan(120, 120)
    assert 0 < scan.max_ratio_min <= PARSEVAL_CONSTANT
    assert 2 <= scan.worst_q <= 120
    assert math.isfinite(scan.max_ratio_norm)


@pytest.mark.slow
def test_parseval_scan_full_range():
    scan = parseval_scan(2000, 200)
    assert scan.max_ratio_min <= PARSEVAL_CONSTANT
    assert scan.max_ratio_min == pytest.approx(7.97, abs=0.01)
    assert (scan.worst_q, scan.worst_h) == (473, 200)


def test_norm():
    assert norm(Fraction(7, 3)) == Fraction(1, 3)
    assert norm(Fraction(5, 6)) == Fraction(1, 6)
    assert norm(Fraction(2)) == 0
    assert norm(0.5) == 0.5


def test_cosine_exp_sum_examples():
    assert cosine_exp_sum(0, 100) == 100
    assert cosine_exp_sum(Fraction(1, 3), 6) == pytest.approx(0.0, abs=1e-12)
    assert cosine_exp_sum(RationalPhase(1, 2), 10) == pytest.approx(0.0, abs=1e-12)
    assert cosine_exp_sum(3.0, 7) == 7.0
    with pytest.raises(ValueError):
        cosine_exp_sum(Fraction(1, 3), 0)


@given(st.integers(min_value=1, max_value=400), st.integers(min_value=-800, max_value=800),
       st.integers(min_value=1, max_value=300))
def test_cosine_closed_form_matches_loop(D, p, N):
    direto = sum(math.cos(2 * math.pi * ((p * x) % D) / D) for x in range(N + 1, 2 * N + 1))
    fechado = cosine_exp_sum_array(np.array([p]), np.array([D]), N)[0]
    assert fechado == pytest.approx(direto, abs=1e-9 * N)
    assert abs(fechado) <= N + 1e-9


def test_cosine_float_matches_rational():
    assert cosine_exp_sum(0.25, 37) == pytest.approx(cosine_exp_sum(Fraction(1, 4), 37), abs=1e-9)


def test_big_f_vanishes_at_one_half():
    for h in range(1, 1001):
        assert big_f(Fraction(1, 2), h) == 0.0


@given(st.integers(min_value=2, max_value=10 ** 4), st.integers(min_value=1, max_value=10 ** 3))
def test_lower_half_coefficients_are_nonnegative(q, h):
    assert np.all(fourier_coefficients(q, h)[:q // 2 + 1] >= 0)


@pytest.mark.slow
def test_lower_half_coefficients_at_largest_moduli():
    for q in (9973, 10 ** 4):
        for h in range(1, 1001):
            assert np.all(fourier_coefficients(q, h)[:q // 2 + 1] >= 0)


@pytest.mark.slow
def test_expansion_on_wide_range():
    for h in range(1, 51):
        for linha in verify_expansion(300, h, 10 ** 4, samples=200, seed=h):
            assert 10 ** 4 < linha['x'] <= 2 * 10 ** 4
            assert linha['abs_err'] <= EXPANSION_TOL * linha['q']


@pytest.mark.parametrize('N', [10, 10 ** 2, 10 ** 3, 10 ** 4])
def test_cosine_sum_bound_on_reduced_fractions(N):
    p, D = [], []
    for l in range(2, 501):
        for j in range(1, l):
            if math.gcd(j, l) == 1:
                p.append(j)
                D.append(l)
    p = np.array(p, dtype=np.int64)
    D = np.array(D, dtype=np.int64)
    distancia = np.minimum(p, D - p) / D
    cota = np.minimum(N, 1.0 / (2.0 * distancia))
    valores = cosine_exp_sum_array(p, D, N)
    violacoes = np.abs(valores) > cota * (1 + 1e-9)
    assert not np.any(violacoes)
