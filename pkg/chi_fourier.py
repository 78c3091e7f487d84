#!/usr/bin/env python3
"""
chi_fourier.py
Indicador de divisibilidade em intervalos curtos χ_q(x): contagem exata de
múltiplos e expansão finita de Fourier, coeficientes c^±_{j,q}, soma de
Parseval e soma de cossenos em forma fechada.
"""
import math
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Union

import numpy as np

logger = logging.getLogger('symlab.chi_fourier')

EXPANSION_TOL = 1e-9


@dataclass(frozen=True)
class RationalPhase:
    """Fração j/ℓ da rede de frequências."""

    numerator: int
    denominator: int

    def __post_init__(self):
        if self.denominator < 1:
            raise ValueError(f"Denominador precisa ser positivo (ℓ={self.denominator})")

    @property
    def reduced(self) -> bool:
        return math.gcd(self.numerator, self.denominator) == 1

    def as_fraction(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    def __str__(self) -> str:
        return f"{self.numerator}/{self.denominator}"


@dataclass(frozen=True)
class FourierCoefficient:
    """c^±_{j,q} = (4/q)·cot(πj/q)·sin²(πjh/q) = F_h^±(j/q)/q."""

    j: int
    q: int
    h: int
    value: float


@dataclass(frozen=True)
class ParsevalScan:
    qmax: int
    hmax: int
    max_ratio_min: float
    max_ratio_norm: float
    worst_q: int
    worst_h: int


def norm(theta: Union[Fraction, float]) -> Union[Fraction, float]:
    """‖θ‖: distância ao inteiro mais próximo (exata em frações)."""
    resto = theta - math.floor(theta)
    return min(resto, 1 - resto)


def _as_phase(a) -> Fraction:
    if isinstance(a, RationalPhase):
        return a.as_fraction()
    return Fraction(a)


def big_f(a: Union[RationalPhase, Fraction], h: int) -> float:
    """
    F_h^±(a) = 4·cot(πa)·sin²(πah) para 0 < a <= 1/2.

    Os dois zeros analíticos (a = 1/2 e a·h inteiro) são detectados em
    aritmética racional e devolvidos como 0.0 exato.
    """
    fase = _as_phase(a)
    if not 0 < fase <= Fraction(1, 2):
        raise ValueError(f"F_h exige 0 < a <= 1/2 (a={fase})")
    j, q = fase.numerator, fase.denominator
    if 2 * j == q or (j * h) % q == 0:
        return 0.0
    seno = math.sin(math.pi * ((j * h) % q) / q)
    return 4.0 / math.tan(math.pi * j / q) * seno * seno


def big_f_array(j: np.ndarray, l: np.ndarray, h: int) -> np.ndarray:
    """F_h^±(j/ℓ) vetorizado, para 0 < j/ℓ <= 1/2 (mesmos testes racionais)."""
    j = np.asarray(j, dtype=np.int64)
    l = np.asarray(l, dtype=np.int64)
    resto = (j * h) % l
    zero = (2 * j == l) | (resto == 0)
    seno = np.sin(np.pi * resto / l)
    valores = 4.0 / np.tan(np.pi * j / l) * seno * seno
    return np.where(zero, 0.0, valores)


def fourier_coefficient(j: int, q: int, h: int) -> FourierCoefficient:
    """c^±_{j,q} para 0 <= j <= q; j = 0 e j = q valem 0 (termo sem seno)."""
    if q < 1 or not 0 <= j <= q:
        raise ValueError(f"Coeficiente exige 0 <= j <= q (j={j}, q={q})")
    if j in (0, q):
        return FourierCoefficient(j, q, h, 0.0)
    if 2 * j > q:
        espelho = fourier_coefficient(q - j, q, h)
        return FourierCoefficient(j, q, h, -espelho.value)
    return FourierCoefficient(j, q, h, big_f(Fraction(j, q), h) / q)


def fourier_coefficients(q: int, h: int) -> np.ndarray:
    """Vetor c^±_{j,q}, j = 0..q-1, antissimétrico em j <-> q-j."""
    coef = np.zeros(q, dtype=np.float64)
    if q < 3:
        return coef
    j = np.arange(1, (q - 1) // 2 + 1)
    metade = big_f_array(j, np.full(len(j), q), h) / q
    coef[j] = metade
    coef[q - j] = -metade
    return coef


def chi_direct_doubled(q: int, x: np.ndarray, h: int) -> np.ndarray:
    """2·χ_q(x) em inteiros, por divisões inteiras (vetorizado em x)."""
    x = np.asarray(x, dtype=np.int64)

    def multiplos(a, b):
        return b // q - (a - 1) // q

    direita = multiplos(x + 1, x + h)
    esquerda = multiplos(x - h, x - 1)
    extremo_dir = ((x + h) % q == 0).astype(np.int64)
    extremo_esq = ((x - h) % q == 0).astype(np.int64)
    return -(2 * direita - 2 * esquerda - extremo_dir + extremo_esq)


def chi_direct(q: int, x: int, h: int) -> Fraction:
    """
    χ_q(x): contagem com sinal, negada e com extremos pela metade, dos
    múltiplos de q em [x-h, x+h]. Sempre múltiplo exato de 1/2.
    """
    if q < 1 or h < 1:
        raise ValueError(f"χ_q exige q >= 1 e h >= 1 (q={q}, h={h})")
    if x - h < 0:
        raise ValueError(f"χ_q exige x - h >= 0 (x={x}, h={h})")
    return Fraction(int(chi_direct_doubled(q, np.array([x]), h)[0]), 2)


def _divisors(q: int) -> List[int]:
    pequenos = [d for d in range(1, math.isqrt(q) + 1) if q % d == 0]
    return sorted(set(pequenos + [q // d for d in pequenos]))


def _expansion_terms(q: int, h: int):
    """Termos (j, ℓ, peso) da expansão: peso = (ℓ/q)·c^±_{j,ℓ} = F_h^±(j/ℓ)/q."""
    js, ls = [], []
    for l in _divisors(q):
        if l == 1:
            continue
        for j in range(1, l // 2 + 1):
            if math.gcd(j, l) == 1:
                js.append(j)
                ls.append(l)
    js = np.array(js, dtype=np.int64)
    ls = np.array(ls, dtype=np.int64)
    pesos = big_f_array(js, ls, h) / q if len(js) else np.zeros(0)
    return js, ls, pesos


def chi_fourier_values(q: int, x: np.ndarray, h: int) -> np.ndarray:
    """Expansão de Fourier de χ_q nos pontos x; fase (x·j mod ℓ)/ℓ reduzida em inteiros."""
    if q < 1:
        raise ValueError(f"χ_q exige q >= 1 (q={q})")
    x = np.asarray(x, dtype=np.int64)
    js, ls, pesos = _expansion_terms(q, h)
    if len(js) == 0:
        return np.zeros(len(x), dtype=np.float64)
    fases = (np.outer(js, x) % ls[:, None]) / ls[:, None]
    return pesos @ np.sin(2 * np.pi * fases)


def chi_fourier_eval(q: int, x: int, h: int) -> float:
    return float(chi_fourier_values(q, np.array([x]), h)[0])


def parseval_sum(q: int, h: int) -> float:
    """Soma de |c^±_{j,q}|² para 0 < j < q (o termo j = q vale 0)."""
    if q < 2:
        raise ValueError(f"Soma de Parseval exige q >= 2 (q={q})")
    coef = fourier_coefficients(q, h)
    return float(np.dot(coef, coef))


def _parseval_sums(q: int, hs: np.ndarray) -> np.ndarray:
    """parseval_sum(q, h) para vários h de uma vez (j e q-j contribuem igual)."""
    if q < 3:
        return np.zeros(len(hs), dtype=np.float64)
    j = np.arange(1, (q - 1) // 2 + 1, dtype=np.int64)
    resto = (hs[:, None] * j[None, :]) % q
    seno = np.sin(np.pi * resto / q)
    coef = np.where(resto == 0, 0.0, 4.0 / np.tan(np.pi * j / q) * seno * seno / q)
    return 2.0 * np.sum(coef * coef, axis=1)


def parseval_scan(qmax: int, hmax: int) -> ParsevalScan:
    """
    Varre 2 <= q <= qmax, 1 <= h <= hmax e registra as maiores razões
    parseval_sum / min(1, h/q) e parseval_sum / ‖h/q‖ (esta só onde ‖h/q‖ > 0).
    """
    if qmax < 2 or hmax < 1:
        raise ValueError(f"Varredura exige qmax >= 2 e hmax >= 1 (qmax={qmax}, hmax={hmax})")
    pior_min, pior_norm = 0.0, 0.0
    pior_q, pior_h = 2, 1
    hs = np.arange(1, hmax + 1, dtype=np.int64)
    for q in range(2, qmax + 1):
        somas = _parseval_sums(q, hs)
        razoes = somas / np.minimum(1.0, hs / q)
        k = int(np.argmax(razoes))
        if razoes[k] > pior_min:
            pior_min, pior_q, pior_h = float(razoes[k]), q, int(hs[k])
        resto = hs % q
        distancia = np.minimum(resto, q - resto) / q
        validos = distancia > 0
        if np.any(validos):
            pior_norm = max(pior_norm, float(np.max(somas[validos] / distancia[validos])))
    logger.info(f"Parseval: razão máxima {pior_min:.6f} em q={pior_q}, h={pior_h}; "
                f"forma ‖h/q‖: {pior_norm:.6f}")
    return ParsevalScan(qmax, hmax, pior_min, pior_norm, pior_q, pior_h)


def cosine_exp_sum(theta: Union[RationalPhase, Fraction, float], N: int) -> float:
    """
    Soma de cos(2πθx) para x = N+1..2N em forma fechada:
    sin(πNθ)·cos(π(3N+1)θ)/sin(πθ), e N quando θ é inteiro.
    """
    if N < 1:
        raise ValueError(f"Soma de cossenos exige N >= 1 (N={N})")
    if isinstance(theta, (RationalPhase, Fraction, int)):
        fase = _as_phase(theta)
        return float(cosine_exp_sum_array(np.array([fase.numerator]),
                                          np.array([fase.denominator]), N)[0])
    theta = float(theta)
    if theta.is_integer():
        return float(N)
    return (math.sin(math.pi * N * theta) * math.cos(math.pi * (3 * N + 1) * theta)
            / math.sin(math.pi * theta))


def cosine_exp_sum_array(p: np.ndarray, D: np.ndarray, N: int) -> np.ndarray:
    """Forma fechada para θ = p/D em lote; fases reduzidas módulo 2D em inteiros."""
    p = np.asarray(p, dtype=np.int64)
    D = np.asarray(D, dtype=np.int64)
    inteiro = p % D == 0
    dois_d = 2 * D
    s1 = np.sin(np.pi * ((N * p) % dois_d) / D)
    c1 = np.cos(np.pi * (((3 * N + 1) * p) % dois_d) / D)
    s0 = np.sin(np.pi * (p % dois_d) / D)
    with np.errstate(divide='ignore', invalid='ignore'):
        valores = s1 * c1 / s0
    return np.where(inteiro, float(N), valores)


def verify_expansion(qmax: int, h: int, N: int, samples: int = 200, seed: int = 0) -> List[dict]:
    """
    Compara χ_q pela contagem e pela expansão em x sorteados em (N, 2N].
    Devolve, para cada q, a linha do pior x.
    """
    if qmax < 1 or h < 1 or N < 1:
        raise ValueError(f"Verificação exige qmax, h, N >= 1 (qmax={qmax}, h={h}, N={N})")
    if N - h < 0:
        raise ValueError(f"Verificação exige N >= h (N={N}, h={h})")
    rng = np.random.default_rng(seed)
    x = np.sort(rng.integers(N + 1, 2 * N + 1, size=samples))
    linhas = []
    for q in range(1, qmax + 1):
        direto = chi_direct_doubled(q, x, h) / 2
        fourier = chi_fourier_values(q, x, h)
        erros = np.abs(direto - fourier)
        pior = int(np.argmax(erros))
        linhas.append({
            'q': q,
            'h': h,
            'x': int(x[pior]),
            'chi_direct': float(direto[pior]),
            'chi_fourier': float(fourier[pior]),
            'abs_err': float(erros[pior]),
        })
    return linhas
