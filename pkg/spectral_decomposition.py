#!/usr/bin/env python3
"""
spectral_decomposition.py
Decomposição exata de I_f em diagonal D_f^± mais termos fora da diagonal
(cossenos em δ e σ sobre pares de frações reduzidas), coeficientes de
Ramanujan R_ℓ e o classificador de pares quase inteiros.

Convenção dos pares: cada par não ordenado de frações distintas aparece uma
vez, com δ = j/ℓ - r/t > 0, e entra com fator 1 em
R_ℓ·R_t·F(j/ℓ)·F(r/t)·[C(δ) - C(σ)]; o fator 2 do produto de senos é
absorvido pelo ½ de sin·sin = ½[cos(a-b) - cos(a+b)].
"""
import os
import math
import bisect
import logging
from dataclasses import dataclass, asdict
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from arith_tables import FunctionTable, convolve_with_ones
from chi_fourier import (RationalPhase, big_f, big_f_array, chi_direct_doubled,
                         cosine_exp_sum_array, norm)
from symmetry_engine import (SymmetrySeries, WindowParams, block_sum, series_square_sum,
                             symmetry_integral)

logger = logging.getLogger('symlab.spectral_decomposition')

CLOSURE_TOL = 1e-8
RECONCILE_MAX_Q = 40
DEFAULT_PAIR_BUDGET = 10 ** 6
PAIR_CSV_COLUMNS = ['j', 'l', 'r', 't', 'delta_num', 'delta_den', 'sigma_num', 'sigma_den']


class PairBudgetExceeded(ValueError):
    """Quantidade de pares fora da diagonal acima do orçamento configurado."""


@dataclass(frozen=True)
class FractionPair:
    first: RationalPhase
    second: RationalPhase
    delta: Fraction
    sigma: Fraction
    f_product_zero: Optional[bool] = None


@dataclass(frozen=True)
class DecompositionReport:
    i_direct: float
    i_via_chi: float
    diagonal: float
    offdiag_delta: float
    offdiag_sigma: float
    residual: float
    pair_count: int
    near_pair_count: int

    def to_dict(self) -> dict:
        return asdict(self)


def default_pair_budget() -> int:
    return int(os.getenv('SYMLAB_PAIR_BUDGET', DEFAULT_PAIR_BUDGET))


def default_threshold(N: int, Q: int) -> int:
    """A = max(N·⌈log N⌉, 2Q+1)."""
    return max(N * math.ceil(math.log(N)), 2 * Q + 1)


def reduced_fractions(Q: int) -> List[RationalPhase]:
    """Frações j/ℓ com 1 < ℓ <= Q, j <= ℓ/2, mdc(j,ℓ) = 1, em ordem (ℓ, j)."""
    return [RationalPhase(j, l)
            for l in range(2, Q + 1)
            for j in range(1, l // 2 + 1)
            if math.gcd(j, l) == 1]


def _fraction_arrays(Q: int) -> Tuple[np.ndarray, np.ndarray]:
    fracoes = reduced_fractions(Q)
    js = np.array([f.numerator for f in fracoes], dtype=np.int64)
    ls = np.array([f.denominator for f in fracoes], dtype=np.int64)
    return js, ls


def _pair_from(a: RationalPhase, b: RationalPhase, h: Optional[int] = None) -> FractionPair:
    fa, fb = a.as_fraction(), b.as_fraction()
    zero = None if h is None else big_f(fa, h) * big_f(fb, h) == 0
    return FractionPair(a, b, fa - fb, norm(fa + fb), zero)


def ramanujan_coefficient(g: FunctionTable, Q: int, l: int) -> float:
    """R_ℓ(g,Q) = soma de g(ℓd)/(ℓd) para d <= Q/ℓ (vazia, logo 0, se ℓ > Q)."""
    if l <= 1:
        raise ValueError(f"Coeficiente de Ramanujan exige ℓ > 1 (ℓ={l})")
    total = 0.0
    for d in range(1, Q // l + 1):
        total += g.at(l * d) / (l * d)
    return total


def ramanujan_coefficients(g: FunctionTable, Q: int) -> np.ndarray:
    """Vetor R[ℓ] para 0 <= ℓ <= Q (R[0] = R[1] = 0, não usados)."""
    R = np.zeros(Q + 1, dtype=np.float64)
    for l in range(2, Q + 1):
        R[l] = ramanujan_coefficient(g, Q, l)
    return R


def _support(g: FunctionTable, Q: int) -> FunctionTable:
    return g.truncated(Q) if g.length > Q else g


def aggregate_chi_series(g: FunctionTable, params: WindowParams) -> SymmetrySeries:
    """A(x) = soma de g(q)·χ_q(x) sobre q <= Q, para N < x <= 2N; vale A = -S'_f."""
    x = np.arange(params.N + 1, 2 * params.N + 1, dtype=np.int64)
    limite = min(params.Q, g.length)
    if g.exact:
        dobro = np.zeros(len(x), dtype=np.int64)
        for q in range(1, limite + 1):
            valor = g.at(q)
            if valor:
                dobro += valor * chi_direct_doubled(q, x, params.h)
        dobro.flags.writeable = False
        return SymmetrySeries(params, dobro / 2, dobro)
    valores = np.zeros(len(x), dtype=np.float64)
    for q in range(1, limite + 1):
        valor = g.at(q)
        if valor:
            valores += valor * (chi_direct_doubled(q, x, params.h) / 2)
    return SymmetrySeries(params, valores)


def diagonal_term(g: FunctionTable, params: WindowParams) -> float:
    """
    D_f^± = soma sobre 1 < ℓ <= Q de R_ℓ² · Σ*_j F(j/ℓ)² · Σ_x sin²(2πxj/ℓ),
    com Σ_x sin² = N/2 - C(2j/ℓ)/2 em forma fechada.
    """
    if params.Q < 2:
        return 0.0
    js, ls = _fraction_arrays(params.Q)
    R = ramanujan_coefficients(g, params.Q)
    F = big_f_array(js, ls, params.h)
    senos = params.N / 2 - cosine_exp_sum_array(2 * js, ls, params.N) / 2
    termos = (R[ls] * F) ** 2 * senos
    return block_sum(termos)


def enumerate_offdiagonal_pairs(Q: int, budget: Optional[int] = None) -> List[FractionPair]:
    """Todos os pares ordenados (j/ℓ, r/t) com δ = j/ℓ - r/t > 0, δ e σ exatos."""
    fracoes = reduced_fractions(Q)
    total = len(fracoes) * (len(fracoes) - 1) // 2
    limite = default_pair_budget() if budget is None else budget
    if total > limite:
        raise PairBudgetExceeded(f"Q={Q} gera {total} pares, acima do orçamento {limite}")
    valores = [f.as_fraction() for f in fracoes]
    pares = []
    for a, va in zip(fracoes, valores):
        for b, vb in zip(fracoes, valores):
            if va > vb:
                pares.append(_pair_from(a, b))
    return pares


def offdiagonal_term(g: FunctionTable, params: WindowParams,
                     budget: Optional[int] = None) -> Tuple[float, float]:
    """
    Parte fora da diagonal, separada em δ e σ:
    soma de R_ℓ R_t F(j/ℓ) F(r/t) C(δ) e a mesma soma com C(σ).
    """
    if params.Q < 3:
        return 0.0, 0.0
    js, ls = _fraction_arrays(params.Q)
    total = len(js) * (len(js) - 1) // 2
    limite = default_pair_budget() if budget is None else budget
    if total > limite:
        raise PairBudgetExceeded(f"Q={params.Q} gera {total} pares, acima do orçamento {limite}")

    R = ramanujan_coefficients(g, params.Q)
    pesos = R[ls] * big_f_array(js, ls, params.h)
    # i indexa a primeira fração e k a segunda; δ > 0 <=> j_i·ℓ_k > j_k·ℓ_i
    cruzado_ik = np.outer(js, ls)
    cruzado_ki = cruzado_ik.T
    mascara = cruzado_ik > cruzado_ki
    denominador = np.outer(ls, ls)[mascara]
    delta_num = (cruzado_ik - cruzado_ki)[mascara]
    soma_num = (cruzado_ik + cruzado_ki)[mascara]
    sigma_num = np.minimum(soma_num, denominador - soma_num)
    produto = np.outer(pesos, pesos)[mascara]

    parte_delta = block_sum(produto * cosine_exp_sum_array(delta_num, denominador, params.N))
    parte_sigma = block_sum(produto * cosine_exp_sum_array(sigma_num, denominador, params.N))
    logger.debug(f"Fora da diagonal: {len(produto)} pares, δ={parte_delta}, σ={parte_sigma}")
    return parte_delta, parte_sigma


def classify_near_integer_pairs(Q: int, A: int, h: int = 1) -> List[FractionPair]:
    """
    Pares com δ > 0 e σ <= 1/A, na ordem de enumerate_offdiagonal_pairs,
    marcando se F(j/ℓ)·F(r/t) = 0.

    Para j/ℓ fixo, σ <= 1/A só ocorre com r/t <= 1/A - j/ℓ ou
    r/t >= 1 - 1/A - j/ℓ; as faixas são achadas por bisseção e
    confirmadas em aritmética racional.
    """
    if A < 1:
        raise ValueError(f"Limiar exige A >= 1 (A={A})")
    fracoes = reduced_fractions(Q)
    valores = [f.as_fraction() for f in fracoes]
    ordem = sorted(range(len(fracoes)), key=lambda i: valores[i])
    chaves = [float(valores[i]) for i in ordem]
    folga = 1e-9
    inverso = Fraction(1, A)

    encontrados = []
    for i, va in enumerate(valores):
        abaixo = bisect.bisect_left(chaves, float(va) + folga)
        faixas = [
            (0, min(abaixo, bisect.bisect_right(chaves, float(inverso - va) + folga))),
            (bisect.bisect_left(chaves, float(1 - inverso - va) - folga), abaixo),
        ]
        candidatos = set()
        for inicio, fim in faixas:
            candidatos.update(ordem[inicio:fim])
        for k in candidatos:
            vb = valores[k]
            if vb < va and norm(va + vb) <= inverso:
                encontrados.append((i, k))

    encontrados.sort()
    pares = [_pair_from(fracoes[i], fracoes[k], h) for i, k in encontrados]
    logger.debug(f"Q={Q}, A={A}: {len(pares)} pares quase inteiros")
    return pares


def lemma_scan(qmax: int, A: Optional[int] = None, N: Optional[int] = None,
               h: int = 1) -> List[dict]:
    """Para cada 2 <= Q <= qmax, conta pares quase inteiros e produtos F·F não nulos."""
    linhas = []
    for Q in range(2, qmax + 1):
        if A is not None:
            limiar = A
        elif N is not None:
            limiar = default_threshold(N, Q)
        else:
            limiar = 2 * Q + 1
        pares = classify_near_integer_pairs(Q, limiar, h)
        linhas.append({
            'Q': Q,
            'A': limiar,
            'near_pairs': len(pares),
            'nonzero_products': sum(1 for p in pares if not p.f_product_zero),
        })
    return linhas


def reconcile(g: FunctionTable, params: WindowParams, max_q: int = RECONCILE_MAX_Q,
              budget: Optional[int] = None, A: Optional[int] = None) -> DecompositionReport:
    """
    Calcula I_f por três caminhos (janelas, χ agregado, decomposição espectral)
    e devolve o relatório com o resíduo de fechamento.
    """
    if params.Q > max_q:
        raise ValueError(f"Reconciliação limitada a Q <= {max_q} (Q={params.Q})")
    g = _support(g, params.Q)
    f = convolve_with_ones(g, params.table_length)

    i_direct = symmetry_integral(f, params)
    i_via_chi = series_square_sum(aggregate_chi_series(g, params))
    diagonal = diagonal_term(g, params)
    parte_delta, parte_sigma = offdiagonal_term(g, params, budget)
    residual = i_direct - (diagonal + parte_delta - parte_sigma)

    n_fracoes = len(reduced_fractions(params.Q))
    limiar = default_threshold(params.N, params.Q) if A is None else A
    proximos = classify_near_integer_pairs(params.Q, limiar, params.h)

    relatorio = DecompositionReport(
        i_direct=i_direct,
        i_via_chi=i_via_chi,
        diagonal=diagonal,
        offdiag_delta=parte_delta,
        offdiag_sigma=parte_sigma,
        residual=residual,
        pair_count=n_fracoes * (n_fracoes - 1) // 2,
        near_pair_count=len(proximos),
    )
    logger.info(f"Reconciliação {g.name} (N={params.N}, h={params.h}, Q={params.Q}): "
                f"I={i_direct}, resíduo={residual:.3e}")
    return relatorio


def pairs_to_frame(pares: List[FractionPair]) -> pd.DataFrame:
    linhas = [[p.first.numerator, p.first.denominator, p.second.numerator, p.second.denominator,
               p.delta.numerator, p.delta.denominator, p.sigma.numerator, p.sigma.denominator]
              for p in pares]
    return pd.DataFrame(linhas, columns=PAIR_CSV_COLUMNS, dtype=np.int64)


def write_pairs_csv(pares: List[FractionPair], destino) -> None:
    pairs_to_frame(pares).to_csv(destino, index=False, lineterminator='\n')


def read_pairs_csv(path) -> List[FractionPair]:
    """Lê a lista de pares e confere δ e σ contra o recálculo exato."""
    df = pd.read_csv(path)
    if list(df.columns) != PAIR_CSV_COLUMNS:
        raise ValueError(f"Cabeçalho esperado {','.join(PAIR_CSV_COLUMNS)}")
    pares = []
    for numero, linha in enumerate(df.itertuples(index=False), start=2):
        par = _pair_from(RationalPhase(int(linha.j), int(linha.l)),
                         RationalPhase(int(linha.r), int(linha.t)))
        if (par.delta != Fraction(int(linha.delta_num), int(linha.delta_den))
                or par.sigma != Fraction(int(linha.sigma_num), int(linha.sigma_den))):
            raise ValueError(f"Linha {numero}: δ ou σ não confere com as frações")
        pares.append(par)
    return pares
