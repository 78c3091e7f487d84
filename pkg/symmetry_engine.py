#!/usr/bin/env python3
"""
symmetry_engine.py
Soma de simetria com extremos pela metade, integral de simetria I_f(N,h),
sua variante contínua e o oráculo ingênuo.
"""
import math
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
import pandas as pd

from arith_tables import FunctionTable

logger = logging.getLogger('symlab.symmetry_engine')

# Blocos de x somados em sequência; parciais combinadas na ordem dos índices
BLOCK_SIZE = 2 ** 14
BRUTEFORCE_MAX_N = 10 ** 5
ROUTE_REL_TOL = 1e-9


@dataclass(frozen=True)
class WindowParams:
    """Terno (N, h, Q): x percorre N < x <= 2N, janela [x-h, x+h]."""

    N: int
    h: int
    Q: int

    def __post_init__(self):
        if self.h < 1:
            raise ValueError(f"Meia-largura precisa de h >= 1 (h={self.h})")
        if self.h >= self.N:
            raise ValueError(f"Janela precisa de h < N (N={self.N}, h={self.h})")
        if not 1 <= self.Q <= self.N:
            raise ValueError(f"Suporte precisa de 1 <= Q <= N (N={self.N}, Q={self.Q})")

    @property
    def level(self) -> float:
        """Nível λ = log Q / log N."""
        return math.log(self.Q) / math.log(self.N)

    @property
    def theorem_regime(self) -> bool:
        return self.h * self.h <= self.N

    @property
    def table_length(self) -> int:
        """f só é vista até 2N + h."""
        return 2 * self.N + self.h


@dataclass(frozen=True)
class SymmetrySeries:
    """S'_f(x,h) para x = N+1, ..., 2N; `doubled` guarda 2·S' em tabelas exatas."""

    params: WindowParams
    values: np.ndarray
    doubled: Optional[np.ndarray] = None

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.params.N + 1, 2 * self.params.N + 1)

    @property
    def exact(self) -> bool:
        return self.doubled is not None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'x': self.x, 'value': self.values})


def block_sum(values: np.ndarray) -> float:
    """Soma em ordem fixa: blocos de BLOCK_SIZE, parciais somadas em sequência."""
    total = 0.0
    for inicio in range(0, len(values), BLOCK_SIZE):
        total += float(np.sum(values[inicio:inicio + BLOCK_SIZE]))
    return total


def _check_window(f: FunctionTable, x_min: int, x_max: int, h: int) -> None:
    if x_min - h < 1 or x_max + h > f.length:
        raise ValueError(
            f"Janela fora da tabela '{f.name}': precisa de [{x_min - h}, {x_max + h}] "
            f"dentro de [1, {f.length}]"
        )


def _series_from_prefix(f: FunctionTable, x: np.ndarray, h: int):
    """2·S' (tabelas exatas) ou S' (tabelas reais) a partir das somas parciais."""
    P = f.prefix
    v = f.values
    acima = P[x + h] - P[x]
    abaixo = P[x - 1] - P[x - h - 1]
    extremos = v[x + h - 1] - v[x - h - 1]
    if f.exact:
        return 2 * (acima - abaixo) - extremos
    return (acima - abaixo) - extremos / 2


def symmetry_sum(f: FunctionTable, x: int, h: int) -> float:
    """
    Soma de simetria S'_f(x,h): soma de sgn(n-x)·f(n) em |n-x| <= h
    menos (f(x+h) - f(x-h))/2.
    """
    if h < 1:
        raise ValueError(f"Meia-largura precisa de h >= 1 (h={h})")
    _check_window(f, x, x, h)
    valor = _series_from_prefix(f, np.array([x]), h)[0]
    return float(valor) / 2 if f.exact else float(valor)


def symmetry_series(f: FunctionTable, params: WindowParams) -> SymmetrySeries:
    """Toda a série S'_f(x,h), N < x <= 2N, com uma única passada nas somas parciais."""
    if f.length < params.table_length:
        raise ValueError(
            f"Tabela '{f.name}' curta demais: {f.length} < 2N+h = {params.table_length}"
        )
    x = np.arange(params.N + 1, 2 * params.N + 1)
    _check_window(f, params.N + 1, 2 * params.N, params.h)
    bruto = _series_from_prefix(f, x, params.h)
    if f.exact:
        bruto.flags.writeable = False
        return SymmetrySeries(params, bruto / 2, bruto)
    return SymmetrySeries(params, bruto)


def series_square_sum(series: SymmetrySeries) -> float:
    """Soma de |S'|² com a regra de blocos; exata em séries de meio-inteiros."""
    if series.exact:
        total = sum(int(v) * int(v) for v in series.doubled)
        return total / 4
    return block_sum(series.values * series.values)


def symmetry_integral(f: FunctionTable, params: WindowParams) -> float:
    """I_f(N,h) = soma de |S'_f(x,h)|² sobre N < x <= 2N."""
    integral = series_square_sum(symmetry_series(f, params))
    logger.debug(f"I_{f.name}(N={params.N}, h={params.h}) = {integral}")
    return integral


def symmetry_integral_continuous(f: FunctionTable, params: WindowParams) -> float:
    """
    Valor exato da integral em dx de N a 2N da soma não tracejada ao quadrado.

    Em cada célula aberta (m, m+1) a soma interna é constante:
    f(m+1) + ... + f(m+h) menos f(m+1-h) + ... + f(m).
    """
    if f.length < params.table_length:
        raise ValueError(
            f"Tabela '{f.name}' curta demais: {f.length} < 2N+h = {params.table_length}"
        )
    N, h = params.N, params.h
    m = np.arange(N, 2 * N)
    P = f.prefix
    celulas = (P[m + h] - P[m]) - (P[m] - P[m - h])
    if f.exact:
        return float(sum(int(c) * int(c) for c in celulas))
    return block_sum(celulas * celulas)


def symmetry_integral_bruteforce(f: FunctionTable, params: WindowParams) -> float:
    """Oráculo: laço duplo direto sobre x e n (somente para testes)."""
    N, h = params.N, params.h
    if N > BRUTEFORCE_MAX_N:
        raise ValueError(f"Oráculo ingênuo limitado a N <= {BRUTEFORCE_MAX_N} (N={N})")
    _check_window(f, N + 1, 2 * N, h)
    if f.exact:
        total = 0
        for x in range(N + 1, 2 * N + 1):
            dobro = 0
            for n in range(x - h, x + h + 1):
                if n != x:
                    dobro += 2 * (1 if n > x else -1) * f.at(n)
            dobro -= f.at(x + h) - f.at(x - h)
            total += dobro * dobro
        return total / 4
    total = 0.0
    for x in range(N + 1, 2 * N + 1):
        soma = 0.0
        for n in range(x - h, x + h + 1):
            if n != x:
                soma += (1.0 if n > x else -1.0) * f.at(n)
        soma -= (f.at(x + h) - f.at(x - h)) / 2
        total += soma * soma
    return total


def symmetry_report(f: FunctionTable, params: WindowParams) -> dict:
    """Resumo da integral de simetria com as grandezas de referência."""
    integral = symmetry_integral(f, params)
    return {
        'function': f.name,
        'N': params.N,
        'h': params.h,
        'Q': params.Q,
        'integral': integral,
        'continuous': symmetry_integral_continuous(f, params),
        'ratio': integral / (params.N * params.h),
        'level': params.level,
        'theorem_regime': params.theorem_regime,
        'max_abs': f.max_abs,
    }


def write_series_csv(series: SymmetrySeries, destino) -> None:
    """Exporta a série como CSV 'x,value'."""
    series.to_frame().to_csv(destino, index=False, lineterminator='\n')


def read_series_csv(path, params: WindowParams) -> SymmetrySeries:
    df = pd.read_csv(path)
    if list(df.columns) != ['x', 'value']:
        raise ValueError(f"Cabeçalho esperado 'x,value', encontrado {list(df.columns)}")
    esperado = np.arange(params.N + 1, 2 * params.N + 1)
    if not np.array_equal(df['x'].to_numpy(), esperado):
        raise ValueError(f"Coluna 'x' precisa ser {params.N + 1}..{2 * params.N}")
    values = df['value'].to_numpy(dtype=np.float64)
    dobro = 2 * values
    if np.all(dobro == np.round(dobro)):
        return SymmetrySeries(params, values, dobro.astype(np.int64))
    return SymmetrySeries(params, values)
