#!/usr/bin/env python3
"""
arith_tables.py
Tabelas de funções aritméticas: geradores g, convolução f = g * 1 e crivos
das funções padrão (d, d_k, Λ, μ, μ²).
"""
import math
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Optional, Union

import numpy as np
import pandas as pd

logger = logging.getLogger('symlab.arith_tables')

# Tolerância relativa do oráculo pontual em tabelas reais
ORACLE_REL_TOL = 1e-12

GENERATOR_KINDS = (
    'delta_one', 'delta_at', 'ones', 'moebius', 'neg_moebius_log',
    'divisor_k_minus_1', 'custom',
)
STANDARD_FUNCTIONS = ('d', 'd_k', 'Lambda', 'moebius', 'moebius_sq')


@dataclass(frozen=True)
class FunctionTable:
    """Valores de uma função aritmética em [1, M]; values[n-1] = f(n)."""

    name: str
    values: np.ndarray
    exact: bool

    def __post_init__(self):
        if self.values.ndim != 1 or len(self.values) < 1:
            raise ValueError(f"Tabela '{self.name}' precisa de pelo menos um valor")
        if self.exact and self.values.dtype.kind not in 'iu':
            raise ValueError(f"Tabela exata '{self.name}' precisa de valores inteiros")
        self.values.flags.writeable = False

    @property
    def start(self) -> int:
        return 1

    @property
    def length(self) -> int:
        return len(self.values)

    def at(self, n: int):
        """Valor f(n), com f(n) = 0 fora de [1, M] (suporte finito)."""
        if 1 <= n <= self.length:
            value = self.values[n - 1]
            return int(value) if self.exact else float(value)
        return 0 if self.exact else 0.0

    @cached_property
    def prefix(self) -> np.ndarray:
        """Somas parciais P[n] = f(1) + ... + f(n), com P[0] = 0."""
        dtype = np.int64 if self.exact else np.float64
        prefix = np.zeros(self.length + 1, dtype=dtype)
        np.cumsum(self.values, out=prefix[1:])
        prefix.flags.writeable = False
        return prefix

    @cached_property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def truncated(self, M: int) -> 'FunctionTable':
        """Restrição a [1, M]; os valores não dependem do M de construção."""
        if M > self.length:
            raise ValueError(f"Tabela '{self.name}' tem {self.length} valores, pedido M={M}")
        return FunctionTable(self.name, self.values[:M].copy(), self.exact)


@dataclass(frozen=True)
class GeneratorSpec:
    """Descrição de um gerador g suportado em [1, Q]."""

    kind: str
    support_bound: int
    param: Optional[Union[int, str]] = None

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise ValueError(f"Tipo de gerador desconhecido: '{self.kind}'")
        if self.kind in ('delta_at', 'divisor_k_minus_1') and not isinstance(self.param, int):
            raise ValueError(f"Gerador '{self.kind}' exige parâmetro inteiro")
        if self.kind == 'custom' and not self.param:
            raise ValueError("Gerador 'custom' exige caminho de arquivo")

    @classmethod
    def parse(cls, text: str, Q: int) -> 'GeneratorSpec':
        """
        Interpreta nomes como 'ones', 'delta_at:2', 'divisor_k_minus_1:3'
        ou 'custom:caminho.txt'.
        """
        kind, _, raw = text.strip().partition(':')
        if kind in ('delta_at', 'divisor_k_minus_1'):
            try:
                return cls(kind, Q, int(raw))
            except ValueError:
                raise ValueError(f"Parâmetro inteiro inválido em '{text}'") from None
        if kind == 'custom':
            return cls(kind, Q, raw)
        if raw:
            raise ValueError(f"Gerador '{kind}' não aceita parâmetro ('{text}')")
        return cls(kind, Q)

    def label(self) -> str:
        return self.kind if self.param is None else f"{self.kind}:{self.param}"


def _prime_mask(M: int) -> np.ndarray:
    """Crivo de Eratóstenes; mask[n] indica n primo, 0 <= n <= M."""
    mask = np.ones(M + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, math.isqrt(M) + 1):
        if mask[p]:
            mask[p * p::p] = False
    return mask


def _moebius_values(M: int) -> np.ndarray:
    mu = np.ones(M + 1, dtype=np.int64)
    mu[0] = 0
    for p in np.flatnonzero(_prime_mask(M)):
        p = int(p)
        mu[p::p] *= -1
        mu[p * p::p * p] = 0
    return mu[1:]


def _von_mangoldt_values(M: int) -> np.ndarray:
    lam = np.zeros(M + 1, dtype=np.float64)
    for p in np.flatnonzero(_prime_mask(M)):
        p = int(p)
        log_p = math.log(p)
        power = p
        while power <= M:
            lam[power] = log_p
            power *= p
    return lam[1:]


def _harmonic_sieve(g_values: np.ndarray, M: int) -> np.ndarray:
    """f(n) = soma de g(q) sobre q | n, q <= len(g); laço q -> múltiplos de q."""
    f = np.zeros(M, dtype=g_values.dtype)
    for q in range(1, min(len(g_values), M) + 1):
        value = g_values[q - 1]
        if value:
            f[q - 1::q] += value
    return f


def read_generator_file(path: str) -> Dict[int, float]:
    """
    Lê um gerador custom: um par "q valor" por linha, separados por espaço.

    Linhas vazias e comentários '#' são ignorados; q ausente vale 0.

    Returns:
        dict: mapa q -> valor
    """
    valores: Dict[int, float] = {}
    try:
        with open(path, 'r', encoding='utf-8') as arquivo:
            linhas = arquivo.readlines()
    except OSError as e:
        raise ValueError(f"Não foi possível ler o gerador '{path}': {e}") from e

    for numero, linha in enumerate(linhas, start=1):
        conteudo = linha.split('#', 1)[0].strip()
        if not conteudo:
            continue
        partes = conteudo.split()
        if len(partes) != 2:
            raise ValueError(f"{path}, linha {numero}: esperado 'q valor', encontrado '{conteudo}'")
        try:
            q = int(partes[0])
            valor = float(partes[1])
        except ValueError:
            raise ValueError(f"{path}, linha {numero}: par inválido '{conteudo}'") from None
        if q < 1:
            raise ValueError(f"{path}, linha {numero}: q deve ser >= 1 (q={q})")
        if not math.isfinite(valor):
            raise ValueError(f"{path}, linha {numero}: valor não finito '{partes[1]}'")
        if q in valores:
            raise ValueError(f"{path}, linha {numero}: q={q} repetido")
        valores[q] = valor
    logger.debug(f"Gerador custom '{path}' lido com {len(valores)} entradas")
    return valores


def build_generator(spec: GeneratorSpec, Q: int) -> FunctionTable:
    """
    Constrói a tabela do gerador g em [1, Q] (g(q) = 0 para q > Q).

    Args:
        spec: descrição do gerador
        Q: limite do suporte

    Returns:
        FunctionTable: g com comprimento Q
    """
    if Q < 1:
        raise ValueError(f"Suporte do gerador precisa de Q >= 1 (Q={Q})")

    kind = spec.kind
    if kind == 'delta_one':
        values = np.zeros(Q, dtype=np.int64)
        values[0] = 1
    elif kind == 'delta_at':
        q0 = spec.param
        if q0 < 1:
            raise ValueError(f"delta_at exige q0 >= 1 (q0={q0})")
        values = np.zeros(Q, dtype=np.int64)
        if q0 <= Q:
            values[q0 - 1] = 1
    elif kind == 'ones':
        values = np.ones(Q, dtype=np.int64)
    elif kind == 'moebius':
        values = _moebius_values(Q)
    elif kind == 'neg_moebius_log':
        # -μ(d)·log d, que convoluído com 1 dá Λ no suporte completo
        n = np.arange(1, Q + 1, dtype=np.float64)
        values = -_moebius_values(Q).astype(np.float64) * np.log(n)
        values[values == 0] = 0.0
    elif kind == 'divisor_k_minus_1':
        # g = d_{k-1}, logo g * 1 = d_k no suporte completo (d_0 é a unidade)
        k = spec.param
        if k < 1:
            raise ValueError(f"divisor_k_minus_1 exige k >= 1 (k={k})")
        if k == 1:
            values = np.zeros(Q, dtype=np.int64)
            values[0] = 1
        else:
            values = sieve_standard('d_k', Q, k=k - 1).values.copy()
    else:
        pares = read_generator_file(spec.param)
        raw = np.zeros(Q, dtype=np.float64)
        for q, valor in pares.items():
            if q <= Q:
                raw[q - 1] = valor
        ignorados = sum(1 for q in pares if q > Q)
        if ignorados:
            logger.warning(f"{ignorados} entradas do gerador custom acima de Q={Q} foram descartadas")
        inteiro = bool(np.all(raw == np.round(raw))) and bool(np.all(np.abs(raw) < 2**53))
        values = raw.astype(np.int64) if inteiro else raw

    exact = values.dtype.kind in 'iu'
    return FunctionTable(f"g[{spec.label()}]", values, exact)


def convolve_with_ones(g: FunctionTable, M: int) -> FunctionTable:
    """Devolve f = g * 1 em [1, M] pelo crivo harmônico (custo ~ soma M/q)."""
    if M < 1:
        raise ValueError(f"Comprimento da tabela precisa de M >= 1 (M={M})")
    f = _harmonic_sieve(g.values, M)
    return FunctionTable(f"{g.name}*1", f, g.exact)


def sieve_standard(name: str, M: int, k: int = 2) -> FunctionTable:
    """
    Tabela de uma função padrão em [1, M].

    Args:
        name: 'd', 'd_k', 'Lambda', 'moebius' ou 'moebius_sq'
        M: comprimento da tabela
        k: ordem de d_k (ignorado nos demais)

    Returns:
        FunctionTable: valores exatos, exceto Λ (float64)
    """
    if M < 1:
        raise ValueError(f"Comprimento da tabela precisa de M >= 1 (M={M})")
    if name == 'd':
        name, k = 'd_k', 2
    if name == 'd_k':
        if k < 1:
            raise ValueError(f"d_k exige k >= 1 (k={k})")
        values = np.ones(M, dtype=np.int64)
        for _ in range(k - 1):
            values = _harmonic_sieve(values, M)
        label = 'd' if k == 2 else f"d_{k}"
        return FunctionTable(label, values, True)
    if name == 'Lambda':
        return FunctionTable('Lambda', _von_mangoldt_values(M), False)
    if name == 'moebius':
        return FunctionTable('moebius', _moebius_values(M), True)
    if name == 'moebius_sq':
        return FunctionTable('moebius_sq', _moebius_values(M) ** 2, True)
    raise ValueError(f"Função padrão desconhecida: '{name}'")


def divisor_sum_oracle(n: int, g: FunctionTable):
    """Soma de g(q) sobre os divisores q de n, achados por divisão tentativa."""
    if n < 1:
        raise ValueError(f"Oráculo exige n >= 1 (n={n})")
    divisores = []
    for q in range(1, math.isqrt(n) + 1):
        if n % q == 0:
            divisores.append(q)
            if q * q != n:
                divisores.append(n // q)
    total = 0 if g.exact else 0.0
    for q in sorted(divisores):
        total += g.at(q)
    return total


def essential_bound_report(table: FunctionTable, k: int) -> dict:
    """Máximo de |f| contra a curva de referência (log M)^k."""
    M = table.length
    log_power = math.log(M) ** k if M > 1 else 0.0
    return {
        'name': table.name,
        'M': M,
        'max_abs': table.max_abs,
        'log_power': log_power,
        'ratio': table.max_abs / log_power if log_power else math.inf,
    }


def table_to_frame(table: FunctionTable) -> pd.DataFrame:
    return pd.DataFrame({'n': np.arange(1, table.length + 1), 'value': table.values})


def write_table_csv(table: FunctionTable, destino) -> None:
    """Exporta a tabela como CSV com cabeçalho 'n,value'."""
    table_to_frame(table).to_csv(destino, index=False, lineterminator='\n')


def read_table_csv(path, name: str = 'csv') -> FunctionTable:
    """Lê um CSV 'n,value' (n = 1..M consecutivos) de volta para uma tabela."""
    df = pd.read_csv(path)
    if list(df.columns) != ['n', 'value']:
        raise ValueError(f"Cabeçalho esperado 'n,value', encontrado {list(df.columns)}")
    if not np.array_equal(df['n'].to_numpy(), np.arange(1, len(df) + 1)):
        raise ValueError("Coluna 'n' precisa ser 1..M consecutivos")
    values = df['value'].to_numpy()
    if values.dtype.kind == 'f' and np.all(values == np.round(values)) and np.all(np.abs(values) < 2**53):
        values = values.astype(np.int64)
    return FunctionTable(name, values, values.dtype.kind in 'iu')
