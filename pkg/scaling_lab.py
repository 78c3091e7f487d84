#!/usr/bin/env python3
"""
scaling_lab.py
Grades de experimentos (função, N, h, Q): integrais de simetria, razões
I_f/(N·h) e ajuste de lei de potência em escala log-log.
"""
import os
import re
import math
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from arith_tables import FunctionTable, GeneratorSpec, build_generator, convolve_with_ones, sieve_standard
from symmetry_engine import WindowParams, symmetry_integral, symmetry_integral_bruteforce, ROUTE_REL_TOL

logger = logging.getLogger('symlab.scaling_lab')

SCAN_COLUMNS = ['function', 'N', 'h', 'Q', 'integral', 'ratio', 'max_g', 'theorem_regime']
FLAGSHIP_FUNCTIONS = ('d', 'd_3', 'Lambda')
FLAGSHIP_EXPONENTS = tuple(range(12, 18))
SPOT_CHECK_MAX_N = 10 ** 4

_PADRAO_DK = re.compile(r'^d_(\d+)$')


@dataclass(frozen=True)
class ScanCell:
    function: str
    N: int
    h: int
    Q: int


@dataclass(frozen=True)
class ScanRow:
    function: str
    N: int
    h: int
    Q: int
    integral: float
    ratio: float
    max_g: float
    theorem_regime: bool
    error: Optional[str] = None


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r_squared: float
    n_points: int
    n_excluded: int = 0

    def to_dict(self) -> dict:
        return {
            'slope': self.slope,
            'intercept': self.intercept,
            'r_squared': self.r_squared,
            'n_points': self.n_points,
        }


def regime_check(N: int, h: int) -> bool:
    """Regime do teorema: h² <= N (versão finita de h = o(√N))."""
    return h * h <= N


def flagship_h(N: int) -> int:
    """⌊N^0.3⌋ calculado em inteiros: maior h com h^10 <= N^3."""
    h = int(N ** 0.3)
    while (h + 1) ** 10 <= N ** 3:
        h += 1
    while h > 0 and h ** 10 > N ** 3:
        h -= 1
    return h


def default_grid(functions: Sequence[str] = FLAGSHIP_FUNCTIONS,
                 exponents: Iterable[int] = FLAGSHIP_EXPONENTS) -> List[ScanCell]:
    """Grade principal: N = 2^k, h = ⌊N^0.3⌋, Q = N."""
    celulas = []
    for nome in functions:
        for k in exponents:
            N = 2 ** k
            celulas.append(ScanCell(nome, N, flagship_h(N), N))
    return celulas


def standard_function_name(function: str) -> Optional[Tuple[str, int]]:
    """('d_k', k) etc. para funções padrão; None se for nome de gerador."""
    if function in ('d', 'Lambda', 'moebius', 'moebius_sq'):
        return function, 2
    encontrado = _PADRAO_DK.match(function)
    if encontrado:
        return 'd_k', int(encontrado.group(1))
    return None


class _TableCache:
    """Tabelas construídas uma vez no maior M pedido pela grade."""

    def __init__(self):
        self.tabelas: Dict[Tuple[str, int], Tuple[FunctionTable, Optional[FunctionTable]]] = {}

    @staticmethod
    def chave(cell: ScanCell) -> Tuple[str, int]:
        # funções padrão não dependem de Q
        return (cell.function, 0) if standard_function_name(cell.function) else (cell.function, cell.Q)

    def preparar(self, cells: Sequence[ScanCell]) -> Dict[Tuple[str, int], str]:
        """Constrói as tabelas; devolve os erros de construção por chave."""
        maiores: Dict[Tuple[str, int], int] = {}
        for cell in cells:
            chave = self.chave(cell)
            maiores[chave] = max(maiores.get(chave, 0), 2 * cell.N + cell.h)
        erros = {}
        for chave, M in maiores.items():
            try:
                self.tabelas[chave] = self._construir(chave, M)
            except (ValueError, OSError) as e:
                erros[chave] = str(e)
                logger.warning(f"Falha ao construir tabela '{chave[0]}': {e}")
        return erros

    @staticmethod
    def _construir(chave: Tuple[str, int], M: int):
        nome, Q = chave
        padrao = standard_function_name(nome)
        if padrao:
            base, k = padrao
            return sieve_standard(base, M, k=k), None
        g = build_generator(GeneratorSpec.parse(nome, Q), Q)
        return convolve_with_ones(g, M), g

    def obter(self, cell: ScanCell):
        return self.tabelas[self.chave(cell)]


def _max_workers() -> int:
    padrao = min(4, os.cpu_count() or 1)
    valor = os.getenv('SYMLAB_THREADS')
    if not valor:
        return padrao
    try:
        return max(1, int(valor))
    except ValueError:
        logger.warning(f"SYMLAB_THREADS inválido ('{valor}'), usando {padrao}")
        return padrao


def _failed_row(cell: ScanCell, mensagem: str) -> ScanRow:
    return ScanRow(cell.function, cell.N, cell.h, cell.Q, math.nan, math.nan, math.nan,
                   regime_check(cell.N, cell.h), mensagem)


def _run_cell(cell: ScanCell, cache: _TableCache, erros_tabela: dict) -> ScanRow:
    try:
        params = WindowParams(cell.N, cell.h, cell.Q)
    except ValueError as e:
        logger.warning(f"Célula {cell} rejeitada: {e}")
        return _failed_row(cell, str(e))
    chave = cache.chave(cell)
    if chave in erros_tabela:
        return _failed_row(cell, erros_tabela[chave])

    f, g = cache.obter(cell)
    integral = symmetry_integral(f, params)
    if g is not None:
        max_g = g.max_abs
    else:
        max_g = float(np.max(np.abs(f.values[:params.table_length])))
    return ScanRow(cell.function, cell.N, cell.h, cell.Q, integral,
                   integral / (cell.N * cell.h), max_g, params.theorem_regime)


def run_scan(grid: Sequence[ScanCell], workers: Optional[int] = None) -> List[ScanRow]:
    """
    Executa a grade; uma linha por célula, na ordem de entrada.
    Células inválidas viram linhas com `error` e a varredura continua.
    """
    cache = _TableCache()
    erros_tabela = cache.preparar(grid)
    n_workers = workers or _max_workers()
    logger.info(f"Varredura de {len(grid)} células com {n_workers} threads")
    with ThreadPoolExecutor(max_workers=n_workers) as executor:
        linhas = list(executor.map(lambda cell: _run_cell(cell, cache, erros_tabela), grid))
    falhas = sum(1 for linha in linhas if linha.error)
    if falhas:
        logger.warning(f"{falhas} células com erro na varredura")
    return linhas


def fit_power_law(rows: Sequence[ScanRow], log_power: int = 0) -> FitResult:
    """
    Mínimos quadrados de log(integral) contra log(N·h); integrais nulas ficam de fora.

    Com log_power = k > 0 o ajuste usa log(integral / (log N)^k), isto é,
    a inclinação descontado o fator polilogarítmico.
    """
    if log_power < 0:
        raise ValueError(f"Potência do logaritmo precisa ser >= 0 ({log_power})")
    validas = [r for r in rows if r.error is None]
    positivas = [r for r in validas if r.integral > 0]
    excluidas = len(validas) - len(positivas)
    if len(positivas) < 3:
        raise ValueError(f"Ajuste exige pelo menos 3 linhas com integral > 0 ({len(positivas)} encontradas)")

    x = np.log(np.array([r.N * r.h for r in positivas], dtype=np.float64))
    y = np.log(np.array([r.integral for r in positivas], dtype=np.float64))
    if log_power:
        y -= log_power * np.log(np.log(np.array([r.N for r in positivas], dtype=np.float64)))
    slope, intercept = np.polyfit(x, y, 1)
    residuos = y - (slope * x + intercept)
    total = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if total == 0 else 1.0 - float(np.sum(residuos ** 2)) / total
    r_squared = min(1.0, max(0.0, r_squared))
    if excluidas:
        logger.info(f"Ajuste: {excluidas} linhas com integral nula excluídas")
    return FitResult(float(slope), float(intercept), r_squared, len(positivas), excluidas)


def spot_check(rows: Sequence[ScanRow], sample: int = 10, seed: int = 0) -> List[ScanRow]:
    """Recalcula até `sample` linhas (N <= 10^4) pelo oráculo ingênuo; devolve as divergentes."""
    elegiveis = [r for r in rows if r.error is None and r.N <= SPOT_CHECK_MAX_N]
    if not elegiveis:
        return []
    rng = np.random.default_rng(seed)
    escolhidas = sorted(rng.choice(len(elegiveis), size=min(sample, len(elegiveis)), replace=False))
    cells = [ScanCell(elegiveis[i].function, elegiveis[i].N, elegiveis[i].h, elegiveis[i].Q)
             for i in escolhidas]
    cache = _TableCache()
    cache.preparar(cells)

    divergentes = []
    for i, cell in zip(escolhidas, cells):
        linha = elegiveis[i]
        f, _ = cache.obter(cell)
        oraculo = symmetry_integral_bruteforce(f, WindowParams(cell.N, cell.h, cell.Q))
        if f.exact:
            confere = oraculo == linha.integral
        else:
            confere = abs(oraculo - linha.integral) <= ROUTE_REL_TOL * max(1.0, abs(oraculo))
        if not confere:
            logger.error(f"Conferência falhou em {cell}: {linha.integral} != {oraculo}")
            divergentes.append(linha)
    logger.info(f"Conferência pelo oráculo: {len(cells)} células, {len(divergentes)} divergentes")
    return divergentes


def scan_to_frame(rows: Sequence[ScanRow]) -> pd.DataFrame:
    linhas = [[r.function, r.N, r.h, r.Q, r.integral, r.ratio, r.max_g, r.theorem_regime]
              for r in rows if r.error is None]
    return pd.DataFrame(linhas, columns=SCAN_COLUMNS)


def write_scan_csv(rows: Sequence[ScanRow], destino) -> None:
    """CSV 'function,N,h,Q,integral,ratio,max_g,theorem_regime' (linhas com erro ficam de fora)."""
    scan_to_frame(rows).to_csv(destino, index=False, lineterminator='\n')


def read_scan_csv(path) -> List[ScanRow]:
    df = pd.read_csv(path, dtype={'function': str})
    if list(df.columns) != SCAN_COLUMNS:
        raise ValueError(f"Cabeçalho esperado {','.join(SCAN_COLUMNS)}")
    regime = df['theorem_regime'].astype(str).str.lower().map({'true': True, 'false': False})
    if regime.isna().any():
        raise ValueError("Coluna 'theorem_regime' precisa conter True/False")
    return [ScanRow(str(r.function), int(r.N), int(r.h), int(r.Q), float(r.integral),
                    float(r.ratio), float(r.max_g), bool(reg))
            for r, reg in zip(df.itertuples(index=False), regime)]
