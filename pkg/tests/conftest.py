"""
conftest.py
Constantes congeladas e tabelas compartilhadas pelos testes.
"""
import numpy as np
import pytest
from hypothesis import settings

from arith_tables import FunctionTable, GeneratorSpec, build_generator, convolve_with_ones, sieve_standard

settings.register_profile('symlab', max_examples=60, deadline=None)
settings.load_profile('symlab')

# soma de Parseval <= PARSEVAL_CONSTANT·min(1, h/q) para q <= 2000, h <= 200
# (máximo medido 7.97 em q=473, h=200)
PARSEVAL_CONSTANT = 8.0
# |contínua - discreta| <= CONTINUOUS_CONSTANT·(N + h²) na grade ROUTE_GRID;
# cota 2·Σ_{mdc(q1,q2)>1} 1/mmc(q1,q2) do termo principal para g = 1, Q = 40
CONTINUOUS_CONSTANT = 32.0
# I_d/(N·h) <= RATIO_LOG_COEFFICIENT·(log N)^RATIO_LOG_POWER na grade principal
# (coeficiente medido entre 0.039 e 0.047)
RATIO_LOG_POWER = 3
RATIO_LOG_COEFFICIENT = 0.05
SLOPE_WINDOW_D = (0.85, 1.15)
SLOPE_WINDOW_OTHERS = (0.8, 1.2)
MIN_R_SQUARED = 0.99
# inclinações medidas de log I contra log(N·h), sem normalizar, na grade principal
FLAGSHIP_RAW_SLOPES = {'d': 1.199, 'd_3': 1.396, 'Lambda': 1.091}
RAW_SLOPE_TOL = 0.01
# potência k de (log N)^k descontada antes do ajuste normalizado
FLAGSHIP_LOG_POWERS = {'d': 3, 'd_3': 5, 'Lambda': 1}

# (gerador, Q, N, h): g em {1, μ, δ_2, aleatório em [-1, 1]}, Q <= 40, N <= 2000, h <= 40
ROUTE_GRID = [
    ('ones', 5, 300, 3), ('ones', 10, 800, 7), ('ones', 20, 1500, 15),
    ('ones', 40, 2000, 40), ('ones', 40, 1200, 5),
    ('moebius', 8, 400, 4), ('moebius', 15, 1000, 12), ('moebius', 30, 1800, 25),
    ('moebius', 40, 2000, 9), ('moebius', 25, 600, 24),
    ('delta_at:2', 2, 100, 3), ('delta_at:2', 10, 500, 6), ('delta_at:2', 20, 1000, 20),
    ('delta_at:2', 40, 2000, 35), ('delta_at:2', 40, 1500, 2),
    ('random', 6, 300, 5), ('random', 12, 700, 11), ('random', 20, 1200, 18),
    ('random', 33, 1600, 24), ('random', 40, 2000, 40),
]


def route_generator(kind: str, Q: int, seed: int = 0) -> FunctionTable:
    """Gerador da grade; 'random' sorteia valores reais em [-1, 1] com semente fixa."""
    if kind == 'random':
        valores = np.random.default_rng(seed + Q).uniform(-1.0, 1.0, Q)
        return FunctionTable(f"g[aleatorio:{seed + Q}]", valores, False)
    return build_generator(GeneratorSpec.parse(kind, Q), Q)


@pytest.fixture
def ones_table():
    """f ≡ 1 em [1, 400]."""
    return FunctionTable('one', np.ones(400, dtype=np.int64), True)


@pytest.fixture
def identity_table():
    """f(n) = n em [1, 400]."""
    return FunctionTable('id', np.arange(1, 401, dtype=np.int64), True)


@pytest.fixture
def divisor_table():
    return sieve_standard('d', 2000)


@pytest.fixture
def ones_generator():
    return build_generator(GeneratorSpec('ones', 10), 10)


@pytest.fixture
def unit_table():
    """μ * 1 = unidade, suportada em n = 1."""
    g = build_generator(GeneratorSpec('moebius', 210), 210)
    return convolve_with_ones(g, 210)
