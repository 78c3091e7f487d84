#!/usr/bin/env python3
"""
cli_io.py
Linha de comando do laboratório da integral de simetria: valida a
configuração, executa o subcomando e grava CSV/JSON.

Uso:
    python cli_io.py chi-verify --qmax 50 --h 7 --N 1000
    python cli_io.py decompose --generator ones --Q 10 --N 500 --h 4
    python cli_io.py scan --output resultados/scan.csv
"""
import io
import os
import sys
import json
import logging
import argparse
from dataclasses import dataclass, field
from datetime import datetime
from typing import List, Optional

import pandas as pd
from dotenv import load_dotenv

from arith_tables import (GeneratorSpec, build_generator, convolve_with_ones, essential_bound_report,
                          sieve_standard, write_table_csv, STANDARD_FUNCTIONS)
from chi_fourier import EXPANSION_TOL, parseval_scan, verify_expansion
from scaling_lab import (FLAGSHIP_FUNCTIONS, ScanCell, standard_function_name, default_grid, fit_power_law,
                         read_scan_csv, run_scan, spot_check, write_scan_csv)
from spectral_decomposition import (CLOSURE_TOL, RECONCILE_MAX_Q, enumerate_offdiagonal_pairs,
                                    lemma_scan, reconcile, write_pairs_csv)
from symmetry_engine import WindowParams, symmetry_report, symmetry_series, write_series_csv

logger = logging.getLogger('symlab.cli_io')

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_VERIFICATION = 2

SUBCOMMANDS = ('sieve', 'symmetry', 'chi-verify', 'decompose', 'lemma-scan', 'scan', 'fit')
GRID_COLUMNS = ['function', 'N', 'h', 'Q']
# expoente da curva de referência (log M)^k por função padrão
REFERENCE_POWER = {'Lambda': 1, 'moebius': 0, 'moebius_sq': 0}


class GridFileError(ValueError):
    """Arquivo de grade rejeitado; `lines` guarda as linhas com problema."""

    def __init__(self, mensagem: str, lines: Optional[List[int]] = None):
        super().__init__(mensagem)
        self.lines = lines or []


def _check_function_name(p: dict) -> None:
    """--function aceita os nomes padrão ('d_k' com --k) e d_3, d_4, ..."""
    if 'function' in p and p['function'] not in STANDARD_FUNCTIONS \
            and standard_function_name(p['function']) is None:
        raise ValueError(f"Função padrão desconhecida: '{p['function']}'")


@dataclass
class RunConfig:
    subcommand: str
    parameters: dict = field(default_factory=dict)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> 'RunConfig':
        """Valida todos os parâmetros antes de qualquer cálculo."""
        parametros = {k: v for k, v in vars(args).items()
                      if k not in ('subcommand', 'verbose', 'log_dir') and v is not None}
        config = cls(args.subcommand, parametros)
        config.validate()
        return config

    def get(self, chave, padrao=None):
        return self.parameters.get(chave, padrao)

    def validate(self) -> None:
        p = self.parameters
        if self.subcommand not in SUBCOMMANDS:
            raise ValueError(f"Subcomando desconhecido: '{self.subcommand}'")
        for chave in ('N', 'h', 'Q', 'M', 'k', 'qmax', 'A', 'samples', 'max_q', 'pair_budget'):
            if chave in p and p[chave] < 1:
                raise ValueError(f"--{chave.replace('_', '-')} precisa ser >= 1 ({p[chave]})")
        if 'tol' in p and not p['tol'] > 0:
            raise ValueError(f"--tol precisa ser positivo ({p['tol']})")

        if self.subcommand == 'sieve':
            if ('function' in p) == ('generator' in p):
                raise ValueError("sieve exige exatamente um entre --function e --generator")
            if 'generator' in p and 'Q' not in p:
                raise ValueError("sieve com --generator exige --Q")
            _check_function_name(p)
            if 'generator' in p:
                GeneratorSpec.parse(p['generator'], p['Q'])
        elif self.subcommand == 'symmetry':
            if ('function' in p) == ('generator' in p):
                raise ValueError("symmetry exige exatamente um entre --function e --generator")
            WindowParams(p['N'], p['h'], p.get('Q', p['N']))
            _check_function_name(p)
            if 'generator' in p:
                GeneratorSpec.parse(p['generator'], p.get('Q', p['N']))
        elif self.subcommand == 'chi-verify':
            if p['N'] < p['h']:
                raise ValueError(f"chi-verify exige N >= h (N={p['N']}, h={p['h']})")
        elif self.subcommand == 'decompose':
            WindowParams(p['N'], p['h'], p['Q'])
            GeneratorSpec.parse(p['generator'], p['Q'])
            if p['Q'] > p.get('max_q', RECONCILE_MAX_Q):
                raise ValueError(f"decompose limitado a Q <= {p.get('max_q', RECONCILE_MAX_Q)} (Q={p['Q']})")
        elif self.subcommand == 'lemma-scan':
            if 'A' in p and 'N' in p:
                raise ValueError("lemma-scan aceita --A ou --N, não ambos")
            if p['qmax'] < 2:
                raise ValueError(f"lemma-scan exige --qmax >= 2 ({p['qmax']})")
        elif self.subcommand == 'scan':
            if 'grid' in p and not os.path.isfile(p['grid']):
                raise ValueError(f"Arquivo de grade não encontrado: {p['grid']}")
        elif self.subcommand == 'fit':
            if not os.path.isfile(p['scan']):
                raise ValueError(f"CSV de varredura não encontrado: {p['scan']}")
            if p.get('log_power', 0) < 0:
                raise ValueError(f"--log-power precisa ser >= 0 ({p['log_power']})")


def configurar_logging(verbose: bool = False, log_dir: Optional[str] = None) -> None:
    """Console em stderr e, se pedido, arquivo de log com data e hora no nome."""
    nivel = logging.DEBUG if verbose else logging.INFO
    handlers = [logging.StreamHandler(sys.stderr)]
    if log_dir:
        os.makedirs(log_dir, exist_ok=True)
        caminho = os.path.join(log_dir, f"symlab_{datetime.now().strftime('%Y%m%d_%H%M%S')}.log")
        handlers.append(logging.FileHandler(caminho, mode='w', encoding='utf-8'))
    logging.basicConfig(
        level=nivel,
        format='%(asctime)s - %(levelname)s - %(message)s',
        handlers=handlers,
        force=True,
    )


def read_grid_file(path) -> List[ScanCell]:
    """
    Lê a grade CSV 'function,N,h,Q', ignorando linhas vazias e comentários '#'.

    Qualquer linha inválida rejeita o arquivo inteiro; a mensagem lista
    cada linha e a restrição violada.
    """
    try:
        with open(path, 'r', encoding='utf-8') as arquivo:
            linhas = arquivo.read().splitlines()
    except OSError as e:
        raise GridFileError(f"Não foi possível ler a grade '{path}': {e}") from e

    uteis = [(numero, linha.strip()) for numero, linha in enumerate(linhas, start=1)
             if linha.strip() and not linha.strip().startswith('#')]
    if not uteis:
        raise GridFileError("grade vazia")
    numero_cabecalho, cabecalho = uteis[0]
    if [c.strip() for c in cabecalho.split(',')] != GRID_COLUMNS:
        raise GridFileError(f"linha {numero_cabecalho}: cabeçalho esperado 'function,N,h,Q'",
                            [numero_cabecalho])
    corpo = uteis[1:]
    if not corpo:
        raise GridFileError("grade vazia")

    problemas = []
    for numero, linha in corpo:
        if len(linha.split(',')) != 4:
            problemas.append((numero, f"esperados 4 campos, encontrados {len(linha.split(','))}"))
    if problemas:
        raise _grid_error(problemas)

    df = pd.read_csv(io.StringIO('\n'.join([cabecalho] + [linha for _, linha in corpo])),
                     dtype=str, skipinitialspace=True)
    df.columns = GRID_COLUMNS
    numeros = {c: pd.to_numeric(df[c].str.strip(), errors='coerce') for c in ('N', 'h', 'Q')}

    celulas = []
    for posicao, (numero, _) in enumerate(corpo):
        funcao = str(df['function'].iloc[posicao]).strip()
        valores = {c: numeros[c].iloc[posicao] for c in numeros}
        invalidos = [c for c, v in valores.items() if pd.isna(v) or v != int(v)]
        if invalidos:
            problemas.append((numero, f"campos não inteiros: {', '.join(invalidos)}"))
            continue
        N, h, Q = (int(valores[c]) for c in ('N', 'h', 'Q'))
        try:
            WindowParams(N, h, Q)
            if standard_function_name(funcao) is None:
                GeneratorSpec.parse(funcao, Q)
        except ValueError as e:
            problemas.append((numero, str(e)))
            continue
        celulas.append(ScanCell(funcao, N, h, Q))
    if problemas:
        raise _grid_error(problemas)
    logger.info(f"Grade '{path}' lida com {len(celulas)} células")
    return celulas


def _grid_error(problemas) -> GridFileError:
    texto = '; '.join(f"linha {numero}: {motivo}" for numero, motivo in problemas)
    return GridFileError(f"Grade rejeitada: {texto}", [numero for numero, _ in problemas])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Laboratório da integral de simetria')
    parser.add_argument('--verbose', action='store_true', help='Log em nível DEBUG')
    parser.add_argument('--log-dir', default=os.getenv('SYMLAB_LOG_DIR'),
                        help='Pasta para arquivo de log (padrão: SYMLAB_LOG_DIR)')
    sub = parser.add_subparsers(dest='subcommand', required=True)

    def comando(nome, ajuda):
        p = sub.add_parser(nome, help=ajuda)
        p.add_argument('--output', help='Arquivo de saída (padrão: stdout)')
        return p

    p = comando('sieve', 'Tabela de função padrão ou de g * 1')
    p.add_argument('--function')
    p.add_argument('--generator')
    p.add_argument('--k', type=int)
    p.add_argument('--Q', type=int)
    p.add_argument('--M', type=int, required=True)

    p = comando('symmetry', 'Integral de simetria (ou a série com --series)')
    p.add_argument('--function')
    p.add_argument('--generator')
    p.add_argument('--k', type=int)
    p.add_argument('--N', type=int, required=True)
    p.add_argument('--h', type=int, required=True)
    p.add_argument('--Q', type=int)
    p.add_argument('--series', action='store_true')

    p = comando('chi-verify', 'Confere a expansão de Fourier de χ_q')
    p.add_argument('--qmax', type=int, required=True)
    p.add_argument('--h', type=int, required=True)
    p.add_argument('--N', type=int, required=True)
    p.add_argument('--samples', type=int, default=200)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--tol', type=float, default=EXPANSION_TOL)

    p = comando('decompose', 'Reconciliação direta / χ / espectral')
    p.add_argument('--generator', required=True)
    p.add_argument('--Q', type=int, required=True)
    p.add_argument('--N', type=int, required=True)
    p.add_argument('--h', type=int, required=True)
    p.add_argument('--pairs-out')
    p.add_argument('--tol', type=float, default=CLOSURE_TOL)
    p.add_argument('--max-q', type=int, default=RECONCILE_MAX_Q)
    p.add_argument('--pair-budget', type=int)

    p = comando('lemma-scan', 'Pares quase inteiros para 2 <= Q <= qmax')
    p.add_argument('--qmax', type=int, required=True)
    p.add_argument('--A', type=int)
    p.add_argument('--N', type=int)
    p.add_argument('--h', type=int, default=1)

    p = comando('scan', 'Varredura (função, N, h, Q)')
    p.add_argument('--grid')
    p.add_argument('--functions', default=','.join(FLAGSHIP_FUNCTIONS))
    p.add_argument('--spot-check', action='store_true')

    p = comando('fit', 'Ajuste log-log de um CSV de varredura')
    p.add_argument('--scan', required=True)
    p.add_argument('--function')
    p.add_argument('--log-power', type=int, default=0)
    return parser


def _csv_text(escritor, *args) -> str:
    buffer = io.StringIO()
    escritor(*args, buffer)
    return buffer.getvalue()


def _json_text(dados) -> str:
    return json.dumps(dados, indent=2) + '\n'


def _function_table(config: RunConfig, M: int, Q: int):
    """Tabela f pedida por --function ou --generator, com o expoente da curva (log M)^k."""
    nome = config.get('function')
    if nome:
        # 'd_k' vem com --k; 'd_3' já traz a ordem no nome
        base, k = standard_function_name(nome) or (nome, config.get('k', 2))
        return sieve_standard(base, M, k=k), REFERENCE_POWER.get(base, k)
    g = build_generator(GeneratorSpec.parse(config.get('generator'), Q), Q)
    return convolve_with_ones(g, M), 2


def _run_sieve(config: RunConfig):
    M = config.get('M')
    tabela, k = _function_table(config, M, config.get('Q', M))
    relatorio = essential_bound_report(tabela, k)
    logger.info(f"{tabela.name}: max|f| = {relatorio['max_abs']} contra (log M)^{k} = "
                f"{relatorio['log_power']:.3f} (razão {relatorio['ratio']:.4f})")
    return EXIT_OK, _csv_text(write_table_csv, tabela), {}


def _run_symmetry(config: RunConfig):
    params = WindowParams(config.get('N'), config.get('h'), config.get('Q', config.get('N')))
    f, _ = _function_table(config, params.table_length, params.Q)
    if config.get('series'):
        return EXIT_OK, _csv_text(write_series_csv, symmetry_series(f, params)), {}
    relatorio = symmetry_report(f, params)
    logger.info(f"I_{f.name}(N={params.N}, h={params.h}) = {relatorio['integral']}, "
                f"nível λ = {params.level:.4f}")
    return EXIT_OK, _json_text(relatorio), {}


def _run_chi_verify(config: RunConfig):
    tol = config.get('tol')
    linhas = verify_expansion(config.get('qmax'), config.get('h'), config.get('N'),
                              config.get('samples'), config.get('seed'))
    falhas = [l for l in linhas if l['abs_err'] > tol * l['q']]
    for linha in falhas:
        logger.error(f"Expansão diverge em q={linha['q']}, x={linha['x']}: erro {linha['abs_err']:.3e}")
    if config.get('qmax') >= 2:
        parseval_scan(config.get('qmax'), config.get('h'))
    texto = pd.DataFrame(linhas, columns=['q', 'h', 'x', 'chi_direct', 'chi_fourier', 'abs_err']) \
        .to_csv(index=False, lineterminator='\n')
    return (EXIT_VERIFICATION if falhas else EXIT_OK), texto, {}


def _run_decompose(config: RunConfig):
    params = WindowParams(config.get('N'), config.get('h'), config.get('Q'))
    g = build_generator(GeneratorSpec.parse(config.get('generator'), params.Q), params.Q)
    relatorio = reconcile(g, params, max_q=config.get('max_q'), budget=config.get('pair_budget'))
    tol = config.get('tol')
    falhou = abs(relatorio.residual) > tol * max(1.0, relatorio.i_direct)
    if g.exact and relatorio.i_via_chi != relatorio.i_direct:
        logger.error(f"Caminho χ diverge: {relatorio.i_via_chi} != {relatorio.i_direct}")
        falhou = True
    if falhou:
        logger.error(f"Resíduo de fechamento acima da tolerância: {relatorio.residual:.3e}")
    extras = {}
    if config.get('pairs_out'):
        pares = enumerate_offdiagonal_pairs(params.Q, config.get('pair_budget'))
        extras[config.get('pairs_out')] = _csv_text(write_pairs_csv, pares)
    return (EXIT_VERIFICATION if falhou else EXIT_OK), _json_text(relatorio.to_dict()), extras


def _run_lemma_scan(config: RunConfig):
    linhas = lemma_scan(config.get('qmax'), A=config.get('A'), N=config.get('N'), h=config.get('h'))
    nao_nulos = [l for l in linhas if l['nonzero_products']]
    for linha in nao_nulos:
        logger.warning(f"Q={linha['Q']}, A={linha['A']}: {linha['nonzero_products']} pares com F·F != 0")
    texto = pd.DataFrame(linhas, columns=['Q', 'A', 'near_pairs', 'nonzero_products']) \
        .to_csv(index=False, lineterminator='\n')
    return (EXIT_VERIFICATION if nao_nulos else EXIT_OK), texto, {}


def _run_scan(config: RunConfig):
    if config.get('grid'):
        grade = read_grid_file(config.get('grid'))
    else:
        funcoes = [f.strip() for f in config.get('functions').split(',') if f.strip()]
        grade = default_grid(funcoes)
    linhas = run_scan(grade)
    codigo = EXIT_OK
    if config.get('spot_check') and spot_check(linhas):
        codigo = EXIT_VERIFICATION
    return codigo, _csv_text(write_scan_csv, linhas), {}


def _run_fit(config: RunConfig):
    linhas = read_scan_csv(config.get('scan'))
    if config.get('function'):
        linhas = [l for l in linhas if l.function == config.get('function')]
    ajuste = fit_power_law(linhas, log_power=config.get('log_power', 0))
    logger.info(f"Inclinação {ajuste.slope:.4f}, r² = {ajuste.r_squared:.5f} ({ajuste.n_points} pontos)")
    return EXIT_OK, _json_text(ajuste.to_dict()), {}


HANDLERS = {
    'sieve': _run_sieve,
    'symmetry': _run_symmetry,
    'chi-verify': _run_chi_verify,
    'decompose': _run_decompose,
    'lemma-scan': _run_lemma_scan,
    'scan': _run_scan,
    'fit': _run_fit,
}


def _gravar(texto: str, destino: Optional[str]) -> None:
    if destino:
        pasta = os.path.dirname(destino)
        if pasta:
            os.makedirs(pasta, exist_ok=True)
        with open(destino, 'w', encoding='utf-8', newline='') as arquivo:
            arquivo.write(texto)
        logger.info(f"Saída gravada em {destino}")
    else:
        sys.stdout.write(texto)


def run_cli(argv: Optional[List[str]] = None) -> int:
    """Executa um subcomando; 0 = sucesso, 1 = configuração inválida, 2 = verificação falhou."""
    load_dotenv()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INVALID
    configurar_logging(args.verbose, args.log_dir)

    try:
        config = RunConfig.from_args(args)
        logger.info(f"Iniciando '{config.subcommand}' com {config.parameters}")
        codigo, texto, extras = HANDLERS[config.subcommand](config)
    except ValueError as e:
        logger.error(f"Configuração inválida: {e}")
        return EXIT_INVALID
    except OSError as e:
        logger.error(f"Erro de arquivo: {e}", exc_info=True)
        return EXIT_INVALID

    try:
        for caminho, conteudo in extras.items():
            _gravar(conteudo, caminho)
        _gravar(texto, config.get('output'))
    except OSError as e:
        logger.error(f"Erro ao gravar saída: {e}", exc_info=True)
        return EXIT_INVALID
    return codigo


if __name__ == '__main__':
    sys.exit(run_cli())
