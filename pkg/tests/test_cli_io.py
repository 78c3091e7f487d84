import io
import json

import pandas as pd
import pytest

from cli_io import (EXIT_INVALID, EXIT_OK, EXIT_VERIFICATION, GridFileError, RunConfig, build_parser,
                    read_grid_file, run_cli)
from scaling_lab import ScanCell


def _executar(capsys, *argv):
    codigo = run_cli(list(argv))
    return codigo, capsys.readouterr().out


def _grade(tmp_path, texto):
    caminho = tmp_path / 'grade.csv'
    caminho.write_text(texto, encoding='utf-8')
    return caminho


def test_chi_verify(capsys):
    codigo, saida = _executar(capsys, 'chi-verify', '--qmax', '50', '--h', '7', '--N', '1000')
    assert codigo == EXIT_OK
    df = pd.read_csv(io.StringIO(saida))
    assert list(df.columns) == ['q', 'h', 'x', 'chi_direct', 'chi_fourier', 'abs_err']
    assert list(df['q']) == list(range(1, 51))
    assert (df['abs_err'] <= 1e-9 * df['q']).all()


def test_chi_verify_reports_mismatch_above_tolerance(capsys):
    codigo, _ = _executar(capsys, 'chi-verify', '--qmax', '50', '--h', '7', '--N', '1000',
                          '--tol', '1e-300')
    assert codigo == EXIT_VERIFICATION


def test_decompose(capsys):
    codigo, saida = _executar(capsys, 'decompose', '--generator', 'ones', '--Q', '10',
                              '--N', '500', '--h', '4')
    assert codigo == EXIT_OK
    relatorio = json.loads(saida)
    assert set(relatorio) == {'i_direct', 'i_via_chi', 'diagonal', 'offdiag_delta', 'offdiag_sigma',
                              'residual', 'pair_count', 'near_pair_count'}
    assert abs(relatorio['residual']) <= 1e-8 * max(1.0, relatorio['i_direct'])


def test_decompose_writes_pairs(tmp_path, capsys):
    pares = tmp_path / 'pares.csv'
    codigo, _ = _executar(capsys, 'decompose', '--generator', 'moebius', '--Q', '5', '--N', '100',
                          '--h', '3', '--pairs-out', str(pares))
    assert codigo == EXIT_OK
    assert len(pares.read_text(encoding='utf-8').splitlines()) == 1 + 10


def test_decompose_pair_budget(capsys):
    codigo, _ = _executar(capsys, 'decompose', '--generator', 'ones', '--Q', '10', '--N', '100',
                          '--h', '3', '--pair-budget', '5')
    assert codigo == EXIT_INVALID


def test_invalid_config_writes_nothing(tmp_path, capsys):
    destino = tmp_path / 'saida' / 'relatorio.json'
    codigo, saida = _executar(capsys, 'decompose', '--generator', 'ones', '--Q', '50', '--N', '500',
                              '--h', '4', '--output', str(destino))
    assert codigo == EXIT_INVALID
    assert saida == ''
    assert not destino.exists()


@pytest.mark.parametrize('argv', [
    ['symmetry', '--function', 'd', '--N', '100', '--h', '200'],
    ['symmetry', '--function', 'd', '--generator', 'ones', '--N', '100', '--h', '5'],
    ['symmetry', '--function', 'sigma', '--N', '100', '--h', '5'],
    ['sieve', '--generator', 'ones', '--M', '10'],
    ['sieve', '--function', 'd_k', '--k', '0', '--M', '10'],
    ['chi-verify', '--qmax', '5', '--h', '20', '--N', '10'],
    ['lemma-scan', '--qmax', '1'],
    ['lemma-scan', '--qmax', '5', '--A', '10', '--N', '100'],
    ['fit', '--scan', 'nao_existe.csv'],
    ['symmetry', '--function', 'd_k', '--k', '0', '--N', '100', '--h', '5'],
    ['decompose', '--generator', 'primos', '--Q', '5', '--N', '100', '--h', '3'],
    ['symmetry', '--N', '100'],
    ['desconhecido'],
])
def test_invalid_invocations(capsys, argv):
    codigo, saida = _executar(capsys, *argv)
    assert codigo == EXIT_INVALID
    assert saida == ''


def test_symmetry_of_delta_one(capsys):
    codigo, saida = _executar(capsys, 'symmetry', '--generator', 'delta_one', '--N', '1000', '--h', '10')
    assert codigo == EXIT_OK
    relatorio = json.loads(saida)
    assert relatorio['integral'] == 0
    assert relatorio['ratio'] == 0
    assert relatorio['theorem_regime'] is True


def test_symmetry_of_divisor_function(capsys):
    codigo, saida = _executar(capsys, 'symmetry', '--function', 'd', '--N', '4', '--h', '2')
    assert codigo == EXIT_OK
    assert json.loads(saida)['integral'] == 2.5


def test_symmetry_accepts_d_k_like_sieve(capsys):
    codigo, saida = _executar(capsys, 'symmetry', '--function', 'd_k', '--k', '3', '--N', '300', '--h', '5')
    assert codigo == EXIT_OK
    codigo_d3, saida_d3 = _executar(capsys, 'symmetry', '--function', 'd_3', '--N', '300', '--h', '5')
    assert codigo_d3 == EXIT_OK
    assert json.loads(saida) == json.loads(saida_d3)


def test_symmetry_series_output(tmp_path, capsys):
    destino = tmp_path / 'serie.csv'
    codigo, _ = _executar(capsys, 'symmetry', '--function', 'd', '--N', '4', '--h', '2',
                          '--series', '--output', str(destino))
    assert codigo == EXIT_OK
    assert destino.read_text(encoding='utf-8') == 'x,value\n5,1.0\n6,0.5\n7,0.5\n8,1.0\n'


def test_sieve_outputs(capsys):
    codigo, saida = _executar(capsys, 'sieve', '--function', 'd_k', '--k', '3', '--M', '4')
    assert codigo == EXIT_OK
    assert saida == 'n,value\n1,1\n2,3\n3,3\n4,6\n'
    codigo, saida_d3 = _executar(capsys, 'sieve', '--function', 'd_3', '--M', '4')
    assert saida_d3 == saida
    codigo, saida = _executar(capsys, 'sieve', '--generator', 'moebius', '--Q', '10', '--M', '10')
    assert codigo == EXIT_OK
    assert saida.splitlines()[1:] == ['1,1'] + [f'{n},0' for n in range(2, 11)]


def test_lemma_scan(capsys):
    codigo, saida = _executar(capsys, 'lemma-scan', '--qmax', '30')
    assert codigo == EXIT_OK
    df = pd.read_csv(io.StringIO(saida))
    assert list(df.columns) == ['Q', 'A', 'near_pairs', 'nonzero_products']
    assert (df['near_pairs'] == 0).all()


def test_lemma_scan_small_threshold_fails_verification(capsys):
    codigo, _ = _executar(capsys, 'lemma-scan', '--qmax', '8', '--A', '2')
    assert codigo == EXIT_VERIFICATION


def test_scan_and_fit(tmp_path, capsys):
    grade = _grade(tmp_path, "# grade pequena\nfunction,N,h,Q\n\nd,256,5,256\nd,512,6,512\n"
                             "d,1024,8,1024\nd,2048,9,2048\n")
    scan = tmp_path / 'scan.csv'
    assert run_cli(['scan', '--grid', str(grade), '--spot-check', '--output', str(scan)]) == EXIT_OK
    df = pd.read_csv(scan)
    assert list(df['N']) == [256, 512, 1024, 2048]
    capsys.readouterr()

    codigo, saida = _executar(capsys, 'fit', '--scan', str(scan), '--function', 'd')
    assert codigo == EXIT_OK
    ajuste = json.loads(saida)
    assert list(ajuste) == ['slope', 'intercept', 'r_squared', 'n_points']
    assert ajuste['n_points'] == 4
    assert 0 <= ajuste['r_squared'] <= 1

    codigo, saida = _executar(capsys, 'fit', '--scan', str(scan), '--function', 'd', '--log-power', '3')
    assert codigo == EXIT_OK
    assert json.loads(saida)['slope'] < ajuste['slope']


def test_scan_is_byte_identical(tmp_path):
    grade = _grade(tmp_path, "function,N,h,Q\nmoebius,300,4,300\nLambda,300,4,300\nones,300,4,20\n")
    primeiro, segundo = tmp_path / 'a.csv', tmp_path / 'b.csv'
    assert run_cli(['scan', '--grid', str(grade), '--output', str(primeiro)]) == EXIT_OK
    assert run_cli(['scan', '--grid', str(grade), '--output', str(segundo)]) == EXIT_OK
    assert primeiro.read_bytes() == segundo.read_bytes()


def test_scan_with_bad_grid(tmp_path, capsys):
    grade = _grade(tmp_path, "function,N,h,Q\nd,100,200,100\n")
    codigo, saida = _executar(capsys, 'scan', '--grid', str(grade))
    assert codigo == EXIT_INVALID
    assert saida == ''


def test_fit_with_too_few_rows(tmp_path, capsys):
    scan = tmp_path / 'scan.csv'
    scan.write_text("function,N,h,Q,integral,ratio,max_g,theorem_regime\n"
                    "d,100,5,100,10.0,0.02,12.0,True\n", encoding='utf-8')
    codigo, _ = _executar(capsys, 'fit', '--scan', str(scan))
    assert codigo == EXIT_INVALID


def test_log_dir(tmp_path, capsys):
    pasta = tmp_path / 'logs'
    codigo, _ = _executar(capsys, '--log-dir', str(pasta), 'symmetry', '--function', 'moebius',
                          '--N', '50', '--h', '3')
    assert codigo == EXIT_OK
    arquivos = list(pasta.glob('symlab_*.log'))
    assert len(arquivos) == 1


def test_grid_file_single_row(tmp_path):
    assert read_grid_file(_grade(tmp_path, "function,N,h,Q\nd,4096,12,4096\n")) == [
        ScanCell('d', 4096, 12, 4096)]


def test_grid_file_with_generators(tmp_path):
    celulas = read_grid_file(_grade(tmp_path, "function,N,h,Q\n ones, 100, 5, 10\ndelta_at:2,100,5,10\n"))
    assert [c.function for c in celulas] == ['ones', 'delta_at:2']
    assert celulas[0].Q == 10


def test_grid_file_only_comments(tmp_path):
    with pytest.raises(GridFileError, match='grade vazia'):
        read_grid_file(_grade(tmp_path, "#comentario\n\n   \n# outro\n"))


def test_grid_file_header_only(tmp_path):
    with pytest.raises(GridFileError, match='grade vazia'):
        read_grid_file(_grade(tmp_path, "function,N,h,Q\n"))


def test_grid_file_rejects_wide_window(tmp_path):
    with pytest.raises(GridFileError) as erro:
        read_grid_file(_grade(tmp_path, "function,N,h,Q\nd,100,200,100\n"))
    assert erro.value.lines == [2]
    assert 'linha 2' in str(erro.value)
    assert 'h < N' in str(erro.value)


def test_grid_file_lists_every_bad_line(tmp_path):
    texto = "function,N,h,Q\nd,100,5,100\nd,100,x,100\n# ok\nd,100,5,200\nprimos,100,5,10\n"
    with pytest.raises(GridFileError) as erro:
        read_grid_file(_grade(tmp_path, texto))
    assert erro.value.lines == [3, 5, 6]


def test_grid_file_field_count(tmp_path):
    with pytest.raises(GridFileError) as erro:
        read_grid_file(_grade(tmp_path, "function,N,h,Q\nd,100,5\n"))
    assert erro.value.lines == [2]


def test_grid_file_bad_header(tmp_path):
    with pytest.raises(GridFileError):
        read_grid_file(_grade(tmp_path, "funcao,N,h,Q\nd,100,5,100\n"))


def test_run_config_validation():
    parser = build_parser()
    config = RunConfig.from_args(parser.parse_args(['symmetry', '--function', 'd', '--N', '10', '--h', '2']))
    assert config.get('N') == 10
    assert config.get('Q') is None
    with pytest.raises(ValueError):
        RunConfig.from_args(parser.parse_args(['chi-verify', '--qmax', '0', '--h', '2', '--N', '10']))
