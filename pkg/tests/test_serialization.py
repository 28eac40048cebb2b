# Arquivo: tests/test_serialization.py

import logging

import numpy as np
import pytest

from core.exceptions import ParseError
from core.model import SimilarityModel
from core.serialization import dumps_model, loads_model, save_model, load_model


def test_dumps_model_identidade():
    """Cabeçalho 'dim nnz' seguido de uma linha por entrada."""
    logging.info("Iniciando teste: test_dumps_model_identidade")
    assert dumps_model(SimilarityModel.identity(2)) == "2 2\n0 0 1.0\n1 1 1.0\n"
    assert dumps_model(SimilarityModel.zeros(3)) == "3 0\n"


def test_modelo_salvo_e_lido_e_identico(tmp_path):
    """Os valores usam a menor representação decimal exata (repr)."""
    logging.info("Iniciando teste: test_modelo_salvo_e_lido_e_identico")

    # 1. Modelo com valores sem representação decimal curta
    rng = np.random.default_rng(5)
    denso = rng.normal(size=(6, 6)) * (rng.random((6, 6)) < 0.4)
    modelo = SimilarityModel.from_dense(denso)

    # 2. Escrita e leitura
    caminho = save_model(modelo, tmp_path / "model.txt")
    lido = load_model(caminho)

    # 3. Igualdade bit a bit
    assert lido == modelo
    logging.info("Teste finalizado com sucesso.")


def test_arquivo_truncado_informa_offset():
    """Arquivo com menos entradas que o cabeçalho declara."""
    logging.info("Iniciando teste: test_arquivo_truncado_informa_offset")
    dados = b"3 3\n0 0 1.0\n1 1 1.0\n"

    with pytest.raises(ParseError) as erro:
        loads_model(dados)

    assert erro.value.offset == len(dados)
    assert "byte" in str(erro.value)
    logging.info("Teste finalizado com sucesso.")


@pytest.mark.parametrize("conteudo, offset", [
    ("", 0),
    ("2\n", 0),
    ("2 1\n0 0 0.0\n", 4),
    ("2 1\n0 2 1.0\n", 4),
    ("2 1\n0 0 nan\n", 4),
    ("2 2\n0 0 1.0\n0 0 2.0\n", 12),
    ("2 1\n0 0 1.0\n1 1 1.0\n", 12),
    ("2 5\n", 0),
])
def test_loads_model_rejeita_conteudo_invalido(conteudo, offset):
    """Zero, índice fora do intervalo, não finito, duplicata e excesso de entradas."""
    logging.info(f"Iniciando teste: test_loads_model_rejeita_conteudo_invalido {conteudo!r}")
    with pytest.raises(ParseError) as erro:
        loads_model(conteudo)
    assert erro.value.offset == offset
