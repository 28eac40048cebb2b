# Arquivo: tests/test_build_report.py

import json
import logging

import numpy as np
import pandas as pd
import pytest

from core.exceptions import DimensionError, EvaluationError
from core.model import SimilarityModel, SparseVector
from etl.etl import LabeledDataset
from etl.synthetic import make_onehot_dataset
from report.build_report import EvalReport, evaluate_retrieval, measure_query_time, write_report


def _dataset_denso(linhas, labels):
    dim = len(linhas[0])
    return LabeledDataset(dim, tuple((int(l), SparseVector.from_dense(x)) for x, l in zip(linhas, labels)))


def map_por_forca_bruta(m_denso, x_denso, labels, ks):
    """Ranking por (score decrescente, posição crescente) com sorted() do Python."""
    n = len(labels)
    scores = x_denso @ m_denso @ x_denso.T
    aps, precisoes = [], {k: [] for k in ks}
    for q in range(n):
        candidatos = sorted((c for c in range(n) if c != q), key=lambda c: (-scores[q, c], c))
        relevancia = [labels[c] == labels[q] for c in candidatos]
        if not any(relevancia):
            continue
        acertos, soma = 0, 0.0
        for posicao, relevante in enumerate(relevancia, start=1):
            if relevante:
                acertos += 1
                soma += acertos / posicao
        aps.append(soma / acertos)
        for k in ks:
            precisoes[k].append(sum(relevancia[:k]) / k)
    return float(np.mean(aps)), {k: float(np.mean(v)) for k, v in precisoes.items()}


def test_dois_itens_da_mesma_classe():
    """O único candidato é relevante: MAP = 1."""
    logging.info("Iniciando teste: test_dois_itens_da_mesma_classe")
    ds = _dataset_denso([[1.0, 0.5], [0.2, 1.0]], [1, 1])

    report = evaluate_retrieval(SimilarityModel.identity(2), ds, ks=[1])

    assert report.map == 1.0
    assert report.query_count == 2
    assert report.precision_at_k == ((1, 1.0),)


def test_nenhuma_consulta_com_relevante():
    logging.info("Iniciando teste: test_nenhuma_consulta_com_relevante")
    ds = _dataset_denso([[1.0, 0.0], [0.0, 1.0]], [1, 2])
    with pytest.raises(EvaluationError):
        evaluate_retrieval(SimilarityModel.identity(2), ds)


def test_classes_ortogonais_com_identidade():
    """Classes one-hot com M = I: MAP = 1 e P@k exato."""
    logging.info("Iniciando teste: test_classes_ortogonais_com_identidade")
    ds = make_onehot_dataset(3, 4)

    report = evaluate_retrieval(SimilarityModel.identity(3), ds, ks=[1, 3, 5])

    assert report.map == 1.0
    assert report.query_count == 12
    # Cada consulta tem 3 relevantes entre 11 candidatos
    assert [k for k, _ in report.precision_at_k] == [1, 3, 5]
    assert [p for _, p in report.precision_at_k] == pytest.approx([1.0, 1.0, 0.6], abs=1e-12)
    assert report.sparsity == 1 - 3 / 9


def test_dimensao_incompativel():
    logging.info("Iniciando teste: test_dimensao_incompativel")
    with pytest.raises(DimensionError) as erro:
        evaluate_retrieval(SimilarityModel.identity(4), make_onehot_dataset(3, 2))
    assert "3" in str(erro.value) and "4" in str(erro.value)


def test_consulta_sem_relevante_fica_fora():
    logging.info("Iniciando teste: test_consulta_sem_relevante_fica_fora")
    ds = _dataset_denso([[1, 0, 0], [1, 1, 0], [0, 1, 1], [0, 0, 1]], [1, 1, 2, 3])

    report = evaluate_retrieval(SimilarityModel.identity(3), ds, ks=[1])

    assert report.query_count == 2
    assert report.excluded_queries == 2


def test_evaluate_retrieval_contra_forca_bruta():
    """
    Dados e modelo inteiros: os scores são exatos e os empates testam a
    regra de desempate pela posição.
    """
    logging.info("Iniciando teste: test_evaluate_retrieval_contra_forca_bruta")
    rng = np.random.default_rng(47)
    ks = [1, 2, 5, 10]

    for _ in range(20):
        # 1. Dados inteiros pequenos (muitos empates)
        n, d = int(rng.integers(4, 30)), int(rng.integers(2, 6))
        x = rng.integers(0, 3, size=(n, d)).astype(float)
        labels = rng.integers(1, 4, size=n)
        m_denso = rng.integers(-2, 3, size=(d, d)).astype(float)
        ds = _dataset_denso(x, labels)
        if len(set(labels.tolist())) == len(labels):
            continue

        # 2. Avaliação e oráculo
        report = evaluate_retrieval(SimilarityModel.from_dense(m_denso), ds, ks)
        map_esperado, precisoes = map_por_forca_bruta(m_denso, x, labels, ks)

        # 3. Verificação
        assert report.map == pytest.approx(map_esperado, abs=1e-12)
        for k, p in report.precision_at_k:
            assert p == pytest.approx(precisoes[k], abs=1e-12)
    logging.info("Teste finalizado com sucesso.")


def test_map_invariante_a_escala_positiva_e_deterministico():
    logging.info("Iniciando teste: test_map_invariante_a_escala_positiva_e_deterministico")
    rng = np.random.default_rng(53)
    x = rng.integers(0, 4, size=(25, 5)).astype(float)
    ds = _dataset_denso(x, rng.integers(1, 4, size=25))
    m = SimilarityModel.from_dense(rng.integers(-3, 4, size=(5, 5)).astype(float))

    base = evaluate_retrieval(m, ds)
    escalado = evaluate_retrieval(m.scaled(4.0), ds)
    repetido = evaluate_retrieval(m, ds)

    assert escalado.map == base.map
    assert escalado.precision_at_k == base.precision_at_k
    assert repetido.map == base.map and repetido.precision_at_k == base.precision_at_k


def test_report_json_e_csv(tmp_path):
    """JSON com exatamente as chaves do relatório; CSV com uma linha."""
    logging.info("Iniciando teste: test_report_json_e_csv")
    report = EvalReport(map=0.5, precision_at_k=((1, 1.0), (5, 0.4)), sparsity=0.9,
                        query_count=10, wall_time_seconds=0.012)

    caminho_json, caminho_csv = write_report(report, tmp_path, algo="sors_1")

    dados = json.loads(caminho_json.read_text(encoding="utf-8"))
    assert set(dados) == {"map", "precision_at_k", "sparsity", "query_count", "wall_time_seconds"}
    assert dados["precision_at_k"] == [[1, 1.0], [5, 0.4]]

    tabela = pd.read_csv(caminho_csv)
    assert list(tabela.columns) == ["algo", "map", "sparsity", "query_count", "wall_time_seconds", "p_at_1", "p_at_5"]
    assert tabela.loc[0, "algo"] == "sors_1"
    assert tabela.loc[0, "p_at_5"] == 0.4


def test_measure_query_time():
    logging.info("Iniciando teste: test_measure_query_time")
    ds = make_onehot_dataset(3, 10)

    tabela = measure_query_time(SimilarityModel.identity(3), ds, [5, 10, 100])

    assert list(tabela.columns) == ["queries", "seconds", "nnz"]
    assert tabela["queries"].tolist() == [5, 10, 30]
    assert (tabela["nnz"] == 3).all()
    assert (tabela["seconds"] >= 0).all()
