"""
============================================================================
Módulo: build_report.py
Projeto: SORS - Aprendizado Esparso Online de Similaridade Relativa
============================================================================

DESCRIÇÃO:
    Módulo de serviço responsável pela avaliação de recuperação de um
    modelo e pela escrita dos relatórios (JSON e CSV).

PROTOCOLO DE AVALIAÇÃO:
    - Cada item de teste é uma consulta
    - Candidatos: todos os outros itens de teste
    - Ranking por S_M(consulta, candidato) decrescente; empates resolvidos
      pela posição crescente do candidato (determinístico)
    - Relevante = mesmo rótulo da consulta
    - Consultas sem nenhum candidato relevante ficam fora do MAP e do P@k
    - O tempo medido cobre apenas os laços de pontuação

SAÍDAS:
    - report.json: map, precision_at_k, sparsity, query_count, wall_time_seconds
    - linha CSV com as mesmas métricas para agregação
    - query_time.csv: custo de consulta por tamanho do conjunto

DEPENDÊNCIAS:
    - numpy / scipy.sparse: pontuação em bloco (X M Xᵀ)
    - pandas: tabelas CSV
============================================================================
"""

# ============================================================================
# IMPORTAÇÕES
# ============================================================================
from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
import pandas as pd

from config.settings import setup_logging
from core.exceptions import DimensionError, EvaluationError, ArgumentError
from core.model import SimilarityModel
from etl.etl import LabeledDataset
from report.metrics import average_precision, precision_at_k, model_sparsity

# Tamanho do bloco de consultas pontuadas de uma vez
BLOCK_SIZE = 256

logger = setup_logging("build_report_logger", "report.log")


# ============================================================================
# RELATÓRIO
# ============================================================================
@dataclass(frozen=True)
class EvalReport:
    """
    Resultado de uma avaliação de recuperação.

    Attributes:
        map (float): Mean average precision em [0, 1]
        precision_at_k (tuple): Pares (k, precisão) com k estritamente crescente
        sparsity (float): 1 - nnz(M) / d²
        query_count (int): Consultas que entraram no MAP
        wall_time_seconds (float): Tempo de pontuação, em milissegundos de precisão
        excluded_queries (int): Consultas sem candidato relevante
    """
    map: float
    precision_at_k: tuple[tuple[int, float], ...]
    sparsity: float
    query_count: int
    wall_time_seconds: float
    excluded_queries: int = 0

    def to_dict(self) -> dict:
        return {
            "map": self.map,
            "precision_at_k": [[k, p] for k, p in self.precision_at_k],
            "sparsity": self.sparsity,
            "query_count": self.query_count,
            "wall_time_seconds": self.wall_time_seconds,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_frame(self, **extra) -> pd.DataFrame:
        """Uma linha com as métricas (P@k em colunas p_at_<k>) e colunas extras no início."""
        linha = dict(extra)
        linha.update({
            "map": self.map,
            "sparsity": self.sparsity,
            "query_count": self.query_count,
            "wall_time_seconds": self.wall_time_seconds,
        })
        for k, p in self.precision_at_k:
            linha[f"p_at_{k}"] = p
        return pd.DataFrame([linha])


# ============================================================================
# FUNÇÕES PÚBLICAS (INTERFACE DO MÓDULO)
# ============================================================================
def evaluate_retrieval(m: SimilarityModel, test: LabeledDataset,
                       ks: Sequence[int] = (1, 5, 10, 20, 50)) -> EvalReport:
    """
    Avalia o modelo como função de ranking sobre o conjunto de teste.

    Args:
        m (SimilarityModel): Modelo a avaliar
        test (LabeledDataset): Conjunto de teste (consultas e candidatos)
        ks (Sequence[int]): Cortes do precision@k

    Returns:
        EvalReport: Métricas da avaliação

    Raises:
        DimensionError: Se test.dim for diferente de m.dim
        EvaluationError: Conjunto vazio ou nenhuma consulta com candidato relevante
        ArgumentError: Algum k < 1

    Example:
        >>> ds = make_onehot_dataset(3, 4)
        >>> evaluate_retrieval(SimilarityModel.identity(3), ds).map
        1.0
    """
    if test.dim != m.dim:
        raise DimensionError(f"Dataset com dimensão {test.dim}, modelo com {m.dim}")
    if len(test) == 0:
        raise EvaluationError("Conjunto de teste vazio")
    ks = sorted(set(int(k) for k in ks))
    if not ks or ks[0] < 1:
        raise ArgumentError(f"ks deve conter inteiros >= 1 (recebido {ks})")

    labels = test.labels
    n = len(test)
    aps = []
    precisoes = {k: [] for k in ks}
    excluidas = 0

    inicio = time.monotonic()
    x = test.matrix
    xm = x @ m.matrix
    todos = np.arange(n)
    for bloco_inicio in range(0, n, BLOCK_SIZE):
        bloco = slice(bloco_inicio, min(bloco_inicio + BLOCK_SIZE, n))
        scores_bloco = (xm[bloco] @ x.T).toarray()
        for linha, q in enumerate(range(bloco.start, bloco.stop)):
            candidatos = np.delete(todos, q)
            scores = scores_bloco[linha, candidatos]
            # Ordenação estável: empate mantém a posição crescente do candidato
            ordem = np.argsort(-scores, kind="stable")
            relevancia = labels[candidatos[ordem]] == labels[q]
            if not relevancia.any():
                excluidas += 1
                continue
            aps.append(average_precision(relevancia))
            for k in ks:
                precisoes[k].append(precision_at_k(relevancia, k))
    tempo = round(time.monotonic() - inicio, 3)

    if not aps:
        raise EvaluationError(
            f"Nenhuma das {n} consultas tem candidato relevante; MAP indefinido"
        )

    report = EvalReport(
        map=float(np.mean(aps)),
        precision_at_k=tuple((k, float(np.mean(precisoes[k]))) for k in ks),
        sparsity=model_sparsity(m),
        query_count=len(aps),
        wall_time_seconds=tempo,
        excluded_queries=excluidas,
    )
    logger.info(
        f"Avaliação: MAP={report.map:.4f}, esparsidade={report.sparsity:.4f}, "
        f"{report.query_count} consultas ({excluidas} excluídas), {tempo:.3f}s"
    )
    return report


def measure_query_time(m: SimilarityModel, test: LabeledDataset,
                       sizes: Sequence[int]) -> pd.DataFrame:
    """
    Mede o tempo de pontuar conjuntos crescentes de consultas contra todo
    o conjunto de teste.

    Args:
        m (SimilarityModel): Modelo avaliado
        test (LabeledDataset): Conjunto de teste
        sizes (Sequence[int]): Quantidades de consultas (limitadas a len(test))

    Returns:
        pd.DataFrame: Colunas queries, seconds, nnz
    """
    if test.dim != m.dim:
        raise DimensionError(f"Dataset com dimensão {test.dim}, modelo com {m.dim}")
    x = test.matrix
    linhas = []
    for tamanho in sizes:
        if tamanho < 1:
            raise ArgumentError(f"Tamanho de consulta deve ser >= 1 (recebido {tamanho})")
        tamanho = min(int(tamanho), len(test))
        inicio = time.monotonic()
        for bloco_inicio in range(0, tamanho, BLOCK_SIZE):
            bloco = slice(bloco_inicio, min(bloco_inicio + BLOCK_SIZE, tamanho))
            (x[bloco] @ m.matrix @ x.T).toarray()
        linhas.append({"queries": tamanho, "seconds": round(time.monotonic() - inicio, 3), "nnz": m.nnz})
    logger.info(f"Tempo de consulta medido para tamanhos {list(sizes)} (nnz={m.nnz}).")
    return pd.DataFrame(linhas, columns=["queries", "seconds", "nnz"])


def write_report(report: EvalReport, output_dir, name: str = "report", **extra) -> tuple[Path, Path]:
    """
    Salva o relatório como <name>.json e <name>.csv em output_dir.

    Returns:
        tuple: (caminho do JSON, caminho do CSV)
    """
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    caminho_json = output_dir / f"{name}.json"
    caminho_csv = output_dir / f"{name}.csv"
    caminho_json.write_text(report.to_json() + "\n", encoding="utf-8")
    report.to_frame(**extra).to_csv(caminho_csv, index=False, encoding="utf-8")
    logger.info(f"Relatório salvo em '{caminho_json}' e '{caminho_csv}'.")
    return caminho_json, caminho_csv
