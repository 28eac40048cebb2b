"""
============================================================================
Módulo: metrics.py
Projeto: SORS - Aprendizado Esparso Online de Similaridade Relativa
============================================================================

DESCRIÇÃO:
    Métricas de recuperação e de modelo usadas nos relatórios e na CLI.

MÉTRICAS:
    - model_sparsity: 1 - nnz(M) / d²
    - average_precision / precision_at_k: relevância binária em ordem de ranking
    - RegretTrace / regret_vs_reference: objetivo acumulado contra um modelo de referência

DEPENDÊNCIAS:
    - numpy: médias e vetores de relevância
    - core.exceptions: ArgumentError, EvaluationError
============================================================================
"""

# ============================================================================
# IMPORTAÇÕES
# ============================================================================
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from core.exceptions import ArgumentError, EvaluationError
from core.model import SimilarityModel, Triplet, hinge_loss


# ============================================================================
# MÉTRICAS DO MODELO
# ============================================================================
def model_sparsity(m: SimilarityModel) -> float:
    """
    Fração de entradas exatamente zero: 1 - ‖M‖₀ / d².

    Example:
        >>> model_sparsity(SimilarityModel.from_dense([[1, 0], [0, 0]]))
        0.75
    """
    return 1.0 - m.nnz / (m.dim * m.dim)


# ============================================================================
# MÉTRICAS DE RECUPERAÇÃO
# ============================================================================
def average_precision(ranking: Sequence) -> float:
    """
    Average precision de uma lista de relevância em ordem de ranking.

    AP = (1/R) Σ_{p relevante} (relevantes no top p) / p

    Args:
        ranking: Flags de relevância (não zero = relevante), primeiro item = posição 1

    Returns:
        float: AP em [0, 1]

    Raises:
        EvaluationError: Se não houver nenhum item relevante

    Example:
        >>> average_precision([1, 0, 1])
        0.8333333333333333
    """
    r = np.asarray(ranking) != 0
    total_relevantes = int(r.sum())
    if total_relevantes == 0:
        raise EvaluationError("average_precision sem nenhum item relevante")
    posicoes = np.flatnonzero(r)
    acertos = np.cumsum(r)[posicoes]
    # cumsum acumula em ordem, como a definição item a item
    return float(np.cumsum(acertos / (posicoes + 1))[-1] / total_relevantes)


def precision_at_k(ranking: Sequence, k: int) -> float:
    """
    Precisão no top-k. O denominador é sempre k, mesmo com menos de k itens.

    Raises:
        ArgumentError: Se k < 1

    Example:
        >>> precision_at_k([1, 0, 1, 0], 2)
        0.5
    """
    if k < 1:
        raise ArgumentError(f"k deve ser >= 1 (recebido {k})")
    r = np.asarray(ranking)[:k] != 0
    return int(r.sum()) / k


# ============================================================================
# REGRET
# ============================================================================
@dataclass(frozen=True)
class RegretTrace:
    """
    Objetivo por passo ℓ_t(M_t) + λ r(M_t) de uma execução e, opcionalmente,
    o objetivo total de um modelo de referência fixo na mesma sequência.
    """
    objectives: tuple[float, ...]
    reference_objective: float | None = None

    @classmethod
    def from_records(cls, records: Iterable, reference_objective: float | None = None) -> RegretTrace:
        """Monta o traço a partir dos StepRecord devolvidos por learners.run()."""
        return cls(tuple(r.objective for r in records), reference_objective)

    def __len__(self) -> int:
        return len(self.objectives)

    @property
    def total(self) -> float:
        return math.fsum(self.objectives)


def regret_vs_reference(trace: RegretTrace) -> float:
    """
    Regret empírico: Σ(ℓ_t(M_t) + λ r(M_t)) - objetivo da referência.

    Raises:
        ArgumentError: Se o traço não tiver objetivo de referência
    """
    if trace.reference_objective is None:
        raise ArgumentError("RegretTrace sem reference_objective")
    return trace.total - trace.reference_objective


def reference_objective(model: SimilarityModel, stream: Iterable[Triplet], lam: float = 0.0,
                        off_diagonal: bool = False) -> float:
    """
    Objetivo total de um modelo fixo: Σ_t ℓ_t(M) + λ r(M).

    Args:
        model (SimilarityModel): Modelo de referência (ex: M* plantado)
        stream (Iterable[Triplet]): A mesma sequência usada no treino
        lam (float): λ do aprendiz comparado
        off_diagonal (bool): Usa ‖M‖₁,off em vez de ‖M‖₁
    """
    regularizacao = lam * model.l1_norm(off_diagonal=off_diagonal)
    return math.fsum(hinge_loss(model, t) + regularizacao for t in stream)
