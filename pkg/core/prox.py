"""
============================================================================
Módulo: prox.py
Projeto: SORS - Aprendizado Esparso Online de Similaridade Relativa
============================================================================

DESCRIÇÃO:
    Operadores proximais usados pelos algoritmos SORS e AdaSORS e o
    acumulador de gradientes (H, δ) do AdaSORS.

OPERADORES:
    - prox_l1:            soft-threshold de todas as entradas (norma L1)
    - prox_l1_offdiag:    soft-threshold só fora da diagonal (L1 off-diagonal)
    - prox_l1_adaptive:   limiar por entrada λη / (δ + H_ij), com ou sem diagonal
    - accumulate:         H'_ij = sqrt(H_ij² + G_ij²) no suporte de G

ARQUITETURA:
    - Todos os operadores trabalham apenas sobre o suporte armazenado de M:
      o prox de um zero não armazenado é zero, então o resultado é exato e o
      custo é O(nnz) em vez de O(d²)
    - Entradas que zeram no limiar são removidas do armazenamento na hora
    - Funções puras: entradas imutáveis, saídas novas

DEPENDÊNCIAS:
    - numpy: soft-threshold vetorizado
    - scipy.sparse: matrizes CSR de M e H
============================================================================
"""

# ============================================================================
# IMPORTAÇÕES
# ============================================================================
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from core.exceptions import ArgumentError, DimensionError
from core.model import SimilarityModel, RankOneGradient


# ============================================================================
# ACUMULADOR DO ADASORS
# ============================================================================
@dataclass(frozen=True, eq=False)
class Accumulator:
    """
    Acumulador H (raiz da soma dos gradientes ao quadrado) e suavização δ.

    Σ = δ + H fica implícito: coordenadas nunca tocadas valem δ.

    Attributes:
        dim (int): Dimensão do modelo associado
        h (sp.csr_matrix): Entradas positivas de H
        delta (float): Parâmetro de suavização δ (> 0)
    """
    dim: int
    h: sp.csr_matrix
    delta: float

    def __post_init__(self):
        if self.delta <= 0:
            raise ArgumentError(f"delta deve ser positivo (recebido {self.delta})")
        if self.h.shape != (self.dim, self.dim):
            raise DimensionError(f"H com formato {self.h.shape}, esperado ({self.dim}, {self.dim})")
        if np.any(self.h.data <= 0):
            raise ArgumentError("H só pode armazenar valores positivos")

    @classmethod
    def empty(cls, dim: int, delta: float) -> Accumulator:
        return cls(dim, sp.csr_matrix((dim, dim), dtype=np.float64), float(delta))

    @property
    def nnz(self) -> int:
        return int(self.h.nnz)

    def h_at(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """Valores de H nas coordenadas pedidas (zero onde H não armazena nada)."""
        if len(rows) == 0 or self.h.nnz == 0:
            return np.zeros(len(rows))
        return np.asarray(self.h[rows, cols], dtype=np.float64).ravel()

    def sigma_at(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """Σ_ij = δ + H_ij nas coordenadas pedidas."""
        return self.delta + self.h_at(rows, cols)


# ============================================================================
# FUNÇÕES AUXILIARES
# ============================================================================
def soft_threshold(values: np.ndarray, tau) -> np.ndarray:
    """
    Soft-threshold elemento a elemento: sign(v) · max(|v| - τ, 0).

    τ pode ser escalar ou um array do mesmo tamanho de values.

    Example:
        >>> soft_threshold(np.array([2.0, -0.5, 0.3]), 0.4)
        array([ 1.6, -0.1,  0. ])
    """
    return np.sign(values) * np.maximum(np.abs(values) - tau, 0.0)


def coordinates(matrix: sp.csr_matrix) -> tuple[np.ndarray, np.ndarray]:
    """Linhas e colunas das entradas armazenadas, na ordem de matrix.data."""
    linhas = np.repeat(np.arange(matrix.shape[0]), np.diff(matrix.indptr))
    return linhas, matrix.indices


def _com_novos_dados(model: SimilarityModel, dados: np.ndarray) -> SimilarityModel:
    """Reaproveita a estrutura CSR de M com novos valores e remove os zeros."""
    m = model.matrix
    novo = sp.csr_matrix((dados, m.indices.copy(), m.indptr.copy()), shape=m.shape)
    novo.eliminate_zeros()
    return SimilarityModel(model.dim, novo)


def _checar_tau(tau: float, nome: str = "tau") -> None:
    if tau < 0:
        raise ArgumentError(f"{nome} deve ser não negativo (recebido {tau})")


# ============================================================================
# OPERADORES PROXIMAIS
# ============================================================================
def prox_l1(model: SimilarityModel, tau: float) -> SimilarityModel:
    """
    Prox da norma L1: cada entrada m vira sign(m) · max(|m| - τ, 0).

    Args:
        model (SimilarityModel): Matriz M (normalmente M - ηG)
        tau (float): Limiar τ = ηλ (>= 0)

    Returns:
        SimilarityModel: Novo modelo sem as entradas zeradas

    Raises:
        ArgumentError: Se tau for negativo
    """
    _checar_tau(tau)
    return _com_novos_dados(model, soft_threshold(model.matrix.data, tau))


def prox_l1_offdiag(model: SimilarityModel, tau: float) -> SimilarityModel:
    """
    Prox da norma L1 fora da diagonal.

    Entradas fora da diagonal sofrem soft-threshold por τ; a diagonal
    é devolvida bit a bit idêntica.
    """
    _checar_tau(tau)
    linhas, colunas = coordinates(model.matrix)
    dados = model.matrix.data
    diagonal = linhas == colunas
    novos = np.where(diagonal, dados, soft_threshold(dados, tau))
    return _com_novos_dados(model, novos)


def prox_l1_adaptive(model: SimilarityModel, lambda_eta: float, sigma: Accumulator,
                     off_diagonal: bool = False) -> SimilarityModel:
    """
    Prox adaptativo do AdaSORS: limiar λη / Σ_ij em cada entrada armazenada.

    Args:
        model (SimilarityModel): Matriz M (normalmente M - η G./Σ)
        lambda_eta (float): Produto λη (>= 0)
        sigma (Accumulator): Acumulador com H e δ
        off_diagonal (bool): Se True, a diagonal não é truncada

    Returns:
        SimilarityModel: Novo modelo truncado

    Raises:
        DimensionError: Se sigma.dim for diferente de model.dim
        ArgumentError: Se lambda_eta for negativo
    """
    if sigma.dim != model.dim:
        raise DimensionError(f"Acumulador com dimensão {sigma.dim}, modelo com {model.dim}")
    _checar_tau(lambda_eta, "lambda_eta")

    linhas, colunas = coordinates(model.matrix)
    dados = model.matrix.data
    limiares = lambda_eta / sigma.sigma_at(linhas, colunas)
    novos = soft_threshold(dados, limiares)
    if off_diagonal:
        novos = np.where(linhas == colunas, dados, novos)
    return _com_novos_dados(model, novos)


def accumulate(sigma: Accumulator, g: RankOneGradient) -> Accumulator:
    """
    Atualiza o acumulador: H'_ij = sqrt(H_ij² + G_ij²) no suporte de G.

    Coordenadas fora do suporte de G não mudam. Gradiente vazio devolve
    um acumulador igual ao recebido.

    Example:
        H_ij = 3 e G_ij = 4  ->  H'_ij = 5
    """
    if sigma.dim != g.dim:
        raise DimensionError(f"Acumulador com dimensão {sigma.dim}, gradiente com {g.dim}")
    if g.is_zero:
        return sigma

    grad = g.to_csr()
    linhas, colunas = coordinates(grad)
    antigos = sigma.h_at(linhas, colunas)
    # H nunca decresce
    novos = np.maximum(np.sqrt(antigos * antigos + grad.data * grad.data), antigos)

    # Remove de H as coordenadas do suporte de G (x - x = 0 exato) e insere os novos valores
    padrao = sp.csr_matrix((np.ones_like(grad.data), grad.indices, grad.indptr), shape=grad.shape)
    h_fora = sigma.h - sigma.h.multiply(padrao)
    h_novo = sp.csr_matrix(
        h_fora + sp.csr_matrix((novos, grad.indices, grad.indptr), shape=grad.shape)
    )
    h_novo.eliminate_zeros()
    h_novo.sort_indices()
    return Accumulator(sigma.dim, h_novo, sigma.delta)
