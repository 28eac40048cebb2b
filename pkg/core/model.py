"""
============================================================================
Módulo: model.py
Projeto: SORS - Aprendizado Esparso Online de Similaridade Relativa
============================================================================

DESCRIÇÃO:
    Tipos centrais do domínio e as operações básicas sobre eles:
    similaridade bilinear S_M(x, x') = xᵀ M x', perda hinge sobre trios e
    subgradiente de posto 1.

TIPOS:
    - SparseVector:      vetor esparso imutável (índices 0-based ordenados)
    - Triplet:           trio (âncora, positivo, negativo)
    - SimilarityModel:   matriz M esparsa (CSR) sem zeros armazenados
    - RankOneGradient:   fatores (u, v) com G = u·vᵀ implícito

OBSERVAÇÕES:
    - Todos os valores são float64
    - Os tipos são imutáveis depois de construídos; as operações sempre
      devolvem objetos novos
    - Nenhum zero explícito fica armazenado (vetores, modelo ou gradiente)

DEPENDÊNCIAS:
    - numpy: vetores e produtos internos
    - scipy.sparse: armazenamento CSR da matriz M
============================================================================
"""

# ============================================================================
# IMPORTAÇÕES
# ============================================================================
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np
import scipy.sparse as sp

from core.exceptions import DimensionError, ArgumentError


# ============================================================================
# FUNÇÕES AUXILIARES
# ============================================================================
def _congelar(array: np.ndarray) -> np.ndarray:
    """Marca o array como somente leitura."""
    array.setflags(write=False)
    return array


def _canonica(matriz: sp.spmatrix, dim: int) -> sp.csr_matrix:
    """
    Converte para CSR canônica: cópia própria, índices ordenados,
    duplicatas somadas e zeros explícitos removidos.
    """
    csr = sp.csr_matrix(matriz, dtype=np.float64, copy=True)
    if csr.shape != (dim, dim):
        raise DimensionError(f"Matriz com formato {csr.shape}, esperado ({dim}, {dim})")
    csr.sum_duplicates()
    csr.eliminate_zeros()
    csr.sort_indices()
    return csr


def _checar_dim(esperada: int, recebida: int, contexto: str) -> None:
    if esperada != recebida:
        raise DimensionError(f"{contexto}: dimensão {recebida} diferente de {esperada}")


# ============================================================================
# VETOR ESPARSO
# ============================================================================
@dataclass(frozen=True, eq=False)
class SparseVector:
    """
    Vetor esparso imutável.

    Attributes:
        dim (int): Dimensão do espaço de atributos (> 0)
        indices (np.ndarray): Índices 0-based estritamente crescentes (int64)
        values (np.ndarray): Valores finitos e não nulos (float64)
    """
    dim: int
    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.dim <= 0:
            raise ArgumentError(f"dim deve ser positivo (recebido {self.dim})")

        indices = np.asarray(self.indices, dtype=np.int64).ravel()
        values = np.asarray(self.values, dtype=np.float64).ravel()
        if indices.shape != values.shape:
            raise ArgumentError("indices e values devem ter o mesmo tamanho")
        if indices.size:
            if indices[0] < 0 or indices[-1] >= self.dim:
                raise DimensionError(f"Índice fora do intervalo [0, {self.dim})")
            if np.any(np.diff(indices) <= 0):
                raise ArgumentError("Índices devem ser estritamente crescentes")
            if not np.all(np.isfinite(values)):
                raise ArgumentError("Valores devem ser finitos")
            if np.any(values == 0):
                raise ArgumentError("Zeros explícitos não podem ser armazenados")

        # frozen=True: atribuição via object.__setattr__
        object.__setattr__(self, "indices", _congelar(indices.copy()))
        object.__setattr__(self, "values", _congelar(values.copy()))

    # ------------------------------------------------------------------
    # Construtores
    # ------------------------------------------------------------------
    @classmethod
    def empty(cls, dim: int) -> SparseVector:
        return cls(dim, np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64))

    @classmethod
    def from_pairs(cls, dim: int, pairs: Iterable[tuple[int, float]]) -> SparseVector:
        """
        Cria o vetor a partir de pares (índice, valor). Os pares são ordenados
        por índice; valores exatamente zero são descartados.

        Example:
            >>> SparseVector.from_pairs(4, [(2, 1.5), (0, -1.0)]).to_dense()
            array([-1. ,  0. ,  1.5,  0. ])
        """
        ordenados = sorted((int(i), float(v)) for i, v in pairs if v != 0)
        if not ordenados:
            return cls.empty(dim)
        indices, values = zip(*ordenados)
        return cls(dim, np.array(indices), np.array(values))

    @classmethod
    def from_dense(cls, array: Iterable[float]) -> SparseVector:
        denso = np.asarray(array, dtype=np.float64).ravel()
        (indices,) = np.nonzero(denso)
        return cls(denso.size, indices, denso[indices])

    # ------------------------------------------------------------------
    # Propriedades e conversões
    # ------------------------------------------------------------------
    @property
    def nnz(self) -> int:
        return int(self.indices.size)

    def to_dense(self) -> np.ndarray:
        denso = np.zeros(self.dim)
        denso[self.indices] = self.values
        return denso

    def to_csr(self) -> sp.csr_matrix:
        """Vetor linha 1 × dim em formato CSR."""
        return sp.csr_matrix(
            (self.values, self.indices, np.array([0, self.nnz])), shape=(1, self.dim)
        )

    def squared_norm(self) -> float:
        return float(self.values @ self.values)

    def scale(self, alpha: float) -> SparseVector:
        if alpha == 0:
            return SparseVector.empty(self.dim)
        novos = self.values * alpha
        mantidos = novos != 0
        return SparseVector(self.dim, self.indices[mantidos], novos[mantidos])

    def subtract(self, other: SparseVector) -> SparseVector:
        """
        Diferença self - other por fusão dos suportes.

        Cancelamentos exatos (a - a = 0) saem do suporte resultante.
        """
        _checar_dim(self.dim, other.dim, "subtract")
        indices = np.union1d(self.indices, other.indices)
        valores = np.zeros(indices.size)
        valores[np.searchsorted(indices, self.indices)] += self.values
        valores[np.searchsorted(indices, other.indices)] -= other.values
        mantidos = valores != 0
        return SparseVector(self.dim, indices[mantidos], valores[mantidos])

    def dot(self, other: SparseVector) -> float:
        _checar_dim(self.dim, other.dim, "dot")
        comuns, ia, ib = np.intersect1d(self.indices, other.indices,
                                        assume_unique=True, return_indices=True)
        return float(self.values[ia] @ other.values[ib])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SparseVector):
            return NotImplemented
        return (self.dim == other.dim
                and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.values, other.values))

    __hash__ = None

    def __repr__(self) -> str:
        pares = ", ".join(f"{i}:{v!r}" for i, v in zip(self.indices.tolist(), self.values.tolist()))
        return f"SparseVector(dim={self.dim}, {{{pares}}})"


# ============================================================================
# TRIO DE TREINO
# ============================================================================
@dataclass(frozen=True)
class Triplet:
    """Trio (x, x⁺, x⁻): x⁺ é mais relevante para x do que x⁻."""
    anchor: SparseVector
    positive: SparseVector
    negative: SparseVector

    def __post_init__(self):
        _checar_dim(self.anchor.dim, self.positive.dim, "Triplet (positivo)")
        _checar_dim(self.anchor.dim, self.negative.dim, "Triplet (negativo)")

    @property
    def dim(self) -> int:
        return self.anchor.dim


# ============================================================================
# MODELO DE SIMILARIDADE
# ============================================================================
@dataclass(frozen=True, eq=False)
class SimilarityModel:
    """
    Matriz M (dim × dim) da similaridade bilinear, armazenada em CSR.

    Invariantes:
        - Nenhuma entrada armazenada é exatamente zero
        - Todas as entradas são finitas
        - nnz(M) <= dim²
    """
    dim: int
    matrix: sp.csr_matrix

    def __post_init__(self):
        if self.dim <= 0:
            raise ArgumentError(f"dim deve ser positivo (recebido {self.dim})")
        if self.matrix.shape != (self.dim, self.dim):
            raise DimensionError(
                f"Matriz com formato {self.matrix.shape}, esperado ({self.dim}, {self.dim})"
            )
        dados = self.matrix.data
        if np.any(dados == 0):
            raise ArgumentError("O modelo não pode armazenar zeros explícitos")
        if not np.all(np.isfinite(dados)):
            raise ArgumentError("O modelo contém valores não finitos")

    # ------------------------------------------------------------------
    # Construtores
    # ------------------------------------------------------------------
    @classmethod
    def from_matrix(cls, matrix: sp.spmatrix | np.ndarray, dim: int | None = None) -> SimilarityModel:
        """Cria o modelo a partir de qualquer matriz (densa ou esparsa), sem zeros."""
        dim = matrix.shape[0] if dim is None else dim
        return cls(dim, _canonica(matrix, dim))

    @classmethod
    def identity(cls, dim: int) -> SimilarityModel:
        if dim <= 0:
            raise ArgumentError(f"dim deve ser positivo (recebido {dim})")
        return cls(dim, sp.identity(dim, dtype=np.float64, format="csr"))

    @classmethod
    def zeros(cls, dim: int) -> SimilarityModel:
        if dim <= 0:
            raise ArgumentError(f"dim deve ser positivo (recebido {dim})")
        return cls(dim, sp.csr_matrix((dim, dim), dtype=np.float64))

    @classmethod
    def from_dense(cls, array) -> SimilarityModel:
        denso = np.asarray(array, dtype=np.float64)
        if denso.ndim != 2 or denso.shape[0] != denso.shape[1]:
            raise DimensionError(f"Matriz densa deve ser quadrada (recebido {denso.shape})")
        return cls.from_matrix(sp.csr_matrix(denso))

    @classmethod
    def from_entries(cls, dim: int, entries: dict[tuple[int, int], float]) -> SimilarityModel:
        """
        Cria o modelo a partir de um mapa (linha, coluna) -> valor.

        Raises:
            DimensionError: Se algum índice estiver fora de [0, dim)
        """
        if dim <= 0:
            raise ArgumentError(f"dim deve ser positivo (recebido {dim})")
        if not entries:
            return cls.zeros(dim)
        linhas, colunas = (np.array(eixo, dtype=np.int64) for eixo in zip(*entries.keys()))
        if linhas.min() < 0 or colunas.min() < 0 or linhas.max() >= dim or colunas.max() >= dim:
            raise DimensionError(f"Entrada fora do intervalo [0, {dim})")
        valores = np.fromiter(entries.values(), dtype=np.float64, count=len(entries))
        return cls.from_matrix(sp.coo_matrix((valores, (linhas, colunas)), shape=(dim, dim)), dim)

    # ------------------------------------------------------------------
    # Consultas
    # ------------------------------------------------------------------
    @property
    def nnz(self) -> int:
        return int(self.matrix.nnz)

    def get(self, row: int, col: int) -> float:
        return float(self.matrix[row, col])

    def entries(self) -> Iterator[tuple[int, int, float]]:
        """Itera (linha, coluna, valor) em ordem de linha e depois coluna."""
        coo = self.matrix.tocoo()
        yield from zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist())

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def diagonal_nnz(self) -> int:
        return int(np.count_nonzero(self.matrix.diagonal()))

    def l1_norm(self, off_diagonal: bool = False) -> float:
        """‖M‖₁ ou, com off_diagonal=True, ‖M‖₁,off (soma fora da diagonal)."""
        total = float(np.abs(self.matrix.data).sum())
        if off_diagonal:
            total -= float(np.abs(self.matrix.diagonal()).sum())
        return total

    def scaled(self, factor: float) -> SimilarityModel:
        return SimilarityModel.from_matrix(self.matrix * factor, self.dim)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SimilarityModel):
            return NotImplemented
        return (self.dim == other.dim
                and np.array_equal(self.matrix.indptr, other.matrix.indptr)
                and np.array_equal(self.matrix.indices, other.matrix.indices)
                and np.array_equal(self.matrix.data, other.matrix.data))

    __hash__ = None

    def __repr__(self) -> str:
        return f"SimilarityModel(dim={self.dim}, nnz={self.nnz})"


# ============================================================================
# GRADIENTE DE POSTO 1
# ============================================================================
@dataclass(frozen=True)
class RankOneGradient:
    """
    Subgradiente G = left · rightᵀ da perda hinge.

    left = -x e right = x⁺ - x⁻ quando a perda é positiva; ambos vazios
    caso contrário (G = 0).
    """
    left: SparseVector
    right: SparseVector
    dim: int

    def __post_init__(self):
        _checar_dim(self.dim, self.left.dim, "RankOneGradient (left)")
        _checar_dim(self.dim, self.right.dim, "RankOneGradient (right)")

    @classmethod
    def zero(cls, dim: int) -> RankOneGradient:
        return cls(SparseVector.empty(dim), SparseVector.empty(dim), dim)

    @property
    def is_zero(self) -> bool:
        return self.left.nnz == 0 or self.right.nnz == 0

    @property
    def nnz(self) -> int:
        return self.left.nnz * self.right.nnz

    def squared_frobenius(self) -> float:
        """‖u vᵀ‖²_F = ‖u‖² · ‖v‖²."""
        return self.left.squared_norm() * self.right.squared_norm()

    def to_csr(self) -> sp.csr_matrix:
        """Produto externo esparso, já em ordem canônica (linha, coluna)."""
        if self.is_zero:
            return sp.csr_matrix((self.dim, self.dim), dtype=np.float64)
        linhas = np.repeat(self.left.indices, self.right.nnz)
        colunas = np.tile(self.right.indices, self.left.nnz)
        valores = np.outer(self.left.values, self.right.values).ravel()
        g = sp.csr_matrix((valores, (linhas, colunas)), shape=(self.dim, self.dim))
        # underflow do produto pode gerar zero exato
        g.eliminate_zeros()
        return g

    def to_dense(self) -> np.ndarray:
        return np.outer(self.left.to_dense(), self.right.to_dense())


# ============================================================================
# OPERAÇÕES DO MODELO
# ============================================================================
def left_product(model: SimilarityModel, x: SparseVector) -> np.ndarray:
    """
    Calcula xᵀ M como vetor denso de tamanho dim.

    Percorre apenas as linhas de M indexadas pelo suporte de x.
    """
    _checar_dim(model.dim, x.dim, "left_product")
    if x.nnz == 0:
        return np.zeros(model.dim)
    return (x.to_csr() @ model.matrix).toarray().ravel()


def score(model: SimilarityModel, x: SparseVector, y: SparseVector) -> float:
    """
    Similaridade bilinear S_M(x, y) = xᵀ M y.

    Args:
        model (SimilarityModel): Modelo M
        x (SparseVector): Vetor da esquerda
        y (SparseVector): Vetor da direita

    Returns:
        float: Σ_ij M_ij x_i y_j

    Raises:
        DimensionError: Se x.dim, y.dim e model.dim não coincidirem

    Example:
        >>> m = SimilarityModel.identity(2)
        >>> score(m, SparseVector.from_dense([1, 2]), SparseVector.from_dense([1, 2]))
        5.0
    """
    _checar_dim(model.dim, y.dim, "score")
    linha = left_product(model, x)
    return float(linha[y.indices] @ y.values)


def _scores_do_trio(model: SimilarityModel, t: Triplet) -> tuple[float, float]:
    _checar_dim(model.dim, t.dim, "Triplet")
    linha = left_product(model, t.anchor)
    s_pos = float(linha[t.positive.indices] @ t.positive.values)
    s_neg = float(linha[t.negative.indices] @ t.negative.values)
    return s_pos, s_neg


def hinge_loss(model: SimilarityModel, t: Triplet) -> float:
    """
    Perda hinge do trio: [1 - S_M(x, x⁺) + S_M(x, x⁻)]₊.

    Raises:
        DimensionError: Se o trio e o modelo tiverem dimensões diferentes
    """
    s_pos, s_neg = _scores_do_trio(model, t)
    return max(0.0, 1.0 - s_pos + s_neg)


def subgradient(model: SimilarityModel, t: Triplet, loss: float | None = None) -> RankOneGradient:
    """
    Subgradiente da perda hinge em relação a M.

    G = -x (x⁺ - x⁻)ᵀ se a perda for positiva; G = 0 caso contrário
    (inclusive no ponto de quebra, perda exatamente zero).

    Args:
        model (SimilarityModel): Modelo atual M_t
        t (Triplet): Trio da rodada
        loss (float, optional): Perda já calculada para (model, t), evita
            recalcular os scores

    Returns:
        RankOneGradient: Fatores (left, right) do gradiente
    """
    if loss is None:
        loss = hinge_loss(model, t)
    else:
        _checar_dim(model.dim, t.dim, "Triplet")
    if loss <= 0:
        return RankOneGradient.zero(model.dim)
    return RankOneGradient(t.anchor.scale(-1.0), t.positive.subtract(t.negative), model.dim)
