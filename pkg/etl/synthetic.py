"""
============================================================================
Módulo: synthetic.py
Projeto: SORS - Aprendizado Esparso Online de Similaridade Relativa
============================================================================

DESCRIÇÃO:
    Geradores de dados sintéticos para testes de fumaça e verificações
    empíricas (esparsidade, regret, MAP).

GERADORES:
    - make_onehot_dataset:  classes ortogonais (MAP = 1 com M = I)
    - make_sparse_dataset:  dados esparsos de alta dimensão com assinatura
                            de atributos por classe
    - make_planted_stream:  sequência separável com M* plantado de margem 1

DEPENDÊNCIAS:
    - numpy: gerador de números aleatórios
============================================================================
"""

# ============================================================================
# IMPORTAÇÕES
# ============================================================================
from __future__ import annotations

import numpy as np

from config.settings import DEFAULT_SEED, setup_logging
from core.exceptions import ArgumentError
from core.model import SparseVector, Triplet, SimilarityModel
from etl.etl import LabeledDataset

logger = setup_logging("etl_logger", "etl.log")


def make_onehot_dataset(n_classes: int, per_class: int, dim: int | None = None) -> LabeledDataset:
    """
    Classes ortogonais: todo item da classe c tem apenas o atributo c = 1.

    Labels vão de 1 a n_classes; os itens são intercalados por classe.

    Example:
        >>> ds = make_onehot_dataset(3, 2)
        >>> ds.labels.tolist(), ds.dim
        ([1, 2, 3, 1, 2, 3], 3)
    """
    dim = n_classes if dim is None else dim
    if n_classes < 1 or per_class < 1 or dim < n_classes:
        raise ArgumentError("make_onehot_dataset: n_classes, per_class >= 1 e dim >= n_classes")
    items = []
    for _ in range(per_class):
        for c in range(n_classes):
            items.append((c + 1, SparseVector(dim, np.array([c]), np.array([1.0]))))
    return LabeledDataset(dim, tuple(items))


def make_sparse_dataset(dim: int, n_classes: int, n_items: int, density: float,
                        seed: int = DEFAULT_SEED) -> LabeledDataset:
    """
    Dados esparsos com assinatura por classe.

    Cada classe recebe um conjunto fixo de atributos de assinatura. Cada item
    tem cerca de density · dim atributos não nulos: metade sorteada da
    assinatura da própria classe e metade sorteada de todo o espaço (ruído).
    Valores uniformes em [0.1, 1.0).

    Args:
        dim (int): Dimensão d
        n_classes (int): Número de classes
        n_items (int): Número total de itens (classe = posição % n_classes)
        density (float): Fração de atributos não nulos por item, em (0, 1]
        seed (int): Semente do gerador

    Returns:
        LabeledDataset: Labels de 1 a n_classes
    """
    if not 0 < density <= 1:
        raise ArgumentError(f"density deve estar em (0, 1] (recebido {density})")
    rng = np.random.default_rng(seed)
    nnz_item = max(2, int(round(density * dim)))
    tamanho_assinatura = min(dim, 4 * nnz_item)
    assinaturas = [rng.choice(dim, size=tamanho_assinatura, replace=False) for _ in range(n_classes)]

    items = []
    for posicao in range(n_items):
        c = posicao % n_classes
        n_sinal = nnz_item // 2
        sinal = rng.choice(assinaturas[c], size=n_sinal, replace=False)
        ruido = rng.choice(dim, size=nnz_item - n_sinal, replace=False)
        indices = np.unique(np.concatenate([sinal, ruido]))
        valores = rng.uniform(0.1, 1.0, size=indices.size)
        items.append((c + 1, SparseVector(dim, indices, valores)))

    logger.info(
        f"Dataset sintético esparso: dim={dim}, {n_classes} classes, {n_items} itens, "
        f"~{nnz_item} atributos por item."
    )
    return LabeledDataset(dim, tuple(items))


def _item_plantado(rng: np.random.Generator, classe: int, n_classes: int,
                   n_ruido: int, dim: int) -> SparseVector:
    # Atributo da classe = 0.5; dois atributos de ruído compartilhados entre classes
    ruido = np.sort(rng.choice(n_ruido, size=2, replace=False)) + n_classes
    indices = np.concatenate([[classe], ruido])
    valores = np.concatenate([[0.5], rng.uniform(0.05, 0.2, size=2)])
    return SparseVector(dim, indices, valores)


def make_planted_stream(n_classes: int = 3, n_steps: int = 10_000, seed: int = DEFAULT_SEED,
                        n_noise: int = 20) -> tuple[list[Triplet], SimilarityModel]:
    """
    Sequência de trios separável por um modelo plantado M*.

    Cada item tem o atributo da sua classe valendo 0.5 e dois atributos de
    ruído (compartilhados por todas as classes) com valores pequenos.
    M* = 4 · diag nos atributos de classe e zero no resto, então
    S*(x, x⁺) = 1 e S*(x, x⁻) = 0: perda zero em todo trio, margem 1.

    Returns:
        tuple: (lista de trios, modelo plantado M*)
    """
    rng = np.random.default_rng(seed)
    dim = n_classes + n_noise
    stream = []
    for _ in range(n_steps):
        c = int(rng.integers(n_classes))
        outra = int(rng.integers(n_classes - 1))
        outra = outra + 1 if outra >= c else outra
        stream.append(Triplet(
            _item_plantado(rng, c, n_classes, n_noise, dim),
            _item_plantado(rng, c, n_classes, n_noise, dim),
            _item_plantado(rng, outra, n_classes, n_noise, dim),
        ))
    plantado = SimilarityModel.from_entries(dim, {(c, c): 4.0 for c in range(n_classes)})
    return stream, plantado
