"""
============================================================================
Módulo: etl.py
Projeto: SORS - Aprendizado Esparso Online de Similaridade Relativa
============================================================================

DESCRIÇÃO:
    Módulo de serviço responsável pela ingestão de dados (Extract,
    Transform, Load) do protocolo experimental: lê arquivos LIBSVM, divide
    cada classe em treino/teste e gera os trios de treino.

ARQUITETURA:
    - parse_libsvm() transforma linhas de texto em um LabeledDataset
    - split() separa cada classe em 70% treino / 30% teste (semente fixa)
    - TripletSampler sorteia (x, x⁺, x⁻) do conjunto de treino, com reposição

FORMATO LIBSVM:
    <label> <idx>:<val> <idx>:<val> ...
    - idx começa em 1 no arquivo e vira 0-based na memória
    - linhas em branco e comentários (#) são ignorados
    - arquivos terminados em .gz são descompactados na leitura

DEPENDÊNCIAS:
    - numpy: gerador de números aleatórios e vetores
    - pandas: indexação das classes (groupby)
    - scipy.sparse: matriz de atributos para avaliação em bloco
============================================================================
"""

# ============================================================================
# IMPORTAÇÕES
# ============================================================================
from __future__ import annotations

import gzip
import hashlib
import math
import zlib
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np
import pandas as pd
import scipy.sparse as sp

from config.settings import DEFAULT_SEED, MAX_DIM, setup_logging
from core.exceptions import ParseError, SamplerError, DimensionError, ArgumentError
from core.model import SparseVector, Triplet

# Instancia o logger globalmente
logger = setup_logging("etl_logger", "etl.log")


# ============================================================================
# TIPOS DO MÓDULO
# ============================================================================
@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """
    Conjunto de itens rotulados com atributos esparsos.

    Attributes:
        dim (int): Dimensão global dos atributos
        items (tuple): Pares (label, SparseVector) na ordem do arquivo
    """
    dim: int
    items: tuple[tuple[int, SparseVector], ...]

    def __post_init__(self):
        object.__setattr__(self, "items", tuple(self.items))
        for label, features in self.items:
            if features.dim != self.dim:
                raise DimensionError(f"Item com dimensão {features.dim}, dataset com {self.dim}")

    def __len__(self) -> int:
        return len(self.items)

    @cached_property
    def labels(self) -> np.ndarray:
        return np.array([label for label, _ in self.items], dtype=np.int64)

    @cached_property
    def class_index(self) -> dict[int, tuple[int, ...]]:
        """Mapa label -> posições dos itens (ordem crescente), labels ordenados."""
        if not self.items:
            return {}
        grupos = pd.Series(self.labels).groupby(self.labels).indices
        return {int(label): tuple(int(p) for p in grupos[label]) for label in sorted(grupos)}

    @cached_property
    def matrix(self) -> sp.csr_matrix:
        """Matriz n × dim com uma linha por item."""
        if not self.items:
            return sp.csr_matrix((0, self.dim), dtype=np.float64)
        indptr = np.zeros(len(self.items) + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([f.nnz for _, f in self.items])
        indices = np.concatenate([f.indices for _, f in self.items])
        values = np.concatenate([f.values for _, f in self.items])
        return sp.csr_matrix((values, indices, indptr), shape=(len(self.items), self.dim))

    def features(self, position: int) -> SparseVector:
        return self.items[position][1]

    def subset(self, positions: Iterable[int]) -> LabeledDataset:
        """Novo dataset com os itens das posições dadas (na ordem dada), mesma dim."""
        return LabeledDataset(self.dim, tuple(self.items[p] for p in positions))


@dataclass(frozen=True)
class SplitSpec:
    """Parâmetros da divisão treino/teste por classe."""
    train_fraction: float = 0.7
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ArgumentError(f"train_fraction deve estar em (0, 1) (recebido {self.train_fraction})")


# ============================================================================
# LEITURA E ESCRITA LIBSVM
# ============================================================================
def _rotulo(token: str, numero_linha: int) -> int:
    try:
        valor = float(token)
    except ValueError:
        raise ParseError(f"rótulo não numérico '{token}'", line=numero_linha) from None
    if not valor.is_integer():
        raise ParseError(f"rótulo deve ser inteiro, recebido '{token}'", line=numero_linha)
    return int(valor)


def parse_libsvm(lines: Iterable[str], dim: int | None = None,
                 reject_zeros: bool = False, max_dim: int = MAX_DIM) -> LabeledDataset:
    """
    Lê linhas no formato LIBSVM e monta o LabeledDataset.

    Args:
        lines (Iterable[str]): Linhas de texto (arquivo aberto, lista, etc.)
        dim (int, optional): Dimensão explícita; sem ela, usa o maior índice lido
        reject_zeros (bool): Se True, tokens 'idx:0' geram erro; por padrão
            são descartados
        max_dim (int): Maior índice (e dim) aceito; o padrão vem de SORS_MAX_DIM

    Returns:
        LabeledDataset: Dataset com índices 0-based

    Raises:
        ParseError: Token malformado, índices não crescentes, valor não
            numérico, índice acima do dim explícito ou de max_dim, dim indeterminado
            (a mensagem traz o número da linha)
        ArgumentError: dim explícito fora de 1..max_dim

    Example:
        >>> ds = parse_libsvm(["3 1:0.5 7:1.2"])
        >>> ds.items[0][0], ds.items[0][1].indices.tolist(), ds.dim
        (3, [0, 6], 7)
    """
    if dim is not None and not 0 < dim <= max_dim:
        raise ArgumentError(f"dim deve estar entre 1 e {max_dim} (recebido {dim})")

    registros = []
    maior_indice = 0
    zeros_descartados = 0

    for numero_linha, linha in enumerate(lines, start=1):
        conteudo = linha.split("#", 1)[0].strip()
        if not conteudo:
            continue

        tokens = conteudo.split()
        label = _rotulo(tokens[0], numero_linha)

        pares = []
        anterior = 0
        for token in tokens[1:]:
            idx_texto, sep, val_texto = token.partition(":")
            if not sep or not idx_texto or not val_texto:
                raise ParseError(f"token malformado '{token}'", line=numero_linha)
            if idx_texto == "qid":
                continue
            try:
                idx = int(idx_texto)
            except ValueError:
                raise ParseError(f"índice não inteiro em '{token}'", line=numero_linha) from None
            try:
                valor = float(val_texto)
            except ValueError:
                raise ParseError(f"valor não numérico em '{token}'", line=numero_linha) from None
            if idx < 1:
                raise ParseError(f"índice deve ser >= 1 em '{token}'", line=numero_linha)
            if idx > max_dim:
                raise ParseError(f"índice acima do máximo {max_dim} em '{token}'", line=numero_linha)
            if idx <= anterior:
                raise ParseError(f"índices não crescentes em '{token}'", line=numero_linha)
            if not math.isfinite(valor):
                raise ParseError(f"valor não finito em '{token}'", line=numero_linha)
            anterior = idx
            if valor == 0:
                if reject_zeros:
                    raise ParseError(f"zero explícito em '{token}'", line=numero_linha)
                zeros_descartados += 1
                continue
            pares.append((idx - 1, valor))

        maior_indice = max(maior_indice, anterior)
        registros.append((label, pares, anterior, numero_linha))

    if dim is None:
        if maior_indice == 0:
            raise ParseError("dimensão indeterminada: nenhum atributo lido e dim não informado")
        dim = maior_indice

    items = []
    for label, pares, ultimo, numero_linha in registros:
        # ultimo inclui tokens idx:0 descartados
        if ultimo > dim:
            raise ParseError(f"índice {ultimo} acima do dim={dim}", line=numero_linha)
        indices = np.array([i for i, _ in pares], dtype=np.int64)
        valores = np.array([v for _, v in pares], dtype=np.float64)
        items.append((label, SparseVector(dim, indices, valores)))

    if zeros_descartados:
        logger.info(f"{zeros_descartados} tokens com valor zero descartados.")
    return LabeledDataset(dim, tuple(items))


def load_libsvm(path, dim: int | None = None, reject_zeros: bool = False) -> LabeledDataset:
    """
    Abre um arquivo LIBSVM (texto puro ou .gz) e delega para parse_libsvm().

    Raises:
        FileNotFoundError: Se o arquivo não existir
        ParseError: Conteúdo malformado ou .gz truncado/corrompido
    """
    path = Path(path)
    logger.info(f"Lendo dataset LIBSVM: {path}")
    abrir = gzip.open if path.suffix == ".gz" else open
    try:
        with abrir(path, "rt", encoding="utf-8") as f:
            ds = parse_libsvm(f, dim=dim, reject_zeros=reject_zeros)
    except FileNotFoundError:
        logger.error(f"Arquivo de dataset '{path}' não encontrado.")
        raise
    except UnicodeDecodeError as e:
        raise ParseError(f"arquivo '{path}' não é texto UTF-8: {e.reason}") from e
    except (EOFError, zlib.error, gzip.BadGzipFile) as e:
        raise ParseError(f"arquivo '{path}' compactado inválido: {e}") from e
    logger.info(f"Dataset carregado: {len(ds)} itens, dim={ds.dim}, {len(ds.class_index)} classes.")
    return ds


def serialize_libsvm(ds: LabeledDataset) -> str:
    """
    Escreve o dataset de volta no formato LIBSVM (índices 1-based).

    Os valores usam repr(), então parse_libsvm(serialize_libsvm(ds))
    reconstrói exatamente os mesmos floats.
    """
    linhas = []
    for label, features in ds.items:
        tokens = [str(label)]
        tokens.extend(f"{i + 1}:{v!r}" for i, v in zip(features.indices.tolist(), features.values.tolist()))
        linhas.append(" ".join(tokens))
    return "\n".join(linhas) + ("\n" if linhas else "")


def save_libsvm(ds: LabeledDataset, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize_libsvm(ds), encoding="utf-8")
    logger.info(f"Dataset salvo em '{path}' ({len(ds)} itens).")
    return path


# ============================================================================
# DIVISÃO TREINO / TESTE
# ============================================================================
def split(ds: LabeledDataset, spec: SplitSpec) -> tuple[LabeledDataset, LabeledDataset]:
    """
    Divide cada classe aleatoriamente: ceil(fração · n_c) itens para treino,
    o resto para teste.

    Args:
        ds (LabeledDataset): Dataset completo
        spec (SplitSpec): Fração de treino e semente

    Returns:
        tuple: (treino, teste), cada um com os itens na ordem original do arquivo
            e a mesma dim do dataset completo

    Example:
        10 itens de uma classe com fração 0.7 -> 7 treino, 3 teste;
        classe com um único item -> 1 treino, 0 teste
    """
    rng = np.random.default_rng(spec.seed)
    treino, teste = [], []

    # Classes em ordem de label: a mesma semente sempre gera a mesma divisão
    for label, posicoes in ds.class_index.items():
        embaralhadas = rng.permutation(np.array(posicoes, dtype=np.int64))
        n_treino = math.ceil(spec.train_fraction * len(posicoes) - 1e-9)
        treino.extend(embaralhadas[:n_treino].tolist())
        teste.extend(embaralhadas[n_treino:].tolist())

    treino.sort()
    teste.sort()
    logger.info(
        f"Split (fração={spec.train_fraction}, semente={spec.seed}): "
        f"{len(treino)} treino, {len(teste)} teste."
    )
    return ds.subset(treino), ds.subset(teste)


# ============================================================================
# AMOSTRADOR DE TRIOS
# ============================================================================
class TripletSampler:
    """
    Sorteia trios (x, x⁺, x⁻) do conjunto de treino.

    - x: uniforme entre os itens de classes com pelo menos 2 membros
    - x⁺: uniforme entre os itens da mesma classe, excluindo o próprio x
    - x⁻: uniforme entre todos os itens das outras classes

    Cada sorteio é independente (com reposição). O amostrador é dono do
    seu gerador: não compartilhe a mesma instância entre aprendizes; para
    repetir a mesma sequência crie outra instância com a mesma semente.

    Raises:
        SamplerError: Na construção, se não houver classe com 2 itens ou
            se houver menos de 2 classes
    """

    def __init__(self, source: LabeledDataset, rng_seed: int = DEFAULT_SEED):
        self.source = source
        self.rng_seed = rng_seed
        self._rng = np.random.default_rng(rng_seed)
        self._hash = hashlib.sha256()
        self.count = 0

        classes = source.class_index
        if len(classes) < 2:
            raise SamplerError(f"São necessárias pelo menos 2 classes no treino (encontradas {len(classes)})")

        elegiveis = {label: pos for label, pos in classes.items() if len(pos) >= 2}
        if not elegiveis:
            raise SamplerError("Nenhuma classe com 2 ou mais itens: não existe x⁺ válido")

        singletons = sorted(set(classes) - set(elegiveis))
        if singletons:
            logger.info(f"Classes com um único item não serão âncoras: {singletons}")
        logger.info("x⁺ é sorteado excluindo a própria âncora.")

        # Todas as posições agrupadas por classe; cada classe ocupa um bloco contíguo
        self._ordem = np.concatenate([np.array(pos, dtype=np.int64) for pos in classes.values()])
        self._bloco = {}
        inicio = 0
        for label, pos in classes.items():
            self._bloco[label] = (inicio, inicio + len(pos))
            inicio += len(pos)

        self._ancoras = np.concatenate([np.array(pos, dtype=np.int64) for pos in elegiveis.values()])
        self._labels = source.labels

    @property
    def sequence_hash(self) -> str:
        """SHA-256 das posições (x, x⁺, x⁻) sorteadas até agora."""
        return self._hash.hexdigest()

    def next_positions(self) -> tuple[int, int, int]:
        """Sorteia as posições (âncora, positivo, negativo) no conjunto de treino."""
        ancora = int(self._ancoras[self._rng.integers(self._ancoras.size)])
        inicio, fim = self._bloco[int(self._labels[ancora])]
        n_classe = fim - inicio

        # Positivo: n_classe - 1 opções, pulando a posição da âncora
        mesma_classe = self._ordem[inicio:fim]
        r = int(self._rng.integers(n_classe - 1))
        lugar_ancora = int(np.searchsorted(mesma_classe, ancora))
        positivo = int(mesma_classe[r + 1 if r >= lugar_ancora else r])

        # Negativo: posições fora do bloco da classe da âncora
        r = int(self._rng.integers(self._ordem.size - n_classe))
        negativo = int(self._ordem[r if r < inicio else r + n_classe])

        self._hash.update(np.array([ancora, positivo, negativo], dtype=np.int64).tobytes())
        self.count += 1
        return ancora, positivo, negativo

    def next_triplet(self) -> Triplet:
        a, p, n = self.next_positions()
        return Triplet(self.source.features(a), self.source.features(p), self.source.features(n))

    def stream(self, n: int) -> Iterator[Triplet]:
        """Gera n trios seguidos."""
        for _ in range(n):
            yield self.next_triplet()


def next_triplet(sampler: TripletSampler) -> Triplet:
    """Atalho funcional para sampler.next_triplet()."""
    return sampler.next_triplet()
