"""
============================================================================
Módulo: serialization.py
Projeto: SORS - Aprendizado Esparso Online de Similaridade Relativa
============================================================================

DESCRIÇÃO:
    Formato texto do modelo de similaridade (model.txt).

FORMATO:
    - Cabeçalho: uma linha "dim nnz"
    - Corpo: uma linha "row col value" por entrada armazenada
      (row/col 0-based, value na menor representação decimal que
      reconstrói o float exatamente, via repr)
    - Entradas em ordem de linha e depois coluna, o que torna a saída
      determinística para o mesmo modelo

VALIDAÇÕES NA LEITURA:
    - Valor zero, não numérico ou não finito é rejeitado
    - Índices fora de [0, dim) são rejeitados
    - Entradas duplicadas são rejeitadas
    - Arquivo truncado (menos entradas que nnz) gera ParseError com o
      deslocamento em bytes do ponto onde o conteúdo terminou
============================================================================
"""

# ============================================================================
# IMPORTAÇÕES
# ============================================================================
import math
from pathlib import Path

from config.settings import setup_logging
from core.exceptions import ParseError
from core.model import SimilarityModel

logger = setup_logging("core_logger", "core.log")


# ============================================================================
# ESCRITA
# ============================================================================
def dumps_model(model: SimilarityModel) -> str:
    """
    Serializa o modelo no formato texto.

    Example:
        >>> print(dumps_model(SimilarityModel.identity(2)), end="")
        2 2
        0 0 1.0
        1 1 1.0
    """
    linhas = [f"{model.dim} {model.nnz}"]
    linhas.extend(f"{i} {j} {v!r}" for i, j, v in model.entries())
    return "\n".join(linhas) + "\n"


def save_model(model: SimilarityModel, path) -> Path:
    """Grava o modelo em disco e retorna o caminho gravado."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_model(model), encoding="utf-8")
    logger.info(f"Modelo salvo em '{path}' (dim={model.dim}, nnz={model.nnz}).")
    return path


# ============================================================================
# LEITURA
# ============================================================================
def _inteiro(token: str, offset: int, nome: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise ParseError(f"{nome} não é inteiro: '{token}'", offset=offset) from None


def loads_model(data: bytes | str) -> SimilarityModel:
    """
    Lê um modelo a partir do conteúdo do arquivo.

    Args:
        data (bytes | str): Conteúdo completo do arquivo

    Returns:
        SimilarityModel: Modelo reconstruído

    Raises:
        ParseError: Cabeçalho inválido, entrada malformada ou arquivo truncado
            (a mensagem traz o deslocamento em bytes)
    """
    if isinstance(data, str):
        data = data.encode("utf-8")

    # Quebra em linhas preservando o deslocamento de início de cada uma
    linhas = []
    inicio = 0
    for bruta in data.splitlines(keepends=True):
        texto = bruta.decode("utf-8", errors="replace").strip()
        if texto:
            linhas.append((inicio, texto))
        inicio += len(bruta)

    if not linhas:
        raise ParseError("arquivo de modelo vazio", offset=0)

    offset, cabecalho = linhas[0]
    partes = cabecalho.split()
    if len(partes) != 2:
        raise ParseError(f"cabeçalho deve ser 'dim nnz', recebido '{cabecalho}'", offset=offset)
    dim = _inteiro(partes[0], offset, "dim")
    nnz = _inteiro(partes[1], offset, "nnz")
    if dim <= 0:
        raise ParseError(f"dim deve ser positivo (recebido {dim})", offset=offset)
    if not 0 <= nnz <= dim * dim:
        raise ParseError(f"nnz fora do intervalo [0, {dim * dim}] (recebido {nnz})", offset=offset)

    corpo = linhas[1:]
    if len(corpo) < nnz:
        raise ParseError(
            f"arquivo truncado: {len(corpo)} de {nnz} entradas encontradas", offset=len(data)
        )
    if len(corpo) > nnz:
        raise ParseError(f"entradas além das {nnz} declaradas", offset=corpo[nnz][0])

    entradas = {}
    for offset, texto in corpo:
        partes = texto.split()
        if len(partes) != 3:
            raise ParseError(f"entrada deve ser 'row col value', recebido '{texto}'", offset=offset)
        i = _inteiro(partes[0], offset, "row")
        j = _inteiro(partes[1], offset, "col")
        if not (0 <= i < dim and 0 <= j < dim):
            raise ParseError(f"índice ({i}, {j}) fora de [0, {dim})", offset=offset)
        try:
            valor = float(partes[2])
        except ValueError:
            raise ParseError(f"valor não numérico: '{partes[2]}'", offset=offset) from None
        if valor == 0 or not math.isfinite(valor):
            raise ParseError(f"valor inválido {partes[2]} (zero ou não finito)", offset=offset)
        if (i, j) in entradas:
            raise ParseError(f"entrada ({i}, {j}) duplicada", offset=offset)
        entradas[(i, j)] = valor

    return SimilarityModel.from_entries(dim, entradas)


def load_model(path) -> SimilarityModel:
    """Lê o modelo gravado em path."""
    path = Path(path)
    model = loads_model(path.read_bytes())
    logger.info(f"Modelo carregado de '{path}' (dim={model.dim}, nnz={model.nnz}).")
    return model
