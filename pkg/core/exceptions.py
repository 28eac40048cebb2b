"""
============================================================================
Módulo: exceptions.py
Projeto: SORS - Aprendizado Esparso Online de Similaridade Relativa
============================================================================

DESCRIÇÃO:
    Erros de domínio do projeto. Todas as classes derivam de SorsError e
    também de ValueError, então o chamador pode capturar qualquer uma.
    A CLI converte ConfigError em código 2 e os demais SorsError em 1.

DEPENDÊNCIAS:
    - nenhuma (apenas exceções embutidas)
============================================================================
"""


class SorsError(Exception):
    """Erro base do projeto."""


class DimensionError(SorsError, ValueError):
    """Dimensões incompatíveis entre modelo, vetores ou acumulador."""


class ArgumentError(SorsError, ValueError):
    """Argumento fora do domínio (ex: limiar negativo, k = 0)."""


class ConfigError(SorsError, ValueError):
    """Configuração de experimento inválida."""


class SamplerError(SorsError, ValueError):
    """Conjunto de treino não permite gerar trios válidos."""


class EvaluationError(SorsError, ValueError):
    """Avaliação impossível (ex: nenhuma consulta com item relevante)."""


class ParseError(SorsError, ValueError):
    """
    Erro de leitura de arquivo LIBSVM ou de modelo.

    Attributes:
        line (int | None): Número da linha (1-based) onde o erro ocorreu
        offset (int | None): Deslocamento em bytes onde o erro ocorreu
    """

    def __init__(self, message: str, line: int | None = None, offset: int | None = None):
        self.line = line
        self.offset = offset
        if line is not None:
            message = f"linha {line}: {message}"
        elif offset is not None:
            message = f"byte {offset}: {message}"
        super().__init__(message)
