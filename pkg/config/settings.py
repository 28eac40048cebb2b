"""
============================================================================
Módulo: settings.py
Projeto: SORS - Aprendizado Esparso Online de Similaridade Relativa
============================================================================

DESCRIÇÃO:
    Centraliza a configuração do sistema: variáveis de ambiente (.env),
    configuração de logging de cada módulo e a configuração de experimento
    usada pelos subcomandos da CLI.

CARACTERÍSTICAS:
    - Carrega valores padrão de forma segura através de variáveis de ambiente
    - Fornece o helper setup_logging() usado por todos os módulos
    - Monta o ExperimentConfig a partir de preset, arquivo JSON e flags
    - Valida hiperparâmetros antes de qualquer treino

OBSERVAÇÕES:
    - Precedência (menor para maior): padrões < preset < arquivo JSON < flags
    - Nunca versione o arquivo .env com caminhos de máquina pessoal
============================================================================
"""

# ============================================================================
# IMPORTAÇÕES
# ============================================================================
import os
import json
import logging
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from dotenv import load_dotenv

from core.exceptions import ConfigError

# ============================================================================
# CARREGAMENTO DE VARIÁVEIS DE AMBIENTE
# ============================================================================
# Carrega as variáveis do arquivo .env para as variáveis de ambiente do SO
load_dotenv()

BASE_DIR = Path(__file__).resolve().parent          # Pasta config/
PRESETS_PATH = BASE_DIR / "presets.json"

# ============================================================================
# OBTENÇÃO DOS VALORES PADRÃO
# ============================================================================
OUTPUT_DIR = os.getenv('SORS_OUTPUT_DIR', 'output')     # Pasta dos artefatos
LOG_DIR = os.getenv('SORS_LOG_DIR', str(BASE_DIR.parent / 'logs'))
LOG_LEVEL = os.getenv('SORS_LOG_LEVEL', 'INFO')
DEFAULT_SEED = int(os.getenv('SORS_SEED', '42'))
# Maior dimensão aceita: M = I já ocupa O(d) e cresce até O(d²) no treino
MAX_DIM = int(os.getenv('SORS_MAX_DIM', '1000000'))

# Algoritmos reconhecidos pelo módulo learners
ALGORITHMS = ('sors_1', 'sors_2', 'adasors_1', 'adasors_2', 'oasis', 'ogd', 'euclidean')

DEFAULT_KS = [1, 5, 10, 20, 50]


# ============================================================================
# CONFIGURAÇÃO DO SISTEMA DE LOGGING
# ============================================================================
def setup_logging(name: str, filename: str) -> logging.Logger:
    """
    Configura um logger nomeado que registra em <SORS_LOG_DIR>/<filename>.

    Args:
        name (str): Nome do logger (ex: 'learners_logger')
        filename (str): Nome do arquivo de log (ex: 'learners.log')

    Returns:
        logging.Logger: Instância configurada do logger

    Comportamento:
        - Cria a pasta de logs se não existir
        - Registra em modo append (preserva logs anteriores)
        - Formato: YYYY-MM-DD HH:MM:SS - LEVEL - Mensagem
        - Evita duplicação de handlers
    """
    log_dir = Path(LOG_DIR)
    log_dir.mkdir(parents=True, exist_ok=True)

    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, LOG_LEVEL.upper(), logging.INFO))

    if not logger.handlers:
        file_handler = logging.FileHandler(log_dir / filename, mode='a', encoding='utf-8')
        formatter = logging.Formatter(
            '%(asctime)s - %(levelname)s - %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    return logger


logger = setup_logging("settings_logger", "system.log")


# ============================================================================
# CONFIGURAÇÃO DE EXPERIMENTO
# ============================================================================
@dataclass
class ExperimentConfig:
    """
    Parâmetros de um experimento completo (treino, avaliação e benchmark).

    As chaves do arquivo JSON de configuração espelham exatamente os nomes
    destes campos. O campo 'algorithms' só é usado pelo subcomando bench.
    """
    dataset_path: str | None = None
    algorithm: str = 'sors_1'
    algorithms: list[str] = field(default_factory=lambda: ['euclidean', 'oasis', 'sors_1', 'sors_2'])
    lam: float = 1e-6
    eta: float = 0.1
    delta: float = 1.0
    c: float = 0.1
    iterations: int = 10_000
    eval_every: int = 1_000
    ks: list[int] = field(default_factory=lambda: list(DEFAULT_KS))
    seed: int = DEFAULT_SEED
    output_dir: str = OUTPUT_DIR
    train_fraction: float = 0.7
    dim: int | None = None
    reject_zeros: bool = False
    # Hiperparâmetros específicos por algoritmo (ex: AdaSORS com outro lambda)
    algorithm_overrides: dict[str, dict] = field(default_factory=dict)

    def validate(self) -> "ExperimentConfig":
        """
        Verifica os hiperparâmetros e retorna a própria configuração.

        Raises:
            ConfigError: Se algum valor estiver fora do domínio permitido
        """
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"Algoritmo desconhecido: '{self.algorithm}'. Use um de {ALGORITHMS}")
        for nome in self.algorithms:
            if nome not in ALGORITHMS:
                raise ConfigError(f"Algoritmo desconhecido na lista do bench: '{nome}'")
        if self.iterations < 1:
            raise ConfigError(f"iterations deve ser >= 1 (recebido {self.iterations})")
        if not 1 <= self.eval_every <= self.iterations:
            raise ConfigError(
                f"eval_every deve estar entre 1 e iterations={self.iterations} (recebido {self.eval_every})"
            )
        if self.eta <= 0:
            raise ConfigError(f"eta deve ser positivo (recebido {self.eta})")
        if self.delta <= 0:
            raise ConfigError(f"delta deve ser positivo (recebido {self.delta})")
        if self.c <= 0:
            raise ConfigError(f"c deve ser positivo (recebido {self.c})")
        if self.lam < 0:
            raise ConfigError(f"lambda deve ser não negativo (recebido {self.lam})")
        if not 0 < self.train_fraction < 1:
            raise ConfigError(f"train_fraction deve estar em (0, 1) (recebido {self.train_fraction})")
        if not self.ks or any(k < 1 for k in self.ks):
            raise ConfigError(f"ks deve conter apenas inteiros >= 1 (recebido {self.ks})")
        if self.dim is not None and not 1 <= self.dim <= MAX_DIM:
            raise ConfigError(f"dim deve estar entre 1 e SORS_MAX_DIM={MAX_DIM} (recebido {self.dim})")
        return self

    def params_for(self, algorithm: str) -> dict:
        """
        Retorna lam/eta/delta/c efetivos de um algoritmo.

        Os valores globais valem para todos os algoritmos, exceto quando
        algorithm_overrides traz valores próprios para o nome informado.
        """
        params = {"lam": self.lam, "eta": self.eta, "delta": self.delta, "c": self.c}
        for chave, valor in self.algorithm_overrides.get(algorithm, {}).items():
            chave = "lam" if chave == "lambda" else chave
            if chave not in params:
                raise ConfigError(f"Chave desconhecida '{chave}' em algorithm_overrides[{algorithm}]")
            params[chave] = valor
        return params


def load_presets() -> dict:
    """
    Lê o arquivo de presets de hiperparâmetros por dataset.

    Returns:
        dict: Mapeamento nome_do_preset -> {chave: valor}
    """
    with open(PRESETS_PATH, "r", encoding="utf-8") as f:
        return json.load(f)


# Tipo esperado de cada campo do ExperimentConfig nos valores de preset/JSON/flags
_TIPOS_CAMPOS = {
    'dataset_path': 'str?', 'algorithm': 'str', 'algorithms': 'list[str]',
    'lam': 'float', 'eta': 'float', 'delta': 'float', 'c': 'float',
    'iterations': 'int', 'eval_every': 'int', 'ks': 'list[int]', 'seed': 'int',
    'output_dir': 'str', 'train_fraction': 'float', 'dim': 'int?',
    'reject_zeros': 'bool', 'algorithm_overrides': 'overrides',
}


def _eh_inteiro(valor) -> bool:
    # bool não conta como inteiro
    return isinstance(valor, int) and not isinstance(valor, bool)


def _eh_real(valor) -> bool:
    if not (_eh_inteiro(valor) or isinstance(valor, float)):
        return False
    try:
        return math.isfinite(valor)
    except OverflowError:
        return False


def _converter_valor(chave: str, valor, origem: str):
    """
    Confere o tipo de um valor contra o campo do ExperimentConfig.

    Inteiros são aceitos onde se espera float (e viram float); o contrário
    não vale: '100' ou 100.0 em 'iterations' são rejeitados.

    Raises:
        ConfigError: Tipo incompatível com o campo
    """
    tipo = _TIPOS_CAMPOS[chave]
    if tipo.endswith('?'):
        if valor is None:
            return None
        tipo = tipo[:-1]

    if tipo == 'int' and _eh_inteiro(valor):
        return valor
    if tipo == 'float' and _eh_real(valor):
        return float(valor)
    if tipo == 'str' and isinstance(valor, str):
        return valor
    if tipo == 'bool' and isinstance(valor, bool):
        return valor
    if tipo == 'list[int]' and isinstance(valor, list) and all(_eh_inteiro(v) for v in valor):
        return list(valor)
    if tipo == 'list[str]' and isinstance(valor, list) and all(isinstance(v, str) for v in valor):
        return list(valor)
    if tipo == 'overrides' and isinstance(valor, dict) and all(
        isinstance(params, dict) and all(_eh_real(v) for v in params.values())
        for params in valor.values()
    ):
        return {nome: {k: float(v) for k, v in params.items()} for nome, params in valor.items()}

    raise ConfigError(f"Valor inválido para '{chave}' em {origem}: esperado {tipo}, recebido {valor!r}")


def _aplicar_valores(config: ExperimentConfig, valores: dict, origem: str) -> set:
    """Aplica um dicionário de chaves planas e retorna as chaves aplicadas."""
    aplicadas = set()
    nomes_validos = {f.name for f in fields(ExperimentConfig)}
    for chave, valor in valores.items():
        # 'lambda' é palavra reservada em Python; aceita as duas grafias
        if chave == 'lambda':
            chave = 'lam'
        if chave not in nomes_validos:
            raise ConfigError(f"Chave desconhecida '{chave}' em {origem}")
        setattr(config, chave, _converter_valor(chave, valor, origem))
        aplicadas.add(chave)
    return aplicadas


def build_config(preset: str | None = None, config_path: str | None = None,
                 overrides: dict | None = None) -> ExperimentConfig:
    """
    Monta a configuração final respeitando a ordem de precedência.

    Args:
        preset (str, optional): Nome do preset em config/presets.json
        config_path (str, optional): Caminho do arquivo JSON de configuração
        overrides (dict, optional): Valores vindos das flags da CLI
            (chaves com valor None são ignoradas)

    Returns:
        ExperimentConfig: Configuração validada

    Raises:
        ConfigError: Preset inexistente, JSON inválido ou chave desconhecida

    Example:
        >>> cfg = build_config(preset='protein', overrides={'iterations': 500})
        >>> cfg.eta, cfg.iterations
        (0.1, 500)
    """
    config = ExperimentConfig()
    definidas = set()

    if preset:
        presets = load_presets()
        if preset not in presets:
            raise ConfigError(f"Preset '{preset}' não encontrado. Disponíveis: {sorted(presets)}")
        definidas |= _aplicar_valores(config, presets[preset], f"preset '{preset}'")
        logger.info(f"Preset aplicado: {preset}")

    if config_path:
        try:
            with open(config_path, "r", encoding="utf-8") as f:
                valores = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Arquivo de configuração '{config_path}' não é um JSON válido: {e}") from e
        if not isinstance(valores, dict):
            raise ConfigError(f"Arquivo de configuração '{config_path}' deve conter um objeto JSON")
        definidas |= _aplicar_valores(config, valores, f"'{config_path}'")
        logger.info(f"Arquivo de configuração aplicado: {config_path}")

    if overrides:
        definidas |= _aplicar_valores(
            config, {k: v for k, v in overrides.items() if v is not None}, "flags da CLI"
        )

    # Sem eval_every explícito, o período padrão não pode exceder o número de iterações
    if "eval_every" not in definidas:
        config.eval_every = max(1, min(config.eval_every, config.iterations))

    return config.validate()
