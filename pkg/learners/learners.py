"""
============================================================================
Módulo: learners.py
Projeto: SORS - Aprendizado Esparso Online de Similaridade Relativa
============================================================================

DESCRIÇÃO:
    Máquinas de estado dos aprendizes online. Todos compartilham a mesma
    interface init() / step() / run():

ALGORITMOS:
    - sors_1 / sors_2:        gradiente + prox L1 (completo / fora da diagonal)
    - adasors_1 / adasors_2:  passo AdaGrad (G./Σ) + prox adaptativo
    - ogd:                    gradiente online sem prox
    - oasis:                  atualização Passive-Aggressive em forma fechada
    - euclidean:              modelo congelado em M = I (linha de base)

FLUXO DE UMA RODADA (step):
    1. Mede a perda ℓ_t(M_t) ANTES da atualização
    2. Soma ℓ_t(M_t) + λ r(M_t) ao objetivo acumulado
    3. Aplica a atualização do algoritmo configurado
    4. Incrementa o contador de passos

OBSERVAÇÕES:
    - M₁ = I para todos os algoritmos
    - Taxa de aprendizado constante η
    - O prox é aplicado em toda rodada, mesmo quando G_t = 0
    - Estado imutável: step() devolve um LearnerState novo

DEPENDÊNCIAS:
    - core.model / core.prox: operações do modelo e operadores proximais
============================================================================
"""

# ============================================================================
# IMPORTAÇÕES
# ============================================================================
from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Callable, Iterable

import scipy.sparse as sp

from config.settings import ALGORITHMS, setup_logging
from core.exceptions import ArgumentError, DimensionError
from core.model import SimilarityModel, Triplet, RankOneGradient, hinge_loss, subgradient
from core.prox import (
    Accumulator, accumulate, coordinates, prox_l1, prox_l1_offdiag, prox_l1_adaptive,
)

logger = setup_logging("learners_logger", "learners.log")


# ============================================================================
# CONFIGURAÇÃO E ESTADO
# ============================================================================
@dataclass(frozen=True)
class LearnerConfig:
    """
    Hiperparâmetros de um aprendiz.

    Attributes:
        algorithm (str): Um de sors_1, sors_2, adasors_1, adasors_2, oasis, ogd, euclidean
        dim (int): Dimensão d do modelo
        lam (float): Peso de esparsidade λ (só sors_*/adasors_*)
        eta (float): Taxa de aprendizado η constante
        delta (float): Suavização δ (só adasors_*)
        aggressiveness_c (float): Agressividade C (só oasis)
        freeze_accumulator (bool): Mantém H vazio no AdaSORS (gancho de teste)
    """
    algorithm: str
    dim: int
    lam: float = 0.0
    eta: float = 0.1
    delta: float = 1.0
    aggressiveness_c: float = 0.1
    freeze_accumulator: bool = False

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ArgumentError(f"Algoritmo desconhecido '{self.algorithm}'. Use um de {ALGORITHMS}")
        if self.dim <= 0:
            raise ArgumentError(f"dim deve ser positivo (recebido {self.dim})")
        if self.lam < 0:
            raise ArgumentError(f"lambda deve ser não negativo (recebido {self.lam})")
        if self.eta <= 0:
            raise ArgumentError(f"eta deve ser positivo (recebido {self.eta})")
        if self.delta <= 0:
            raise ArgumentError(f"delta deve ser positivo (recebido {self.delta})")
        if self.aggressiveness_c <= 0:
            raise ArgumentError(f"C deve ser positivo (recebido {self.aggressiveness_c})")

    @property
    def is_adaptive(self) -> bool:
        return self.algorithm.startswith("adasors")

    @property
    def is_sparse(self) -> bool:
        return self.algorithm.startswith(("sors", "adasors"))

    @property
    def off_diagonal(self) -> bool:
        """Variante II: regularizador L1 só fora da diagonal."""
        return self.algorithm in ("sors_2", "adasors_2")

    def regularization(self, model: SimilarityModel) -> float:
        """λ r(M) com o regularizador da variante; zero para as linhas de base."""
        if not self.is_sparse:
            return 0.0
        return self.lam * model.l1_norm(off_diagonal=self.off_diagonal)


@dataclass(frozen=True)
class LearnerState:
    """Estado do aprendiz entre rodadas."""
    model: SimilarityModel
    accumulator: Accumulator | None
    step_count: int = 0
    cumulative_loss: float = 0.0
    cumulative_objective: float = 0.0


@dataclass(frozen=True)
class StepRecord:
    """Uma linha do traço de treino: perda antes do passo e nnz depois dele."""
    loss: float
    nnz: int
    objective: float


# ============================================================================
# FUNÇÕES PÚBLICAS (INTERFACE DO MÓDULO)
# ============================================================================
def init(config: LearnerConfig) -> LearnerState:
    """
    Cria o estado inicial: M₁ = I, acumulador vazio para adasors_* e
    contadores zerados.

    Example:
        >>> estado = init(LearnerConfig("adasors_1", dim=3, delta=5.0))
        >>> estado.model.nnz, estado.accumulator.delta
        (3, 5.0)
    """
    acumulador = Accumulator.empty(config.dim, config.delta) if config.is_adaptive else None
    return LearnerState(model=SimilarityModel.identity(config.dim), accumulator=acumulador)


def step(state: LearnerState, t: Triplet, config: LearnerConfig) -> LearnerState:
    """
    Executa uma rodada de aprendizado online.

    Args:
        state (LearnerState): Estado M_t (e H_t)
        t (Triplet): Trio da rodada
        config (LearnerConfig): Hiperparâmetros

    Returns:
        LearnerState: Estado M_{t+1} com contadores atualizados

    Raises:
        DimensionError: Se t.dim for diferente de config.dim
    """
    novo_estado, _, _ = _executar_passo(state, t, config)
    return novo_estado


def _executar_passo(state: LearnerState, t: Triplet,
                    config: LearnerConfig) -> tuple[LearnerState, float, float]:
    """Corpo de step(); devolve também a perda e o objetivo da rodada."""
    if t.dim != config.dim:
        raise DimensionError(f"Trio com dimensão {t.dim}, aprendiz com {config.dim}")

    model = state.model
    loss = hinge_loss(model, t)
    objetivo = loss + config.regularization(model)
    acumulador = state.accumulator

    if config.algorithm == "euclidean":
        novo = model
    elif config.algorithm == "oasis":
        novo = _passo_oasis(model, t, loss, config)
    else:
        g = subgradient(model, t, loss)
        if config.algorithm == "ogd":
            novo = _passo_gradiente(model, g.to_csr(), config.eta)
        elif config.is_adaptive:
            if not config.freeze_accumulator:
                acumulador = accumulate(acumulador, g)
            novo = _passo_adasors(model, g, acumulador, config)
        else:
            novo = _passo_sors(model, g, config)

    novo_estado = replace(
        state,
        model=novo,
        accumulator=acumulador,
        step_count=state.step_count + 1,
        cumulative_loss=state.cumulative_loss + loss,
        cumulative_objective=state.cumulative_objective + objetivo,
    )
    return novo_estado, loss, objetivo


def run(config: LearnerConfig, stream: Iterable[Triplet],
        on_step: Callable[[LearnerState], None] | None = None) -> tuple[LearnerState, list[StepRecord]]:
    """
    Executa step() sobre toda a sequência de trios.

    Args:
        config (LearnerConfig): Hiperparâmetros
        stream (Iterable[Triplet]): Sequência de trios (pode ser um gerador)
        on_step (Callable, optional): Chamado com o estado após cada passo;
            usado pela CLI para os checkpoints de avaliação

    Returns:
        tuple: (estado final, traço com um StepRecord por passo)

    Example:
        >>> estado, traco = run(LearnerConfig("sors_1", dim=2), [])
        >>> estado.step_count, traco
        (0, [])
    """
    logger.info("=" * 60)
    logger.info(f"Treino iniciado: {config}")
    inicio = time.monotonic()

    state = init(config)
    trace: list[StepRecord] = []
    for t in stream:
        state, perda, objetivo = _executar_passo(state, t, config)
        trace.append(StepRecord(loss=perda, nnz=state.model.nnz, objective=objetivo))
        if on_step is not None:
            on_step(state)

    logger.info(
        f"Treino concluído: {state.step_count} passos, nnz={state.model.nnz}, "
        f"perda média={state.cumulative_loss / max(state.step_count, 1):.6f}, "
        f"{time.monotonic() - inicio:.3f}s"
    )
    return state, trace


# ============================================================================
# FUNÇÕES PRIVADAS (USO INTERNO)
# ============================================================================
def _passo_gradiente(model: SimilarityModel, g_csr: sp.csr_matrix, eta: float) -> SimilarityModel:
    """M - η G; com G vazio o próprio modelo é devolvido."""
    if g_csr.nnz == 0:
        return model
    return SimilarityModel.from_matrix(model.matrix - eta * g_csr, model.dim)


def _passo_sors(model: SimilarityModel, g: RankOneGradient, config: LearnerConfig) -> SimilarityModel:
    intermediario = _passo_gradiente(model, g.to_csr(), config.eta)
    tau = config.eta * config.lam
    if config.off_diagonal:
        return prox_l1_offdiag(intermediario, tau)
    return prox_l1(intermediario, tau)


def _passo_adasors(model: SimilarityModel, g: RankOneGradient, sigma: Accumulator,
                   config: LearnerConfig) -> SimilarityModel:
    g_csr = g.to_csr()
    if g_csr.nnz:
        # G ./ Σ avaliado apenas no suporte de G
        linhas, colunas = coordinates(g_csr)
        g_csr = sp.csr_matrix(
            (g_csr.data / sigma.sigma_at(linhas, colunas), g_csr.indices, g_csr.indptr),
            shape=g_csr.shape,
        )
    intermediario = _passo_gradiente(model, g_csr, config.eta)
    return prox_l1_adaptive(intermediario, config.eta * config.lam, sigma,
                            off_diagonal=config.off_diagonal)


def _passo_oasis(model: SimilarityModel, t: Triplet, loss: float,
                 config: LearnerConfig) -> SimilarityModel:
    """
    Passive-Aggressive: M + τ x(x⁺ - x⁻)ᵀ com τ = min(C, ℓ / ‖x(x⁺ - x⁻)ᵀ‖²_F).

    Trio degenerado (x = 0 ou x⁺ = x⁻) com perda positiva não atualiza.
    """
    if loss <= 0:
        return model
    g = subgradient(model, t, loss)
    denominador = g.squared_frobenius()
    if denominador == 0:
        logger.debug("Trio degenerado no OASIS (norma zero); atualização ignorada.")
        return model
    tau = min(config.aggressiveness_c, loss / denominador)
    # G = -x(x⁺ - x⁻)ᵀ, logo M + τ x(x⁺ - x⁻)ᵀ = M - τ G
    return _passo_gradiente(model, g.to_csr(), tau)
