# Arquivo: tests/test_prox.py

import logging

import numpy as np
import pytest
import scipy.sparse as sp

from core.exceptions import ArgumentError, DimensionError
from core.model import SimilarityModel, SparseVector, RankOneGradient
from core.prox import (
    Accumulator, soft_threshold, prox_l1, prox_l1_offdiag, prox_l1_adaptive, accumulate,
)

M_EXEMPLO = [[2.0, -0.5], [0.3, 1.0]]


def argmin_escalar(m: float, tau: float) -> float:
    """Minimiza tau·|n| + ½(n - m)² por busca ternária (função convexa)."""
    baixo, alto = -abs(m) - 1.0, abs(m) + 1.0
    for _ in range(200):
        a = baixo + (alto - baixo) / 3
        b = alto - (alto - baixo) / 3
        if tau * abs(a) + 0.5 * (a - m) ** 2 <= tau * abs(b) + 0.5 * (b - m) ** 2:
            alto = b
        else:
            baixo = a
    return (baixo + alto) / 2


def _acumulador(denso_h, delta):
    return Accumulator(len(denso_h), sp.csr_matrix(np.asarray(denso_h, dtype=float)), delta)


def test_prox_l1_exemplo():
    """[[2, -0.5], [0.3, 1]] com τ = 0.4 vira [[1.6, -0.1], [0, 0.6]]."""
    logging.info("Iniciando teste: test_prox_l1_exemplo")

    resultado = prox_l1(SimilarityModel.from_dense(M_EXEMPLO), 0.4)

    np.testing.assert_allclose(resultado.to_dense(), [[1.6, -0.1], [0.0, 0.6]], atol=1e-12)
    # A entrada zerada sai do armazenamento
    assert resultado.nnz == 3
    logging.info("Teste finalizado com sucesso.")


def test_prox_l1_casos_limite():
    """τ = 0 não muda nada; τ acima de todas as entradas esvazia o modelo."""
    logging.info("Iniciando teste: test_prox_l1_casos_limite")
    m = SimilarityModel.from_dense(M_EXEMPLO)

    assert prox_l1(m, 0.0) == m
    assert prox_l1(m, 2.0).nnz == 0
    with pytest.raises(ArgumentError):
        prox_l1(m, -0.1)
    logging.info("Teste finalizado com sucesso.")


def test_prox_l1_offdiag_exemplo():
    """Diagonal intacta, fora da diagonal truncada."""
    logging.info("Iniciando teste: test_prox_l1_offdiag_exemplo")
    m = SimilarityModel.from_dense(M_EXEMPLO)

    resultado = prox_l1_offdiag(m, 0.4)

    np.testing.assert_allclose(resultado.to_dense(), [[2.0, -0.1], [0.0, 1.0]], atol=1e-12)
    assert resultado.get(0, 0) == 2.0 and resultado.get(1, 1) == 1.0

    diagonal = SimilarityModel.from_dense([[3.0, 0.0], [0.0, -0.2]])
    assert prox_l1_offdiag(diagonal, 5.0) == diagonal
    assert prox_l1_offdiag(m, 0.0) == m
    logging.info("Teste finalizado com sucesso.")


def test_prox_l1_adaptive_exemplos():
    """Limiar λη / (δ + H_ij) por entrada."""
    logging.info("Iniciando teste: test_prox_l1_adaptive_exemplos")

    # 1. M = [[1]], δ = 2, H vazio, λη = 1 -> limiar 1/2
    m = SimilarityModel.from_dense([[1.0]])
    assert prox_l1_adaptive(m, 1.0, Accumulator.empty(1, 2.0)).get(0, 0) == 0.5

    # 2. H grande: limiar desprezível
    sigma = _acumulador([[1e7]], 2.0)
    assert 1.0 / sigma.sigma_at(np.array([0]), np.array([0]))[0] < 1e-6
    assert prox_l1_adaptive(m, 1.0, sigma).get(0, 0) == pytest.approx(1.0, abs=1e-6)

    # 3. λη = 0 não muda nada
    m = SimilarityModel.from_dense(M_EXEMPLO)
    assert prox_l1_adaptive(m, 0.0, _acumulador([[1.0, 0.0], [2.0, 0.0]], 0.5)) == m

    # 4. Dimensão diferente
    with pytest.raises(DimensionError):
        prox_l1_adaptive(m, 1.0, Accumulator.empty(3, 1.0))
    logging.info("Teste finalizado com sucesso.")


def test_prox_adaptive_com_h_vazio_e_delta_um_igual_ao_prox_l1():
    logging.info("Iniciando teste: test_prox_adaptive_com_h_vazio_e_delta_um_igual_ao_prox_l1")
    rng = np.random.default_rng(2)
    for _ in range(50):
        d = int(rng.integers(1, 8))
        m = SimilarityModel.from_dense(rng.uniform(-2, 2, size=(d, d)))
        tau = float(rng.uniform(0, 1))
        assert prox_l1_adaptive(m, tau, Accumulator.empty(d, 1.0)) == prox_l1(m, tau)
    logging.info("Teste finalizado com sucesso.")


def test_soft_threshold_e_o_minimizador_exato():
    """sign(m)·max(|m| - τ, 0) = argmin τ|n| + ½(n - m)²."""
    logging.info("Iniciando teste: test_soft_threshold_e_o_minimizador_exato")
    rng = np.random.default_rng(13)
    for _ in range(300):
        m, tau = float(rng.uniform(-2, 2)), float(rng.uniform(0, 1))
        assert soft_threshold(np.array([m]), tau)[0] == pytest.approx(argmin_escalar(m, tau), abs=1e-6)
    logging.info("Teste finalizado com sucesso.")


def test_prox_l1_nunca_aumenta_norma_nem_suporte():
    logging.info("Iniciando teste: test_prox_l1_nunca_aumenta_norma_nem_suporte")
    rng = np.random.default_rng(17)
    for _ in range(100):
        d = int(rng.integers(1, 10))
        m = SimilarityModel.from_dense(rng.uniform(-2, 2, size=(d, d)) * (rng.random((d, d)) < 0.5))
        tau = float(rng.uniform(0, 1.5))
        for resultado in (prox_l1(m, tau), prox_l1_offdiag(m, tau)):
            assert np.linalg.norm(resultado.to_dense()) <= np.linalg.norm(m.to_dense())
            assert resultado.nnz <= m.nnz
            # Nenhum zero armazenado depois do prox
            assert np.all(resultado.matrix.data != 0)
    logging.info("Teste finalizado com sucesso.")


def test_accumulate_exemplos():
    """3-4-5, gradiente vazio e H vazio."""
    logging.info("Iniciando teste: test_accumulate_exemplos")
    um = SparseVector.from_dense([2.0])

    # 1. H = 3, G = 2·2 = 4 -> 5
    sigma = _acumulador([[3.0]], 1.0)
    assert accumulate(sigma, RankOneGradient(um, um, 1)).h_at(np.array([0]), np.array([0]))[0] == 5.0

    # 2. Gradiente vazio devolve o mesmo acumulador
    assert accumulate(sigma, RankOneGradient.zero(1)) is sigma

    # 3. H vazio, G = 2 -> 2
    g = RankOneGradient(SparseVector.from_dense([1.0]), um, 1)
    novo = accumulate(Accumulator.empty(1, 1.0), g)
    assert novo.h_at(np.array([0]), np.array([0]))[0] == 2.0

    with pytest.raises(DimensionError):
        accumulate(Accumulator.empty(2, 1.0), g)
    logging.info("Teste finalizado com sucesso.")


def test_accumulate_e_monotono_e_preserva_fora_do_suporte():
    """H'_ij >= H_ij em toda coordenada; fora do suporte de G nada muda."""
    logging.info("Iniciando teste: test_accumulate_e_monotono_e_preserva_fora_do_suporte")
    rng = np.random.default_rng(23)
    d = 6
    sigma = Accumulator.empty(d, 1.0)
    esperado = np.zeros((d, d))

    for _ in range(60):
        u = SparseVector.from_dense(rng.normal(size=d) * (rng.random(d) < 0.5))
        v = SparseVector.from_dense(rng.normal(size=d) * (rng.random(d) < 0.5))
        g = RankOneGradient(u, v, d)
        anterior = sigma.h.toarray()

        sigma = accumulate(sigma, g)
        atual = sigma.h.toarray()
        denso_g = g.to_dense()
        esperado = np.where(denso_g != 0, np.sqrt(esperado ** 2 + denso_g ** 2), esperado)

        assert np.all(atual >= anterior)
        np.testing.assert_array_equal(atual[denso_g == 0], anterior[denso_g == 0])
        np.testing.assert_allclose(atual, esperado, rtol=1e-12)
        assert np.all(sigma.h.data > 0)
    logging.info("Teste finalizado com sucesso.")
