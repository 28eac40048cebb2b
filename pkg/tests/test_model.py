# Arquivo: tests/test_model.py

import logging

import numpy as np
import pytest

from core.exceptions import ArgumentError, DimensionError
from core.model import (
    SparseVector, Triplet, SimilarityModel, RankOneGradient,
    score, hinge_loss, subgradient,
)

M_EXEMPLO = [[0.2, -0.1], [0.4, 0.3]]


def _vetor_aleatorio(rng, dim, densidade=0.5):
    denso = rng.uniform(-1, 1, size=dim) * (rng.random(dim) < densidade)
    return SparseVector.from_dense(denso)


def test_sparse_vector_rejeita_entradas_invalidas():
    """
    Verifica as invariantes do SparseVector: índices crescentes, dentro de
    [0, dim) e sem zeros armazenados.
    """
    logging.info("Iniciando teste: test_sparse_vector_rejeita_entradas_invalidas")

    with pytest.raises(ArgumentError):
        SparseVector(3, np.array([1, 0]), np.array([1.0, 2.0]))
    with pytest.raises(DimensionError):
        SparseVector(3, np.array([3]), np.array([1.0]))
    with pytest.raises(ArgumentError):
        SparseVector(3, np.array([0]), np.array([0.0]))
    with pytest.raises(ArgumentError):
        SparseVector(0, np.array([]), np.array([]))

    # from_pairs ordena e descarta zeros
    v = SparseVector.from_pairs(4, [(2, 1.5), (0, -1.0), (3, 0.0)])
    assert v.indices.tolist() == [0, 2]
    assert v.values.tolist() == [-1.0, 1.5]
    logging.info("Teste finalizado com sucesso.")


def test_subtract_remove_cancelamentos_exatos():
    """x⁺ - x⁻ não pode guardar zeros quando os valores se cancelam."""
    logging.info("Iniciando teste: test_subtract_remove_cancelamentos_exatos")

    a = SparseVector.from_pairs(5, [(0, 1.0), (2, 3.0)])
    b = SparseVector.from_pairs(5, [(2, 3.0), (4, 2.0)])

    diferenca = a.subtract(b)

    assert diferenca.indices.tolist() == [0, 4]
    assert diferenca.values.tolist() == [1.0, -2.0]
    assert a.subtract(a).nnz == 0
    logging.info("Teste finalizado com sucesso.")


@pytest.mark.parametrize("x, y, esperado", [
    ([1, 0], [0, 1], 0.0),
    ([1, 2], [1, 2], 5.0),
])
def test_score_com_identidade(x, y, esperado):
    """Com M = I o score é o produto interno."""
    logging.info(f"Iniciando teste: test_score_com_identidade {x} {y}")
    m = SimilarityModel.identity(2)
    assert score(m, SparseVector.from_dense(x), SparseVector.from_dense(y)) == esperado


def test_score_matriz_completa():
    """xᵀM = (1.0, 0.5); com y = (0, 1) o score é 0.5."""
    logging.info("Iniciando teste: test_score_matriz_completa")
    m = SimilarityModel.from_dense(M_EXEMPLO)
    resultado = score(m, SparseVector.from_dense([1, 2]), SparseVector.from_dense([0, 1]))
    assert resultado == pytest.approx(0.5, abs=1e-12)


def test_score_dimensao_incompativel():
    logging.info("Iniciando teste: test_score_dimensao_incompativel")
    m = SimilarityModel.identity(2)
    with pytest.raises(DimensionError):
        score(m, SparseVector.from_dense([1, 0, 1]), SparseVector.from_dense([1, 0]))


def test_hinge_loss_exemplos():
    """Margem atingida, modelo zero e matriz completa."""
    logging.info("Iniciando teste: test_hinge_loss_exemplos")

    # 1. Margem atingida com identidade
    t = Triplet(SparseVector.from_dense([1, 0]), SparseVector.from_dense([1, 0]), SparseVector.from_dense([0, 1]))
    assert hinge_loss(SimilarityModel.identity(2), t) == 0.0

    # 2. Modelo zero: os dois scores valem 0
    assert hinge_loss(SimilarityModel.zeros(2), t) == 1.0

    # 3. S⁺ = 0.5, S⁻ = 1.0
    t = Triplet(SparseVector.from_dense([1, 2]), SparseVector.from_dense([0, 1]), SparseVector.from_dense([1, 0]))
    assert hinge_loss(SimilarityModel.from_dense(M_EXEMPLO), t) == pytest.approx(1.5, abs=1e-12)
    logging.info("Teste finalizado com sucesso.")


def test_subgradient_exemplos():
    """Perda zero gera gradiente vazio; perda positiva gera -x(x⁺ - x⁻)ᵀ."""
    logging.info("Iniciando teste: test_subgradient_exemplos")

    # 1. Perda zero
    t = Triplet(SparseVector.from_dense([1, 0]), SparseVector.from_dense([1, 0]), SparseVector.from_dense([0, 1]))
    assert subgradient(SimilarityModel.identity(2), t).is_zero

    # 2. M = 0, x = (1, 2), x⁺ = (0, 1), x⁻ = (1, 0)
    t = Triplet(SparseVector.from_dense([1, 2]), SparseVector.from_dense([0, 1]), SparseVector.from_dense([1, 0]))
    g = subgradient(SimilarityModel.zeros(2), t)
    assert g.left.to_dense().tolist() == [-1.0, -2.0]
    assert g.right.to_dense().tolist() == [-1.0, 1.0]
    np.testing.assert_array_equal(g.to_dense(), [[1.0, -1.0], [2.0, -2.0]])
    np.testing.assert_array_equal(g.to_csr().toarray(), g.to_dense())

    # 3. x⁺ = x⁻ com perda positiva: fator da direita vazio
    igual = SparseVector.from_dense([0, 1])
    g = subgradient(SimilarityModel.zeros(2), Triplet(SparseVector.from_dense([1, 1]), igual, igual))
    assert g.is_zero
    assert g.to_csr().nnz == 0
    logging.info("Teste finalizado com sucesso.")


def test_score_e_hinge_contra_oraculo_denso():
    """
    Score e perda calculados em CSR coincidem com a conta densa xᵀMy em
    instâncias aleatórias com d <= 16.
    """
    logging.info("Iniciando teste: test_score_e_hinge_contra_oraculo_denso")
    rng = np.random.default_rng(7)

    for _ in range(200):
        d = int(rng.integers(1, 17))
        denso = rng.uniform(-1, 1, size=(d, d)) * (rng.random((d, d)) < 0.6)
        m = SimilarityModel.from_dense(denso)
        x, xp, xn = (_vetor_aleatorio(rng, d) for _ in range(3))

        s = score(m, x, xp)
        assert s == pytest.approx(x.to_dense() @ denso @ xp.to_dense(), rel=1e-12, abs=1e-12)

        oraculo = max(0.0, 1 - x.to_dense() @ denso @ xp.to_dense() + x.to_dense() @ denso @ xn.to_dense())
        assert hinge_loss(m, Triplet(x, xp, xn)) == pytest.approx(oraculo, rel=1e-12, abs=1e-12)
    logging.info("Teste finalizado com sucesso.")


def test_score_bilinear():
    """score(M, αx, y) = α · score(M, x, y)."""
    logging.info("Iniciando teste: test_score_bilinear")
    rng = np.random.default_rng(11)

    for _ in range(100):
        d = int(rng.integers(2, 12))
        m = SimilarityModel.from_dense(rng.normal(size=(d, d)))
        x, y = _vetor_aleatorio(rng, d, 0.8), _vetor_aleatorio(rng, d, 0.8)
        alpha = float(rng.uniform(-3, 3))
        base = score(m, x, y)
        assert score(m, x.scale(alpha), y) == pytest.approx(alpha * base, rel=1e-12, abs=1e-12)
    logging.info("Teste finalizado com sucesso.")


def test_subgradient_diferencas_finitas():
    """
    Cada G_ij bate com a diferença central da perda em relação a M_ij
    (passo 1e-6) sempre que a perda é claramente positiva.
    """
    logging.info("Iniciando teste: test_subgradient_diferencas_finitas")
    rng = np.random.default_rng(3)
    passo = 1e-6
    verificados = 0

    while verificados < 40:
        d = int(rng.integers(1, 9))
        denso = rng.normal(scale=0.5, size=(d, d))
        t = Triplet(*(_vetor_aleatorio(rng, d, 0.7) for _ in range(3)))
        m = SimilarityModel.from_dense(denso)
        if hinge_loss(m, t) <= 1e-3:
            continue

        g = subgradient(m, t).to_dense()
        for i in range(d):
            for j in range(d):
                mais, menos = denso.copy(), denso.copy()
                mais[i, j] += passo
                menos[i, j] -= passo
                numerico = (hinge_loss(SimilarityModel.from_dense(mais), t)
                            - hinge_loss(SimilarityModel.from_dense(menos), t)) / (2 * passo)
                assert g[i, j] == pytest.approx(numerico, abs=1e-4)
        verificados += 1
    logging.info("Teste finalizado com sucesso.")


def test_similarity_model_invariantes():
    """Identidade, zeros, l1 e rejeição de zeros armazenados."""
    logging.info("Iniciando teste: test_similarity_model_invariantes")

    m = SimilarityModel.identity(3)
    assert m.nnz == 3
    assert m.diagonal_nnz() == 3
    assert list(m.entries()) == [(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)]

    m = SimilarityModel.from_dense([[2.0, -0.5], [0.0, 1.0]])
    assert m.nnz == 3
    assert m.l1_norm() == 3.5
    assert m.l1_norm(off_diagonal=True) == 0.5

    with pytest.raises(DimensionError):
        SimilarityModel.from_entries(2, {(0, 2): 1.0})
    with pytest.raises(ArgumentError):
        SimilarityModel.identity(0)

    g = RankOneGradient(SparseVector.from_dense([0, 2]), SparseVector.from_dense([3, 0]), 2)
    assert g.squared_frobenius() == 36.0
    assert g.nnz == 1
    logging.info("Teste finalizado com sucesso.")
