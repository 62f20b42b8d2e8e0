from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from oracles import gue_entry_cov_k2_trx2, gue_entry_k3_trx2
from rmtcumulants.errors import CompletenessError, ContractError, ShapeError, SizeError
from rmtcumulants.expansion import (
    DAssignment,
    EntryCumulantModel,
    bruteforce_cumulant_oracle,
    corollary_bound,
    entry_cumulant_for,
    exact_cumulant,
    exact_cumulant_gaussian,
    mixed_cumulant,
    s_pi_eq,
    s_pi_eq_direct,
    s_pi_geq,
    verify_bounds,
)
from rmtcumulants.partitions import SetPartition, enumerate_partitions, gamma_partition, signed_range
from rmtcumulants.polynomial import DeterministicSet, Letter, PolynomialSpec, identity_set, monomial_spec
from rmtcumulants.randmat import EntryDistribution, builtin_deterministic

X1 = ["X", 1]
XD = [X1, ["D", "A"]]
UNIFORM = EntryDistribution("uniform")


def _asg(m_vec, mats):
    return DAssignment(gamma_partition(m_vec), tuple(np.asarray(a, dtype=complex) for a in mats))


def _detset(name, N):
    return DeterministicSet(N, {"A": builtin_deterministic(name, N)})


def test_identity_sum_counts_free_indices():
    N = 3
    asg = _asg((2,), [np.eye(N)] * 2)
    assert s_pi_geq(N, SetPartition.zero(signed_range(2)), asg) == pytest.approx(N ** 2)
    assert s_pi_geq(N, SetPartition.one(signed_range(2)), asg) == pytest.approx(N)


def test_wigner_trxd_deterministic_sums():
    # Tr(XD) repeated r times: the two partitions that survive are one block and {1..r},{-1..-r}
    N, r = 5, 3
    D = builtin_deterministic("upper-bidiagonal-ones", N)
    asg = _asg((1,) * r, [D] * r)
    dom = signed_range(r)
    assert s_pi_eq(N, SetPartition.one(dom), asg) == pytest.approx(N)
    split = SetPartition([range(1, r + 1), range(-r, 0)])
    assert s_pi_eq(N, split, asg) == pytest.approx(N - 1)


def test_worked_deterministic_sum_obeys_power_bound():
    # vertex v of the 28-vertex example sits at -(v+1)/2 when odd, at v/2+1 when even, with 28 at 1
    def to_signed(v):
        if v % 2:
            return -(v + 1) // 2
        return 1 if v == 28 else v // 2 + 1

    blocks = [{1, 4}, {2, 3}, {5, 8}, {6, 15, 26}, {7, 19}, {16, 20}, {9, 13, 25}, {10, 11},
              {12, 14, 23, 28}, {17, 21, 27}, {18, 22}, {24}]
    pi = SetPartition([[to_signed(v) for v in b] for b in blocks])
    assert pi.domain == signed_range(14)
    for N in (2, 3):
        for seed in range(3):
            mats = [builtin_deterministic(f"random-unit-norm:{20 * seed + k}", N) for k in range(14)]
            assert abs(s_pi_geq(N, pi, _asg((14,), mats))) <= N ** 2.5


@pytest.mark.parametrize("m_vec", [(2,), (1, 1), (2, 1), (3,)])
def test_mobius_sum_matches_direct_enumeration(m_vec):
    N = 3
    rng = np.random.default_rng(sum(m_vec))
    m = sum(m_vec)
    asg = _asg(m_vec, [rng.normal(size=(N, N)) + 1j * rng.normal(size=(N, N)) for _ in range(m)])
    for pi in enumerate_partitions(signed_range(m)):
        assert s_pi_eq(N, pi, asg) == pytest.approx(s_pi_eq_direct(N, pi, asg), abs=1e-9)


def test_s_pi_eq_vanishes_with_too_many_blocks():
    asg = _asg((2,), [np.ones((2, 2))] * 2)
    assert s_pi_eq(2, SetPartition.zero(signed_range(2)), asg) == 0


def test_s_pi_checks_shapes_and_budget():
    asg = _asg((1,), [np.eye(2)])
    with pytest.raises(ShapeError):
        s_pi_geq(2, SetPartition.one([1, 2]), asg)
    with pytest.raises(ShapeError):
        s_pi_geq(3, SetPartition.one([-1, 1]), asg)
    with pytest.raises(SizeError):
        s_pi_geq(2, SetPartition.zero([-1, 1]), asg, budget=3)


def test_entry_cumulant_examples():
    gue = EntryCumulantModel.gue()
    letters = [Letter(1), Letter(1)]
    # psi(1)=a, psi(-1)=b on the first letter; the second reads (b, a)
    pi = SetPartition([[1, -2], [-1, 2]])
    assert entry_cumulant_for(pi, [1, 2], letters, gue) == 1
    assert entry_cumulant_for(pi, [1, 2], [Letter(1), Letter(2)], gue) == 0
    # same entry twice is E x_ab^2 = 0 for GUE
    same = SetPartition([[1, 2], [-1, -2]])
    assert entry_cumulant_for(same, [1, 2], letters, gue) == 0
    uni = EntryCumulantModel.wigner(UNIFORM)
    four = SetPartition([[1, 2, 3, 4], [-1, -2, -3, -4]])
    assert entry_cumulant_for(four, [1, 2, 3, 4], [Letter(1)] * 4, uni) == pytest.approx(-1 / 120)
    with pytest.raises(ShapeError):
        entry_cumulant_for(pi, [3], letters, gue)


def test_entry_model_contracts():
    with pytest.raises(ContractError):
        EntryCumulantModel.for_tag("wigner")
    model = EntryCumulantModel.wigner(UNIFORM, order=4)
    with pytest.raises(CompletenessError):
        model.offdiag(6)
    assert model.offdiag(3) == 0
    assert EntryCumulantModel.gue().offdiag(4, 2) == 0


@pytest.mark.parametrize("N", [2, 3, 4, 5])
def test_gue_tr_x2_cumulants(N):
    spec = monomial_spec([X1, X1])
    det = identity_set(N)
    gue = EntryCumulantModel.gue()
    assert exact_cumulant(1, spec, gue, det, N).value == pytest.approx(N, rel=1e-9)
    assert exact_cumulant(2, spec, gue, det, N).value == pytest.approx(gue_entry_cov_k2_trx2(N), rel=1e-9)
    assert exact_cumulant_gaussian(3, spec, det, N, "gue").value == pytest.approx(gue_entry_k3_trx2(N), rel=1e-9)


def test_odd_total_length_vanishes():
    gue = EntryCumulantModel.gue()
    det = identity_set(3)
    words = [monomial_spec([X1]).monomials[0], monomial_spec([X1, X1]).monomials[0]]
    assert mixed_cumulant(words, gue, det, 3) == 0
    assert exact_cumulant(1, monomial_spec([X1, X1, X1]), gue, det, 3).value == 0


@pytest.mark.parametrize("tag", ["gue", "goe"])
def test_gaussian_path_matches_general(tag):
    spec = PolynomialSpec.from_words([[X1, ["D", "A"], X1], (0.5, [X1, X1, X1])])
    model = EntryCumulantModel.for_tag(tag)
    for N in (2, 3):
        det = _detset("random-unit-norm:4", N)
        for r in (1, 2):
            general = exact_cumulant(r, spec, model, det, N).value
            fast = exact_cumulant_gaussian(r, spec, det, N, tag).value
            assert fast == pytest.approx(general, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize(
    "tag,words,N",
    [
        ("gue", [XD, XD], 2),
        ("goe", [[X1, X1, ["D", "A"]]], 3),
        ("wigner", [XD], 3),
        ("wigner", [[X1, X1], [X1, ["X", 2]]], 2),
        ("gue", [[X1, ["X", 1, "T"]]], 2),
    ],
)
def test_exact_matches_bruteforce_small(tag, words, N):
    spec = PolynomialSpec.from_words(words)
    model = EntryCumulantModel.for_tag(tag, UNIFORM)
    det = _detset("upper-bidiagonal-ones", N)
    for r in (1, 2):
        if r * spec.degree > 4:
            continue
        exact = exact_cumulant(r, spec, model, det, N).value
        oracle = bruteforce_cumulant_oracle(r, spec, model, det, N)
        assert exact == pytest.approx(oracle, rel=1e-9, abs=1e-12)


def test_guards():
    spec = monomial_spec([X1] * 4)
    with pytest.raises(SizeError):
        exact_cumulant(2, spec, EntryCumulantModel.gue(), identity_set(2), 2)
    with pytest.raises(SizeError):
        bruteforce_cumulant_oracle(2, spec, EntryCumulantModel.gue(), identity_set(4), 4)


def test_audit_ledger(tmp_path):
    spec = monomial_spec(XD)
    model = EntryCumulantModel.wigner(UNIFORM)
    det = _detset("upper-bidiagonal-ones", 4)
    res = exact_cumulant(2, spec, model, det, 4, audit=True)
    assert res.ledger and not res.audit_violations
    assert sum(row.contribution for row in res.ledger) == pytest.approx(res.value)
    res.write_audit_csv(tmp_path / "audit.csv")
    header = (tmp_path / "audit.csv").read_text().splitlines()[0]
    assert header.startswith("pi,tau,s0_re")


def test_wigner_trxd_k2_closed_form():
    # Var Tr(XD) = (s2/N) [sum_i D_ii^2 + sum_{i<j} (D_ij + D_ji)^2] = s2 (2N - 1) / N for bidiagonal ones
    s2 = Fraction(1, 12)
    for N in (3, 4):
        det = _detset("upper-bidiagonal-ones", N)
        val = exact_cumulant(2, monomial_spec(XD), EntryCumulantModel.wigner(UNIFORM), det, N).value
        expected = float(s2) * (N * 1 + (N - 1) * 1) / N
        assert val == pytest.approx(expected, rel=1e-12)


def test_corollary_bound_scalings():
    det = _detset("identity", 3)
    words = [monomial_spec([X1, X1]).monomials[0]] * 2
    power, bound = corollary_bound("gue", words, det)
    assert power == 0 and bound == pytest.approx(8)
    assert corollary_bound("goe", words, det)[1] == pytest.approx(32)
    power, _ = corollary_bound("wigner", words, det, EntryCumulantModel.wigner(UNIFORM))
    assert power == 0
    with pytest.raises(ContractError):
        corollary_bound("nope", words, det)


@pytest.mark.parametrize("tag", ["gue", "goe", "wigner"])
def test_verify_bounds_small_grid(tag):
    spec = PolynomialSpec.from_words([XD, [X1, X1]])
    model = EntryCumulantModel.for_tag(tag, UNIFORM)
    dets = {N: _detset("random-unit-norm:1", N) for N in (2, 3)}
    verdicts = verify_bounds(spec, model, dets, r_values=(1, 2), N_values=(2, 3))
    assert verdicts and all(v.passed for v in verdicts)
    if tag == "wigner":
        assert all(v.r >= 2 for v in verdicts)


def test_multilinearity_in_coefficients():
    N = 3
    det = _detset("upper-bidiagonal-ones", N)
    gue = EntryCumulantModel.gue()
    a = exact_cumulant(2, monomial_spec(XD), gue, det, N).value
    b = exact_cumulant(2, PolynomialSpec.from_words([(2.0, XD)]), gue, det, N).value
    assert b == pytest.approx(4 * a)
    # a constant term shifts K1 only
    shifted = PolynomialSpec.from_words([XD, (1.5, [["D", "A"]])])
    assert exact_cumulant(2, shifted, gue, det, N).value == pytest.approx(a)
    k1 = exact_cumulant(1, shifted, gue, det, N).value
    assert k1 == pytest.approx(1.5 * np.trace(det.matrix(("A",))))


def test_transposed_letter_gue():
    # E Tr(X X^T) = sum_ij E x_ij^2; for GUE only the N diagonal terms survive, each 1/N
    N = 4
    spec = monomial_spec([X1, ["X", 1, "T"]])
    val = exact_cumulant(1, spec, EntryCumulantModel.gue(), identity_set(N), N).value
    assert val == pytest.approx(1.0)
    assert spec.monomials[0].letters[1].transposed
