import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polyinv.bounds import global_bound_C
from polyinv.inversion import Status, delta_sequence, invert, remainder
from polyinv.modcrt import (CrtAccumulator, CrtError, ModularWitness, PipelineStatus, Stability, crt_lift,
                            crt_merge, invert_mod_p, pipeline_invert_crt, reduce_map, select_primes,
                            stabilization_check)
from polyinv.poly import PolyMap, gens, shape_of
from polyinv.ring import GF, ZZ, is_prime

from _support import load, random_maps

CORPUS = ["pf_cubic_r3", "class8_r3", "cubic_quintic_r3"]


# -- reduction ----------------------------------------------------------------------

def test_reduce_matches_bundled_maps():
    assert reduce_map(load("cubic_quintic_r3"), 5) == load("cubic_quintic_r3_mod5").change_ring(GF(5))
    assert reduce_map(load("class8_r3"), 5) == load("class8_r3_mod5").change_ring(GF(5))
    assert reduce_map(load("class8_r3"), 7) == load("class8_r3_mod7").change_ring(GF(7))
    assert reduce_map(load("deg15"), 2) == load("deg15_mod2").change_ring(GF(2))


def test_reduce_balanced_and_drops_multiples():
    F5 = reduce_map(load("cubic_quintic_r3"), 5)
    assert F5[1].coefficient((3, 0, 0, 0)) == 2
    F7 = reduce_map(load("class8_r3"), 7)
    assert F7[2].coefficient((0, 2, 0, 1)) == 0  # 441 = 63 * 7


def test_reduce_large_prime_is_identity_on_coefficients():
    F = load("pf_cubic_r3")
    assert reduce_map(F, 101).change_ring(ZZ) == F


def test_reduce_errors():
    with pytest.raises(Exception):
        reduce_map(load("pf_cubic_r3"), 9)
    with pytest.raises(CrtError):
        reduce_map(load("pf_cubic"), 5)


# -- modular inverses ------------------------------------------------------------------

def test_invert_mod_5_matches_bundled_inverse():
    w = invert_mod_p(load("cubic_quintic_r3"), 5)
    assert w.inverse == load("cubic_quintic_r3_inverse_mod5").change_ring(GF(5))
    G2 = w.inverse[1]
    # the bundled map writes 3 for these; the balanced representative is -2
    assert (G2.coefficient((4, 0, 0, 1)) - 3) % 5 == 0 and (G2.coefficient((3, 0, 0, 2)) - 3) % 5 == 0
    assert G2.coefficient((4, 0, 0, 1)) == -2


def test_step_counts_can_drop_after_reduction():
    F = load("pf_cubic_r3")
    assert invert(F).steps == 14
    w = invert_mod_p(F, 2)
    assert w.status is Status.PASCAL_FINITE and w.stop_step == 5


def test_reduction_can_be_pascal_finite_or_not():
    F = load("class8_r3")
    assert invert_mod_p(F, 7).status is Status.PASCAL_FINITE
    assert invert_mod_p(F, 5).status is Status.INVERTIBLE_NOT_PF


def test_mu_recomputed_after_reduction():
    w = invert_mod_p(load("class8_r3"), 3)
    # every nonlinear coefficient is a multiple of 3
    assert w.mu == 1 and w.inverse.is_identity()


@pytest.mark.parametrize("name", CORPUS)
@pytest.mark.parametrize("p", [2, 3, 5, 7])
def test_reduction_commutes_with_delta(name, p):
    F = load(name)
    Fp = reduce_map(F, p)
    stop = invert(F).steps
    for i in range(F.nvars):
        for k, (P, V) in enumerate(zip(delta_sequence(F, i + 1), delta_sequence(Fp, i + 1))):
            if k > min(stop, 12):
                break
            assert P.change_ring(GF(p)) == V


@pytest.mark.parametrize("name", CORPUS)
@pytest.mark.parametrize("p", [2, 3, 5, 7, 11])
def test_reduction_of_inverse_is_modular_inverse(name, p):
    F = load(name)
    assert invert(F).inverse.change_ring(GF(p)) == invert_mod_p(F, p).inverse


def test_reduction_of_bundled_degree15_inverse():
    w = invert_mod_p(load("deg15"), 2)
    assert w.mu == 1099
    assert w.inverse == load("deg15_inverse").change_ring(GF(2))
    assert w.inverse == load("deg15_inverse_mod2").change_ring(GF(2))


def test_remainder_reduces():
    F = load("pf_cubic_r3")
    p = 5
    mu = 14
    G, R, P = remainder(F, mu)
    Gp, W, V = remainder(reduce_map(F, p), mu)
    assert R.change_ring(GF(p)) == W and P.change_ring(GF(p)) == V


def test_pascal_finite_reductions_stop_no_later():
    F = load("pf_cubic_r3")
    m = invert(F).steps
    for p in (2, 3, 5, 7, 11, 13):
        assert invert_mod_p(F, p).stop_step <= m


# -- primes and CRT ------------------------------------------------------------------------

def test_select_primes_smallest_first():
    assert select_primes(2).primes == (2, 3)
    assert select_primes(0).primes == (2,)
    sel = select_primes(10 ** 6)
    assert all(is_prime(p) for p in sel.primes) and len(set(sel.primes)) == len(sel.primes)
    prod = 1
    for p in sel.primes:
        prod *= p
    assert prod >= 2 * 10 ** 6 + 1 and prod // sel.primes[-1] < 2 * 10 ** 6 + 1


def test_select_primes_user_list():
    S = [29, 2, 3, 5, 7, 11, 13, 17, 19, 23]
    sel = select_primes(10, S)
    assert sel.primes == (2, 3, 5, 7, 11, 13, 17, 19, 23, 29) and sel.sufficient and not sel.warning
    sel = select_primes(10 ** 20, S)
    assert not sel.sufficient and "2C" in sel.warning
    with pytest.raises(CrtError):
        select_primes(10, [3, 3])


def test_select_primes_budget():
    rep = global_bound_C(shape_of(load("deg15")))
    sel = select_primes(rep, "smallest-first", max_primes=5)
    assert sel.primes == (2, 3, 5, 7, 11) and sel.warning


@pytest.mark.parametrize("residues, N, expected", [
    ([(-1, 5), (2, 7), (-2, 11)], 385, 9),
    ([(-2, 5), (-1, 7), (3, 11)], 385, -162),
    ([(2, 5), (2, 7), (-1, 11)], 385, 142),
    ([(2, 5), (2, 7), (-1, 11), (4, 13)], 5005, -243),
])
def test_crt_lift_table_values(residues, N, expected):
    assert crt_lift(residues) == (expected, N)


@settings(max_examples=100)
@given(st.lists(st.tuples(st.integers(-10 ** 9, 10 ** 9), st.sampled_from([2, 3, 5, 7, 11, 13, 29, 31, 101])),
                min_size=1, max_size=6, unique_by=lambda t: t[1]))
def test_crt_lift_correct(pairs):
    x, N = crt_lift(pairs)
    for a, p in pairs:
        assert (x - a) % p == 0
    assert 2 * abs(x) <= N


def _witness(p, G):
    return ModularWitness(p, G.change_ring(GF(p)), 1, Status.PASCAL_FINITE, 1)


def test_crt_merge_missing_monomial_is_zero():
    X1, X2 = gens(ZZ, 2)
    acc = CrtAccumulator.empty(2)
    acc = crt_merge(acc, _witness(5, PolyMap([X1, X2 + 5 * X1 ** 2])))  # X1^2 vanishes mod 5
    acc = crt_merge(acc, _witness(7, PolyMap([X1, X2 + 5 * X1 ** 2])))
    assert acc.N == 35 and acc.merged_primes == {5, 7}
    assert acc.residue(2, (2, 0)) == 5
    assert acc.lift() == PolyMap([X1, X2 + 5 * X1 ** 2])


def test_crt_merge_errors():
    X1, X2 = gens(ZZ, 2)
    G = PolyMap([X1, X2])
    acc = crt_merge(CrtAccumulator.empty(2), _witness(5, G))
    with pytest.raises(CrtError):
        crt_merge(acc, _witness(5, G))
    with pytest.raises(CrtError):
        crt_merge(acc, ModularWitness(7, None, 2, Status.NOT_INVERTIBLE, 2))


def _history(primes):
    F = load("cubic_quintic_r3")
    acc = CrtAccumulator.empty(4)
    out = []
    for p in primes:
        acc = crt_merge(acc, invert_mod_p(F, p))
        out.append(acc)
    return out


def test_coefficient_table_columns():
    h = _history([5, 7, 11, 13, 17])
    x4_3 = (0, 0, 0, 3)
    x1x4_4 = (1, 0, 0, 4)
    assert [s.residue(2, x4_3) for s in h[2:]] == [9, 9, 9]
    assert [s.residue(2, x1x4_4) for s in h[2:]] == [142, -243, -243]


def test_stabilization_states():
    h = _history([5, 7, 11, 13])
    res = stabilization_check(h[:3], None)
    assert res.kind is Stability.UNSTABLE
    assert (2, (1, 0, 0, 4)) in res.monomials
    assert (2, (0, 0, 0, 3)) not in res.monomials
    h = _history([5, 7, 11, 13, 17])
    assert stabilization_check(h, None).kind is Stability.STABLE
    tiny = global_bound_C(shape_of(PolyMap([gens(ZZ, 2)[0], gens(ZZ, 2)[1] + gens(ZZ, 2)[0] ** 2])))
    assert stabilization_check(h[:2], tiny).kind is Stability.CERTIFIED
    with pytest.raises(CrtError):
        stabilization_check(h[:1], None)


# -- pipeline ----------------------------------------------------------------------------

def test_pipeline_cubic_quintic():
    rep = pipeline_invert_crt(load("cubic_quintic_r3"), [5, 7, 11, 13, 17])
    assert rep.status is PipelineStatus.INVERTIBLE
    assert rep.inverse == load("cubic_quintic_r3_inverse")
    assert rep.inverse[1].coefficient((1, 0, 0, 4)) == -243
    assert rep.certified_by == "composition"


def test_pipeline_too_few_primes_is_inconclusive():
    rep = pipeline_invert_crt(load("cubic_quintic_r3"), [5, 7])
    assert rep.status is PipelineStatus.INCONCLUSIVE and rep.inverse is None


def test_pipeline_identity():
    F = PolyMap.identity(ZZ, 3)
    rep = pipeline_invert_crt(F, [2, 3])
    assert rep.status is PipelineStatus.INVERTIBLE and rep.inverse == F


def test_pipeline_rejects_non_invertible():
    X1, X2 = gens(ZZ, 2)
    rep = pipeline_invert_crt(PolyMap([X1 + X2 ** 2, X2 + X2 ** 2]), [3, 5])
    assert rep.status is PipelineStatus.NOT_INVERTIBLE and "not invertible" in rep.message


def test_pipeline_early_exit():
    rep = pipeline_invert_crt(load("cubic_quintic_r3"), [5, 7, 11, 13, 17, 19, 23], early_exit=True)
    assert rep.status is PipelineStatus.INVERTIBLE
    assert [w.p for w in rep.witnesses] == [5, 7, 11, 13, 17]


def test_pipeline_auto_certifies_small_bound():
    X1, X2 = gens(ZZ, 2)
    F = PolyMap([X1, X2 + 7 * X1 ** 2 - 3 * X1 ** 3])
    rep = pipeline_invert_crt(F, "auto")
    assert rep.status is PipelineStatus.INVERTIBLE and rep.certified_by == "bound and composition"
    assert rep.inverse == invert(F).inverse


def test_pipeline_deterministic_across_jobs():
    F = load("cubic_quintic_r3")
    a = pipeline_invert_crt(F, [5, 7, 11, 13, 17, 19, 23], jobs=1)
    b = pipeline_invert_crt(F, [23, 19, 17, 13, 11, 7, 5], jobs=3)
    assert a.inverse == b.inverse and a.trace_csv() == b.trace_csv()
    assert [w.p for w in a.witnesses] == [w.p for w in b.witnesses]


def test_report_and_trace_csv():
    rep = pipeline_invert_crt(load("cubic_quintic_r3"), [5, 7, 11, 13, 17])
    lines = rep.report_csv().splitlines()
    assert lines[0] == "prime,status,stop_step,seconds,peak_terms"
    assert lines[1].startswith("5,pascal-finite,")
    trace = rep.trace_csv([2]).splitlines()
    assert trace[0] == "coordinate,monomial,p_or_N,residue"
    assert "2,X1*X4^4,385,142" in trace and "2,X1*X4^4,5005,-243" in trace
    assert all(line.startswith("2,") for line in trace[1:])


def test_random_lifts_with_certified_modulus_equal_direct_inverse():
    certified = 0
    for F, _ in random_maps(11, 40, n=2, max_deg=3):
        rep = global_bound_C(shape_of(F))
        if rep.C is None or rep.C.bit_length() > 256:
            continue
        out = pipeline_invert_crt(F, "auto")
        assert out.status is PipelineStatus.INVERTIBLE
        assert out.inverse == invert(F).inverse
        if out.history:
            assert rep.certifies(out.N)
        certified += 1
    assert certified >= 10
