import json
from fractions import Fraction

import pytest

from cychom.connection import (HomotopyCertificate, StepFailed, check_nabla, defect,
                               make_nabla, tensor_connection, theorem_main_pipeline)
from cychom.dgalg import BUNDLED
from cychom.hochschild import NORMALIZED, UNNORMALIZED
from cychom.kunneth import Kunneth, mutated_sign_rule


def test_nabla_shape():
    a = BUNDLED["A4"]()
    A = make_nabla(a).A
    assert sorted({p for p, _, _ in A.terms}) == [-2, -1]
    coeffs = sorted((p, c) for p, c, _ in A.terms)
    assert coeffs == [(-2, Fraction(1, 2)), (-1, Fraction(-1, 2)), (-1, Fraction(1, 2))]


def test_nabla_on_bundled(bundled):
    for a in bundled.values():
        r = check_nabla(a, 5)
        assert r.passed and r.max_degree_checked == 5, r.to_json()
        assert len(r.sub_results) == 9


def test_nabla_on_random(random_corpus):
    for a in random_corpus:
        assert check_nabla(a, 5).passed


def test_nabla_needs_normalized_chains():
    # the Cartan relation for e + uE drops unit-in-tail terms, so the
    # unnormalized complex is not a valid setting for the axiom
    r = check_nabla(BUNDLED["A4"](), 4, UNNORMALIZED)
    assert not r.passed and r.witnesses
    assert r.sub_results["[gamma,B] = B"]


@pytest.mark.parametrize("pair", [("kdual", "kdual"), ("A4", "kdual"), ("clifford_d", "kodd")])
def test_pipeline(pair):
    a1, a2 = (BUNDLED[n]() for n in pair)
    rep = theorem_main_pipeline(a1, a2, max_degree=1)
    assert rep.passed, [s for s in rep.steps if s["passed"] is False]
    steps = {s["step"]: s["passed"] for s in rep.steps}
    assert steps["explicit homotopy certificate"] is True
    assert any(k.startswith("2u^2 defect") and v for k, v in steps.items())


def test_pipeline_with_solver_agrees():
    kd = BUNDLED["kdual"]()
    rep = theorem_main_pipeline(kd, kd, max_degree=1, solve=True)
    steps = {s["step"]: s["passed"] for s in rep.steps}
    assert steps["solved homotopy certificate"] is True
    assert steps["explicit minus solved homotopy has zero defect"] is True


def test_pipeline_skipped_solver_is_informational():
    rep = theorem_main_pipeline(BUNDLED["A4"](), BUNDLED["kdual"](), max_degree=1)
    steps = {s["step"]: s for s in rep.steps}
    assert steps["solved homotopy certificate"]["passed"] is None
    assert rep.passed


def test_certificate_round_trip_and_tamper():
    a1, a2 = BUNDLED["A4"](), BUNDLED["kdual"]()
    rep = theorem_main_pipeline(a1, a2, max_degree=1)
    cert = rep.certificates["explicit"]
    js = json.loads(json.dumps(cert.to_json()))
    again = HomotopyCertificate.from_json(js, cert.D_src, cert.D_tgt)
    assert again.recheck()[0]
    # corrupt one coefficient of h: the re-check must fail with a witness
    key = next(k for k, img in again.h.items() if img)
    img = dict(again.h[key])
    t = next(iter(img))
    img[t] = img[t] + 1
    again.h[key] = img
    ok, bad = again.recheck()
    assert not ok and bad


def test_pipeline_detects_mutation():
    a1, a2 = BUNDLED["A4"](), BUNDLED["kodd"]()
    with mutated_sign_rule("koszul_shift"):
        rep = theorem_main_pipeline(a1, a2, max_degree=1)
        assert not rep.passed
        with pytest.raises(StepFailed):
            theorem_main_pipeline(a1, a2, max_degree=1, raise_on_failure=True)


def test_defect_of_identity_connection_vanishes_on_k():
    k = BUNDLED["k"]()
    K = Kunneth(k, k, NORMALIZED)
    n = make_nabla(k)
    F = defect(K.psi(), tensor_connection(K, n, n), make_nabla(K.t))
    assert F({(0, ((0,), (0,))): 1}) == {}
