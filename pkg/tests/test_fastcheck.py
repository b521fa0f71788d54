from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cychom.connection import check_nabla
from cychom.dgalg import (BUNDLED, DgAlgebra, algebra_from_json, algebra_to_json,
                          random_algebra)
from cychom.fastcheck import (CONNECTION_TERMS, check_mixed_complex, kernel_image,
                              kernel_supported, scan_terms)
from cychom.hochschild import (NORMALIZED, UNNORMALIZED, enumerate_basis, op_B, op_b,
                               op_b_delta, op_b_mu, op_E_delta, op_e_delta, op_gamma)

FLAVORS = (NORMALIZED, UNNORMALIZED)


def _python_ops(a, flavor):
    return {"b": op_b(a, flavor), "B": op_B(a, flavor), "b(delta)": op_b_delta(a, flavor),
            "b(mu)": op_b_mu(a, flavor), "e(delta)": op_e_delta(a, flavor),
            "E(delta)": op_E_delta(a, flavor), "gamma": op_gamma(a)}


def _assert_kernel_matches(a, max_n=3):
    for flavor in FLAVORS:
        ops = _python_ops(a, flavor)
        for n in range(max_n + 1):
            for key in enumerate_basis(a, n, flavor):
                for name, op in ops.items():
                    assert kernel_image(a, name, key, flavor) == op.image(key), (name, key)


def test_kernel_matches_python_on_bundled(bundled):
    for a in bundled.values():
        _assert_kernel_matches(a)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_kernel_matches_python_random(seed):
    _assert_kernel_matches(random_algebra(seed), max_n=2)


@pytest.mark.parametrize("flavor", FLAVORS)
def test_kernel_and_python_scans_agree(bundled, flavor):
    for a in bundled.values():
        fast = check_mixed_complex(a, 4, flavor, use_kernel=True)
        slow = check_mixed_complex(a, 4, flavor, use_kernel=False)
        for name in fast:
            assert fast[name]["ok"] and slow[name]["ok"]
            assert fast[name]["degrees"] == slow[name]["degrees"]


def test_kernel_finds_broken_axiom():
    # d(eps*xi) = eps breaks the Leibniz rule of A4, so b^2 = 0 fails
    data = algebra_to_json(BUNDLED["A4"]())
    data["diff"].append([3, 1, "1"])
    bad = algebra_from_json(data, check=False)
    fast = check_mixed_complex(bad, 3, NORMALIZED, use_kernel=True)
    slow = check_mixed_complex(bad, 3, NORMALIZED, use_kernel=False)
    assert not fast.ok and not slow.ok
    assert fast["b^2"]["witness"] == slow["b^2"]["witness"]


def test_non_integral_falls_back():
    a = BUNDLED["kdual"]()
    half = DgAlgebra("half", [0, 0], 0, [(0, 0, 0, 1), (0, 1, 1, 1), (1, 0, 1, 1),
                                         (1, 1, 1, Fraction(1, 2))], [])
    assert not half.is_integral() and not kernel_supported(half, 5)
    assert kernel_supported(a, 5)
    res = check_mixed_complex(half, 3, NORMALIZED)
    assert res.ok and not any(v["kernel"] for v in res.values())
    with pytest.raises(ValueError):
        check_mixed_complex(half, 3, NORMALIZED, use_kernel=True)


def test_scan_terms_counts_keys():
    a = BUNDLED["A4"]()
    count, bad = scan_terms(a, CONNECTION_TERMS["[gamma,B] = B"], 2, NORMALIZED)
    assert bad is None and count == len(enumerate_basis(a, 2, NORMALIZED))


@pytest.mark.parametrize("flavor", FLAVORS)
def test_connection_kernel_agrees_with_python(bundled, flavor):
    for a in bundled.values():
        fast = check_nabla(a, 4, flavor, use_kernel=True)
        slow = check_nabla(a, 4, flavor, use_kernel=False)
        assert fast.sub_results == slow.sub_results
        if slow.passed:
            assert fast.to_json() == slow.to_json()
