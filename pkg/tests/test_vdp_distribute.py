import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lifeserver.vdp import (
    ExternalRef,
    Overflow,
    Split,
    UnresolvedNode,
    VdpChild,
    VdpDocument,
    build_attribution_vdp,
    distribute,
    split_amount,
)
from conftest import exact_leaf_shares, leaf_depths, payee, random_tree


def amounts_by_path(instructions):
    return {i.path: i.amount for i in instructions}


def test_example_tree_exact_fraction(fig_tree):
    # each contributor's exact share is 97% * 50% = 48.5%
    shares = dict((p, f) for p, f, _ in exact_leaf_shares(fig_tree.root))
    assert shares[("contributors", "ktorn")] == Fraction(97, 200)
    assert shares[("contributors", "marcoleong")] == Fraction(97, 200)
    assert shares[("operations",)] == Fraction(3, 100)


def test_example_tree_10000(fig_tree):
    out = amounts_by_path(distribute(fig_tree, 10000))
    assert out == {("contributors", "ktorn"): 4850,
                   ("contributors", "marcoleong"): 4850,
                   ("operations",): 300}


def test_example_tree_multiples_of_200_are_exact(fig_tree):
    for total in (200, 1000, 123400, 2**40 * 200):
        out = amounts_by_path(distribute(fig_tree, total))
        assert out[("contributors", "ktorn")] == total * 97 // 200
        assert out[("contributors", "marcoleong")] == total * 97 // 200


def test_single_payee():
    doc = VdpDocument(version=1, root=payee("solo"))
    (instr,) = distribute(doc, 777)
    assert instr.amount == 777
    assert instr.path == ()


def test_equal_thirds_tie_break():
    assert split_amount(100, [1, 1, 1]) == [34, 33, 33]
    assert split_amount(101, [1, 1, 1]) == [34, 34, 33]
    assert split_amount(1, [1, 1, 1]) == [1, 0, 0]


def test_largest_remainder_prefers_biggest_fraction():
    # shares 1:2 over 10 -> exact 10/3, 20/3 -> floors 3, 6; leftover to the
    # child with remainder 2/3 (the second)
    assert split_amount(10, [1, 2]) == [3, 7]


def test_declaration_order_changes_tie_allocation():
    a_first = VdpDocument(version=1, root=Split(children=(
        VdpChild(id="A", shares=1, node=payee("a")),
        VdpChild(id="B", shares=1, node=payee("b")))))
    b_first = VdpDocument(version=1, root=Split(children=(
        VdpChild(id="B", shares=1, node=payee("b")),
        VdpChild(id="A", shares=1, node=payee("a")))))
    assert amounts_by_path(distribute(a_first, 5))[("A",)] == 3
    assert amounts_by_path(distribute(b_first, 5))[("B",)] == 3


def test_zero_total(fig_tree):
    out = distribute(fig_tree, 0)
    assert [i.amount for i in out] == [0, 0, 0]


def test_unresolved_node_rejected():
    doc = VdpDocument(version=1, root=Split(children=(
        VdpChild(id="x", shares=1, node=ExternalRef(url="mem://x")),)))
    with pytest.raises(UnresolvedNode):
        distribute(doc, 10)


def test_overflow_guard(fig_tree):
    distribute(fig_tree, 2**63 - 1)
    with pytest.raises(Overflow):
        distribute(fig_tree, 2**63)


def test_scale_invariance(fig_tree):
    scaled = VdpDocument(version=1, root=Split(children=tuple(
        VdpChild(id=c.id, shares=c.shares * 13, node=c.node)
        for c in fig_tree.root.children)))
    for total in (1, 99, 10000, 123456789):
        assert distribute(fig_tree, total) == distribute(scaled, total)


@settings(max_examples=150, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), total=st.integers(0, 10**12))
def test_conservation_and_bounded_rounding(seed, total):
    tree = random_tree(random.Random(seed))
    instructions = distribute(tree, total)
    assert sum(i.amount for i in instructions) == total
    oracle = exact_leaf_shares(tree.root)
    depths = leaf_depths(tree.root)
    assert len(oracle) == len(instructions)
    for instr, (path, frac, _), depth in zip(instructions, oracle, depths):
        assert instr.path == path
        exact = frac * total
        assert abs(Fraction(instr.amount) - exact) <= depth


def test_determinism(fig_tree):
    assert distribute(fig_tree, 12345) == distribute(fig_tree, 12345)


def test_build_attribution():
    doc = build_attribution_vdp({"A": (3, payee("pa")), "B": (1, payee("pb"))})
    out = amounts_by_path(distribute(doc, 1000))
    assert out == {("A",): 750, ("B",): 250}


def test_build_attribution_single_source():
    doc = build_attribution_vdp({"A": (1, payee("pa"))})
    (instr,) = distribute(doc, 42)
    assert instr.amount == 42


def test_build_attribution_empty():
    from lifeserver.vdp import EmptyContributions
    with pytest.raises(EmptyContributions):
        build_attribution_vdp({})
