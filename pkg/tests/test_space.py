import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from botune.errors import (
    DuplicateDimension,
    DimensionMismatch,
    InvalidMutation,
    InvalidSpace,
    OutOfDomain,
    UnknownDimension,
)
from botune.space import (
    AddDimension,
    Categorical,
    Dimension,
    IntegerRange,
    LowerUpperBound,
    RaiseLowerBound,
    RealLinear,
    RealLog,
    RemoveCategoricalMembers,
    SearchSpace,
    apply_mutation,
    contains,
    decode,
    domain_midpoint,
    encode,
    sample_random,
    snap_to_grid,
    space_from_dict,
    space_to_dict,
)


def make_space(*dims):
    return SearchSpace(tuple(dims))


@pytest.fixture
def paperlike_space():
    # the CNN-style 6-dim space used throughout: conv widths, dropouts, lr, batch
    return make_space(
        Dimension("conv1_units", IntegerRange(16, 48), role="unit_count"),
        Dimension("conv2_units", IntegerRange(64, 128), role="unit_count"),
        Dimension("drop1", RealLinear(0.002, 0.3), role="dropout_rate"),
        Dimension("drop2", RealLinear(0.03, 0.5), role="dropout_rate"),
        Dimension("fc_units", IntegerRange(256, 512), role="unit_count"),
        Dimension("lr", RealLog(1e-5, 1e-1), role="learning_rate"),
    )


class TestDomainsAndSpace:
    def test_real_interval_must_not_be_empty(self):
        with pytest.raises(InvalidSpace):
            RealLinear(1.0, 1.0)
        with pytest.raises(InvalidSpace):
            RealLog(0.1, 0.1)

    def test_log_interval_requires_positive_min(self):
        with pytest.raises(InvalidSpace):
            RealLog(0.0, 1.0)
        with pytest.raises(InvalidSpace):
            RealLog(-1.0, 1.0)

    def test_integer_singleton_allowed(self):
        assert IntegerRange(5, 5).min == 5

    def test_categorical_needs_distinct_labels(self):
        with pytest.raises(InvalidSpace):
            Categorical(())
        with pytest.raises(InvalidSpace):
            Categorical(("a", "a"))

    def test_duplicate_names_rejected(self):
        with pytest.raises(InvalidSpace):
            make_space(
                Dimension("x", RealLinear(0, 1)),
                Dimension("x", RealLinear(0, 2)),
            )

    def test_roundtrip_serialization(self, paperlike_space):
        assert space_from_dict(space_to_dict(paperlike_space)) == paperlike_space


class TestSampling:
    def test_singleton_domains_force_result(self):
        space = make_space(
            Dimension("act", Categorical(("relu",))),
            Dimension("n", IntegerRange(5, 5)),
        )
        assert sample_random(space, np.random.default_rng(0)) == {"act": "relu", "n": 5}

    def test_log_sample_stays_in_bounds(self, paperlike_space):
        rng = np.random.default_rng(1)
        for _ in range(200):
            v = sample_random(paperlike_space, rng)["lr"]
            assert 1e-5 <= v <= 1e-1

    def test_fixed_seed_is_deterministic(self):
        space = make_space(Dimension("x", RealLinear(0, 1)))
        a = sample_random(space, np.random.default_rng(42))
        b = sample_random(space, np.random.default_rng(42))
        assert a == b

    def test_empty_space_rejected(self):
        with pytest.raises(InvalidSpace):
            sample_random(make_space(), np.random.default_rng(0))

    def test_samples_always_contained(self, paperlike_space):
        rng = np.random.default_rng(7)
        for _ in range(500):
            assert contains(paperlike_space, sample_random(paperlike_space, rng))

    def test_log_sampling_uniform_in_log10(self):
        space = make_space(Dimension("lr", RealLog(1e-5, 1e-1)))
        rng = np.random.default_rng(3)
        vals = [math.log10(sample_random(space, rng)["lr"]) for _ in range(10_000)]
        assert abs(np.mean(vals) - (-3.0)) < 0.1


class TestContains:
    def test_in_domain(self):
        space = make_space(Dimension("lr", RealLog(1e-5, 1e-1)))
        assert contains(space, {"lr": 1e-3})

    def test_out_of_domain(self):
        space = make_space(Dimension("lr", RealLog(1e-5, 1e-1)))
        assert not contains(space, {"lr": 0.5})

    def test_missing_dimension(self, paperlike_space):
        assert not contains(paperlike_space, {"lr": 1e-3})

    def test_extra_dimension(self):
        space = make_space(Dimension("lr", RealLog(1e-5, 1e-1)))
        assert not contains(space, {"lr": 1e-3, "x": 1})

    def test_integer_rejects_fractional(self):
        space = make_space(Dimension("n", IntegerRange(1, 10)))
        assert not contains(space, {"n": 2.5})
        assert contains(space, {"n": 2.0})
        assert not contains(space, {"n": True})


class TestEncodeDecode:
    def test_log_midpoint(self):
        space = make_space(Dimension("lr", RealLog(1e-5, 1e-1)))
        assert encode(space, {"lr": 1e-3})[0] == pytest.approx(0.5, abs=1e-12)

    def test_linear_boundary(self):
        space = make_space(Dimension("x", RealLinear(0, 10)))
        assert encode(space, {"x": 0.0})[0] == 0.0

    def test_integer_midpoint_encode(self):
        space = make_space(Dimension("n", IntegerRange(16, 48)))
        assert encode(space, {"n": 32})[0] == pytest.approx(0.5)

    def test_integer_midpoint_decode(self):
        space = make_space(Dimension("n", IntegerRange(64, 128)))
        assert decode(space, [0.5]) == {"n": 96}

    def test_linear_lower_edge_decode(self):
        space = make_space(Dimension("x", RealLinear(2, 4)))
        assert decode(space, [0.0]) == {"x": 2.0}

    def test_categorical_decode(self):
        space = make_space(Dimension("c", Categorical(("a", "b"))))
        assert decode(space, [0.9]) == {"c": "b"}
        assert decode(space, [0.1]) == {"c": "a"}
        assert decode(space, [1.0]) == {"c": "b"}

    def test_singleton_integer_encodes_to_half(self):
        space = make_space(Dimension("n", IntegerRange(5, 5)))
        assert encode(space, {"n": 5})[0] == 0.5

    def test_encode_rejects_out_of_domain(self):
        space = make_space(Dimension("x", RealLinear(0, 1)))
        with pytest.raises(OutOfDomain):
            encode(space, {"x": 2.0})

    def test_decode_rejects_out_of_cube(self):
        space = make_space(Dimension("x", RealLinear(0, 1)))
        with pytest.raises(OutOfDomain):
            decode(space, [1.5])

    def test_decode_rejects_wrong_dimension(self, paperlike_space):
        with pytest.raises(DimensionMismatch):
            decode(paperlike_space, [0.5])

    @pytest.mark.parametrize("u", [0.0, 1.0])
    def test_decode_at_exact_boundaries_stays_contained(self, paperlike_space, u):
        a = decode(paperlike_space, [u] * len(paperlike_space))
        assert contains(paperlike_space, a)
        # the log map must not overshoot its bound by an ulp
        assert decode(
            make_space(Dimension("lr", RealLog(1e-4, 3.0))), [u]
        )["lr"] in (1e-4, 3.0)

    def test_roundtrip_on_samples(self, paperlike_space):
        rng = np.random.default_rng(11)
        for _ in range(100):
            a = sample_random(paperlike_space, rng)
            back = decode(paperlike_space, encode(paperlike_space, a))
            for name in ("conv1_units", "conv2_units", "fc_units"):
                assert back[name] == a[name]
            assert back["lr"] == pytest.approx(a["lr"], rel=1e-9)
            assert back["drop1"] == pytest.approx(a["drop1"], rel=1e-9)

    def test_snap_matches_encode_decode(self, paperlike_space):
        rng = np.random.default_rng(13)
        pts = rng.random((50, len(paperlike_space)))
        snapped = snap_to_grid(paperlike_space, pts)
        for row, snap_row in zip(pts, snapped):
            expect = encode(paperlike_space, decode(paperlike_space, row))
            np.testing.assert_allclose(snap_row, expect, atol=1e-12)


class TestMutations:
    def test_raise_lower_bound_integer(self):
        space = make_space(Dimension("conv1_units", IntegerRange(16, 48), role="unit_count"))
        out = apply_mutation(space, RaiseLowerBound("conv1_units", 32))
        assert out.dimension("conv1_units").domain == IntegerRange(32, 48)
        assert out.dimension("conv1_units").role == "unit_count"

    def test_lower_upper_bound_log(self):
        space = make_space(Dimension("lr", RealLog(1e-5, 1e-1)))
        out = apply_mutation(space, LowerUpperBound("lr", 1e-3))
        dom = out.dimension("lr").domain
        assert dom == RealLog(1e-5, 1e-3)

    def test_add_dimension_preserves_existing(self, paperlike_space):
        out = apply_mutation(paperlike_space, AddDimension("l2_lambda", RealLog(1e-6, 1e-1)))
        assert len(out) == len(paperlike_space) + 1
        assert out.dimensions[:-1] == paperlike_space.dimensions
        assert out.names[-1] == "l2_lambda"

    def test_add_duplicate_rejected(self, paperlike_space):
        with pytest.raises(DuplicateDimension):
            apply_mutation(paperlike_space, AddDimension("lr", RealLinear(0, 1)))

    def test_unknown_dimension_rejected(self, paperlike_space):
        with pytest.raises(UnknownDimension):
            apply_mutation(paperlike_space, RaiseLowerBound("nope", 1))

    def test_degenerate_raise_keeps_top_quarter(self):
        space = make_space(Dimension("x", RealLinear(0.0, 8.0)))
        out = apply_mutation(space, RaiseLowerBound("x", 100.0))
        assert out.dimension("x").domain == RealLinear(6.0, 8.0)

    def test_degenerate_lower_keeps_bottom_quarter_log(self):
        space = make_space(Dimension("lr", RealLog(1e-5, 1e-1)))
        out = apply_mutation(space, LowerUpperBound("lr", 1e-9))
        dom = out.dimension("lr").domain
        assert dom.min == 1e-5
        assert math.log10(dom.max) == pytest.approx(-4.0)

    def test_bound_change_never_expands(self):
        space = make_space(Dimension("x", RealLinear(2.0, 4.0)))
        out = apply_mutation(space, RaiseLowerBound("x", 0.0))
        assert out.dimension("x").domain == RealLinear(2.0, 4.0)

    def test_integer_degenerate_raise(self):
        space = make_space(Dimension("n", IntegerRange(47, 48)))
        out = apply_mutation(space, RaiseLowerBound("n", 48))
        assert out.dimension("n").domain == IntegerRange(47, 48)

    def test_remove_categorical_members(self):
        space = make_space(Dimension("act", Categorical(("relu", "tanh", "elu"))))
        out = apply_mutation(space, RemoveCategoricalMembers("act", ("tanh",)))
        assert out.dimension("act").domain == Categorical(("relu", "elu"))

    def test_remove_all_members_rejected(self):
        space = make_space(Dimension("act", Categorical(("relu",))))
        with pytest.raises(InvalidMutation):
            apply_mutation(space, RemoveCategoricalMembers("act", ("relu",)))

    def test_bound_change_on_categorical_rejected(self):
        space = make_space(Dimension("act", Categorical(("relu", "tanh"))))
        with pytest.raises(InvalidMutation):
            apply_mutation(space, RaiseLowerBound("act", 1))


class TestMidpoint:
    def test_arithmetic_for_linear(self):
        assert domain_midpoint(RealLinear(0.0, 1.0)) == 0.5

    def test_geometric_for_log(self):
        assert domain_midpoint(RealLog(1e-5, 1e-1)) == pytest.approx(1e-3)

    def test_integer_rounds_half_up(self):
        assert domain_midpoint(IntegerRange(16, 48)) == 32
        assert domain_midpoint(IntegerRange(47, 48)) == 48


# --- properties --------------------------------------------------------------

domain_st = st.one_of(
    st.tuples(
        st.floats(-100, 100, allow_nan=False), st.floats(-100, 100, allow_nan=False)
    )
    .filter(lambda t: t[0] < t[1])
    .map(lambda t: RealLinear(*t)),
    st.tuples(st.floats(1e-6, 1.0), st.floats(1.0001, 1e4)).map(lambda t: RealLog(*t)),
    st.tuples(st.integers(-50, 50), st.integers(0, 200)).map(
        lambda t: IntegerRange(t[0], t[0] + t[1])
    ),
    st.lists(st.sampled_from("abcdefgh"), min_size=1, max_size=6, unique=True).map(
        lambda ls: Categorical(tuple(ls))
    ),
)


@st.composite
def space_st(draw):
    n = draw(st.integers(1, 5))
    dims = tuple(Dimension(f"d{i}", draw(domain_st)) for i in range(n))
    return SearchSpace(dims)


@given(space_st(), st.integers(0, 2**32 - 1))
@settings(max_examples=200, deadline=None)
def test_property_samples_contained(space, seed):
    a = sample_random(space, np.random.default_rng(seed))
    assert contains(space, a)


@given(space_st(), st.integers(0, 2**32 - 1))
@settings(max_examples=200, deadline=None)
def test_property_decode_encode_roundtrip(space, seed):
    u = np.random.default_rng(seed).random(len(space))
    a = decode(space, u)
    assert contains(space, a)
    # decode∘encode is the identity on grid members; real coordinates
    # round-trip to float precision
    back = decode(space, encode(space, a))
    for d in space.dimensions:
        if isinstance(d.domain, (IntegerRange, Categorical)):
            assert back[d.name] == a[d.name]
        else:
            assert back[d.name] == pytest.approx(a[d.name], rel=1e-12, abs=1e-12)


@given(space_st(), st.integers(0, 2**32 - 1), st.data())
@settings(max_examples=200, deadline=None)
def test_property_shrinks_are_subsets(space, seed, data):
    rng = np.random.default_rng(seed)
    shrinkable = [
        d for d in space.dimensions if not isinstance(d.domain, Categorical)
    ]
    if not shrinkable:
        return
    dim = data.draw(st.sampled_from(shrinkable))
    lo = dim.domain.min
    hi = dim.domain.max
    target = data.draw(
        st.floats(min_value=float(lo), max_value=float(hi) + abs(float(hi) - float(lo)) + 10.0)
    )
    kind = data.draw(st.sampled_from([RaiseLowerBound, LowerUpperBound]))
    mutated = apply_mutation(space, kind(dim.name, target))
    new_dom = mutated.dimension(dim.name).domain
    assert new_dom.min >= lo and new_dom.max <= hi
    for _ in range(5):
        assert contains(space, sample_random(mutated, rng))
