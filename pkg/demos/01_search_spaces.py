"""
Defining and manipulating hyper-parameter search spaces
========================================================

A search space is an ordered set of named, typed dimensions. Everything the
optimizer does happens on the unit hyper-cube, so each dimension knows how to
map its values into [0, 1] and back.
"""
import numpy as np

from botune import (
    Dimension,
    IntegerRange,
    LowerUpperBound,
    RaiseLowerBound,
    RealLinear,
    RealLog,
    SearchSpace,
    apply_mutation,
    contains,
    decode,
    encode,
    sample_random,
)

# a CNN-flavored space: layer widths, dropout rates, learning rate
space = SearchSpace((
    Dimension("conv1_units", IntegerRange(16, 48), role="unit_count"),
    Dimension("conv2_units", IntegerRange(64, 128), role="unit_count"),
    Dimension("dropout", RealLinear(0.002, 0.3), role="dropout_rate"),
    Dimension("lr", RealLog(1e-5, 1e-1), role="learning_rate"),
))

rng = np.random.default_rng(0)
assignment = sample_random(space, rng)
print("random assignment:", assignment)
print("is contained?    ", contains(space, assignment))

# log dimensions are sampled and encoded uniformly in log10, so lr = 1e-3
# sits exactly in the middle of its unit interval
point = encode(space, {**assignment, "lr": 1e-3})
print("encoded point:   ", np.round(point, 4))
print("decoded back:    ", decode(space, point))

# tuning rules shrink spaces through mutations; shrinks never invert an
# interval (at least a quarter of it always survives)
smaller = apply_mutation(space, LowerUpperBound("lr", 1e-3))
smaller = apply_mutation(smaller, RaiseLowerBound("conv1_units", 32))
for dim in smaller.dimensions:
    print(f"  {dim.name:14s} {dim.domain}")

# every member of the shrunk space is a member of the original
for _ in range(1000):
    assert contains(space, sample_random(smaller, rng))
print("subset property holds over 1000 samples")
