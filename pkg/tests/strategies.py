"""Shared hypothesis strategies and reference descriptors."""
from hypothesis import strategies as st

from cstar_powernorms import AlgebraDescriptor

REFERENCE_DESCRIPTORS = ((1,), (2,), (1, 1), (1, 1, 1), (2, 1))
COMMUTATIVE_DESCRIPTORS = ((1,), (1, 1), (1, 1, 1))
NONCOMMUTATIVE_DESCRIPTORS = ((2,), (2, 1))

descriptors = st.sampled_from(REFERENCE_DESCRIPTORS).map(AlgebraDescriptor)
commutative_descriptors = st.sampled_from(COMMUTATIVE_DESCRIPTORS).map(AlgebraDescriptor)
seeds = st.integers(min_value=0, max_value=2**31 - 1)
ranks = st.integers(min_value=1, max_value=3)
