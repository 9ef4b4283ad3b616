"""Exact workbench for additive structure in finite abelian groups."""

from .errors import AALError
from .group import (
    Character,
    CharSet,
    GroupElement,
    GroupSpec,
    GSet,
    coset_decomposition,
    enumerate_elements,
    is_coset,
    parse_group,
    parse_set,
    subgroup_generated,
)
from .setops import (
    DensityMap,
    convolve,
    difference_set,
    doubling,
    energy,
    growth_profile,
    iterated_sumset,
    sumset,
    symmetry_set,
)
from .spectral import bohr_set, check_prop_containment, fourier, large_spectrum
from .progressions import ConvexBody, ConvexCosetProgression, ConvexProgression, bohr_to_progression, growth_order
from .structure import (
    bsg_extract,
    chang_growth_test,
    croot_sisask,
    katz_koester_iterate,
    lopez_ross_inner,
    pipeline,
    plunnecke_check,
)

__version__ = "0.1.0"
