"""Numerical exterior calculus on polyhedral chains and their rough limits.

The library provides the exterior algebra of k-vectors, oriented cells and
polyhedral chains with boundary / mass / Vec, certified flat and r-natural
norm brackets via diffchain decompositions, differential forms of class B^r
with adaptive integration, differential k-elements with the geometric Hodge
star, coboundary and Laplace operators, and a harness that verifies the
Star, Stokes, Gauss, Green, Laplace and distribution-derivative identities
on classical and fractal domains.
"""

from .exterior import (
    KDirection,
    KVector,
    frame_to_kvector,
    kvector_map,
    mass_kvector,
    star_direction,
    star_kvector,
    wedge,
)
from .chains import (
    Cube,
    PolyChain,
    Simplex,
    Support,
    boundary,
    canonicalize,
    mass_chain,
    refine_to_level,
    support_points,
    vec_chain,
    whitney_cubes,
)
from .forms import (
    FormField,
    Polynomial,
    QuadratureError,
    SmoothMap,
    box_form,
    delta_form,
    eval_form,
    exterior_derivative,
    form_norm,
    integrate_cell,
    integrate_chain,
    pullback,
    star_form,
    wedge_forms,
)
from .dictionary import calibration_form, named_form, oracle_forms, standard_dictionary
from .norms import (
    Decomposition,
    DiffCell,
    DiffChain,
    NormBracket,
    chains_equal,
    diffchain_mass,
    expand_diffchain,
    flat_upper,
    natural_bracket,
    natural_lower,
    natural_upper,
)
from .elements import (
    ChainletSeq,
    ElementTerm,
    ElementaryChain,
    boundary_chainlet,
    coboundary,
    cubeize,
    elementize,
    elementize_any,
    integrate_elementary,
    laplace,
    pushforward,
    qcube,
    star_chainlet,
    star_elementary,
)
from .harness import (
    ExperimentReport,
    convergence_rate,
    disk_seq,
    gen_cube_sequence,
    gen_disk,
    gen_koch,
    gen_weierstrass_subgraph,
    koch_seq,
    koch_step_region,
    named_chainlet,
    segments_pair_chain,
    unit_segment_chain,
    unit_square_chain,
    verify_distribution,
    verify_gauss,
    verify_green,
    verify_laplace,
    verify_star,
    verify_stokes,
    weierstrass_profile,
)

__version__ = "0.1.0"
