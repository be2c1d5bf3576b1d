"""Holomorphic Gauss parametrization of complex hypersurfaces with constant relative nullity."""

from .complex_linalg import (
    CSubspace,
    J,
    complex_span,
    invert,
    numerical_complex_rank,
    numerical_rank,
    orthogonal_complement,
    project,
    real_inner,
    reflect,
    subspace_distance,
)
from .errors import *  # noqa: F401,F403
from .gallery import CATALOG, affine_lift, check_expected, fixture, make_example, random_immersion
from .gauss_param import (
    AssembledHypersurface,
    FiberPoint,
    GaussFiber,
    assemble,
    cylinder_detect,
    gauss_bundle,
    parametrize,
    recover_base,
    recover_fiber,
    shape_from_base,
    shape_operator_oracle,
    singular_test,
    verify_roundtrip,
)
from .immersion import (
    Chart,
    ChartMap,
    FunctionMap,
    Monomial,
    ParametricImmersion,
    analyze_point,
    classify_holomorphy,
    first_normal,
    frame,
    relative_nullity,
    second_fundamental,
    verify_structural_identities,
)
from .involution import StarMap, conformality_check, star, star_class, verify_star_involution
from .kernels import BACKEND
from .projective import (
    ProjectivePoint,
    chart_lift,
    chordal_distance,
    cone,
    cp_parametrize,
    projectivize,
    totally_geodesic_test,
)
from .specio import dump_spec, immersion_from_dict, immersion_to_dict, load_spec

__version__ = "0.1.0"
