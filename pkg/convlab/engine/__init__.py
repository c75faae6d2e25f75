"""
convlab Engine

Computation engines of the convergence laboratory.

Layers:
1. Space - Windows, vectors, functionals, norms and dual norms
2. Linear Program - Exact rational linear programming on cdd
3. Convex Sets - Set variants and exact membership
4. Geometry Engine - Distances, gaps, support values, separation
5. Tail - Trace fitting and limit judgement
6. Convergence Engine - Wijsman, gap, slice and Mosco checks
7. Kadec Engine - Dual-norm probes and renorming
8. Certificate Engine - Certificates and separating constructions
"""

from convlab.engine.space import (
    DualBallDescription,
    Functional,
    NormFamily,
    NormSpec,
    Surd,
    Vector,
    Window,
    dual_norm_eval,
    norm_eval,
    norm_metric_rho,
    predual_norm_from_dual_ball,
)

from convlab.engine.linear_program import LinearProgram, LPResult, LPStatus, Sense

from convlab.engine.convex_sets import (
    CompactFamily,
    ConvexSet,
    Direction,
    Epigraph,
    Halfspace,
    Hyperplane,
    Intersection,
    MinkowskiSum,
    NormBall,
    PolyFunc,
    Polytope,
    SubspaceSlice,
    contains,
    is_empty,
)

from convlab.engine.geometry_engine import (
    GeometryEngine,
    Projection,
    Separation,
    coercivity_margin,
    distance,
    distance_subgradient,
    epigraph_build,
    gap,
    nearest_point,
    separate,
    support_value,
)

from convlab.engine.sequences import (
    FamilyKind,
    FunctionalSequence,
    SetSequence,
    TestFamily,
    VectorSequence,
)

from convlab.engine.convergence_engine import (
    ConvergenceEngine,
    ConvergenceVerdict,
    Notion,
    VerdictStatus,
    gap_convergence_check,
    level_set_wijsman_criterion,
    mosco_check,
    mosco_selection_check,
    upper_gap_check,
    wijsman_check,
)

from convlab.engine.kadec_engine import (
    ProbeProperty,
    ProbeReport,
    ProbeStatus,
    PropertyStarWitness,
    build_slab_renorm,
    level_set_mosco_witness,
    probe_lur,
    probe_w_star_kadec,
    probe_w_star_tau_kadec,
    property_star_check,
)

from convlab.engine.certificate_engine import (
    CertificateMode,
    SeparationInstance,
    SliceCertificate,
    construct_separating_sequence,
    exhaust_hyperplane,
    verify_certificate,
    verify_wijsman_certificate,
)


__all__ = [
    # Space
    'DualBallDescription',
    'Functional',
    'NormFamily',
    'NormSpec',
    'Surd',
    'Vector',
    'Window',
    'dual_norm_eval',
    'norm_eval',
    'norm_metric_rho',
    'predual_norm_from_dual_ball',

    # Linear programs
    'LinearProgram',
    'LPResult',
    'LPStatus',
    'Sense',

    # Convex sets
    'CompactFamily',
    'ConvexSet',
    'Direction',
    'Epigraph',
    'Halfspace',
    'Hyperplane',
    'Intersection',
    'MinkowskiSum',
    'NormBall',
    'PolyFunc',
    'Polytope',
    'SubspaceSlice',
    'contains',
    'is_empty',

    # Geometry
    'GeometryEngine',
    'Projection',
    'Separation',
    'coercivity_margin',
    'distance',
    'distance_subgradient',
    'epigraph_build',
    'gap',
    'nearest_point',
    'separate',
    'support_value',

    # Sequences
    'FamilyKind',
    'FunctionalSequence',
    'SetSequence',
    'TestFamily',
    'VectorSequence',

    # Convergence
    'ConvergenceEngine',
    'ConvergenceVerdict',
    'Notion',
    'VerdictStatus',
    'gap_convergence_check',
    'level_set_wijsman_criterion',
    'mosco_check',
    'mosco_selection_check',
    'upper_gap_check',
    'wijsman_check',

    # Kadec probes
    'ProbeProperty',
    'ProbeReport',
    'ProbeStatus',
    'PropertyStarWitness',
    'build_slab_renorm',
    'level_set_mosco_witness',
    'probe_lur',
    'probe_w_star_kadec',
    'probe_w_star_tau_kadec',
    'property_star_check',

    # Certificates
    'CertificateMode',
    'SeparationInstance',
    'SliceCertificate',
    'construct_separating_sequence',
    'exhaust_hyperplane',
    'verify_certificate',
    'verify_wijsman_certificate',
]
