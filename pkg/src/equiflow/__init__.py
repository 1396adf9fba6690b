"""Equivariant vector Allen-Cahn minimizers on reflection-group symmetric domains."""

from .groups import (
    ClosureOverflow,
    ConeDecomposition,
    FoldDivergence,
    IsometryElement,
    NotInCone,
    ReflectionGroup,
    Subspace,
    UnknownCatalogName,
    Wall,
    catalog_group,
    catalog_group_names,
    cone_partition,
    fixed_subspace,
    generate_closure,
    orbit,
    root_system,
    stabilizer,
    stabilizer_indices,
)
from .homomorphisms import (
    BadParams,
    HomomorphismSpec,
    NegativeVerdict,
    NotAHomomorphism,
    NotDiscrete,
    PositivityCertificate,
    build_homomorphism,
    catalog_homomorphism,
    catalog_homomorphism_names,
    is_positive,
    lattice_acts_trivially,
)
from .potentials import Potential, check_hypotheses, count_minima, orbit_product_potential
from .regions import NotPositive, OutsideD, RegionSpec, build_regions, distance_to_boundary_D, project_onto_Phi_closure
from .solver import (
    BadSpacing,
    Blowup,
    Field,
    FileFormat,
    FlowConfig,
    FlowResult,
    Grid,
    NonMonotone,
    discretize,
    energy,
    init_field,
    make_problem,
    pde_residual,
    read_field_csv,
    rescale,
    run_flow,
    step,
    symmetrize,
    write_field_csv,
)
from .analysis import (
    DecayFit,
    TooFewSamples,
    copy_correspondence_check,
    decay_profile_and_fit,
    equivariance_residual,
    periodicity_check,
    positivity_violation,
)

__version__ = "0.1.0"
