"""cusplab: classify magnetic vector potentials on conformally cusp ends and
verify the resulting spectral predictions (Weyl growth laws, essential-spectrum
thresholds, coupling-constant and Aharonov-Bohm effects, Mourre/Holder probes).

Exact rational arithmetic carries all topological data (fluxes, cohomology
classes, Gram matrices); binary floating point carries all spectral data. The
boundary between the two is the transverse module's conversion of rational
mode eigenvalues to floats.
"""

__version__ = "0.1.0"

from .model import (
    BoundaryComponent,
    ComponentPotential,
    ConfigError,
    Grid,
    ManifoldSpec,
    PotentialSpec,
    end_volume,
    parse_spec,
    radial_coordinate,
    serialize_spec,
)
from .topology import (
    CohomologyPresentation,
    FieldClass,
    Verdict,
    classify_field,
    classify_potential,
    coupling_group,
    smith_normal_form,
    surface_gauge_options,
    three_manifold_gauge,
)
from .transverse import ModeSpectrum, kernel_dimension, mode_spectrum, spectral_zeta
from .radial import (
    Perturbation,
    RadialConformal,
    RadialOperator,
    ShortRangePotential,
    assemble,
    counting_function,
    default_grid,
    eigenvalues_below,
    horn_ground_state,
    sturm_count,
    weighted_resolvent_norm,
)
from .analysis import (
    MourreProbeReport,
    WeylPrediction,
    coupling_scan,
    holder_probe,
    mourre_probe,
    threshold_estimate,
    weyl_constants,
    weyl_fit,
)
