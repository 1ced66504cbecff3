"""weylkit: numerical curvature, compatibility and Petrov checks at points of a chart.

Metrics are given as expressions in coordinates; every quantity at a point is
computed from truncated Taylor jets of the metric, so derivatives are exact up
to floating-point rounding.
"""

__version__ = "0.1.0"

from .errors import (DegenerateMetricError, DomainError, EvalError, GeometryError, NoPotentialError, ParseError,
                     PreconditionError, SignatureError, SpecFileError, TensorError, WeylkitError)
from .expr import evaluate, eval_taylor, identifiers, parse, to_string
from .tensor import DenseTensor, MetricAt, contract, levi_civita, outer, raise_lower
from .geometry import (GeometryAt, MetricSpec, bianchi_residual, christoffel, commutator_residual,
                       compute_geometry, cov_deriv, metricity_residual, ricci_scalar, riemann,
                       riemann_symmetry_residual, sample_points, weyl, weyl_divergence_residual,
                       weyl_trace_residual)
from .compat import (CompatReport, SymmetricField, VectorField, bridge_identity_residual, codazzi_deviation,
                     compat_report, concircular_residual, d_tensor, derdzinski_shen_check, hall_conditions,
                     lovelock_residual, permutability_class, pureness_check, ricci_commutator_norm,
                     riemann_compat_residual, vector_compat_residual, weyl_compat_residual)
from .classify import (bel_debever, electric_magnetic, orthonormal_frame, petrov_type,
                       principal_null_directions)
from .constructs import (EmbeddingSpec, GeodesicMapSpec, geodesic_map_deform, hypersurface_compat_suite,
                         hypersurface_geometry, kulkarni_nomizu, solve_kn_potential)
from .catalog import catalog, names as catalog_names
from .specfile import dumps_spec, load_spec, loads_spec

__all__ = [name for name in dir() if not name.startswith("_")]
