"""Computable models of the electric Teichmüller space and curve complex of the torus."""

from .electric import ElectricSpace, MetricSample, PathTrace, build_electric, lc_length, quasigeodesic_fit
from .experiments import (ExperimentReport, LabConfig, Thresholds, boundary_map_audit, qi_audit,
                          ray_profile, segment_accumulation, separation_profile)
from .farey import (DisconnectedError, FareyParams, ball, farey_distance, geodesic_path,
                    neighbors)
from .foliation import GOLDEN, SQRT2, ContinuedFraction, FoliationVec, Slope, intersection
from .gromov import (convergence_at_infinity, delta_four_point, gromov_product,
                     narrow_polygon_check, product_distance_sandwich, quasi_isometry_fit)
from .net import BoxWindow, NetConfig, TubeWindow, build_net
from .teich import (BASEPOINT, TeichPoint, ThinRegion, extremal_length, hv_pair, ray,
                    teich_distance, thin_membership)

__version__ = "0.1.0"
