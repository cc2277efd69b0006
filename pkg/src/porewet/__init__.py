"""porewet: contact angle measurement and wettability mapping on segmented
three-phase voxel images."""

from .angles import (AngleMeasurement, ExtrapolationParams, PathStats,
                     SelectedFaces, clean_outliers, contact_angle,
                     extrapolate_normal, local_frame, measure_node,
                     measure_path, path_statistics, select_faces)
from .config import (OutlierConfig, PipelineConfig, SplineConfig, TaubinConfig,
                     apply_overrides, load_config)
from .errors import DimensionError, ParameterError, PorewetError
from .loops import (ContactPath, find_three_phase_vertices, smooth_contact_path,
                    trace_contact_paths)
from .meshing import (FF, SF, InterfacePair, OpenMeshWarning, TriangleMesh,
                      classify_interfaces, enclosed_volume, extract_isosurface,
                      mean_curvature, mean_curvature_summary, taubin_smooth)
from .pipeline import MeasureResult, PathResult, measure_volume
from .validate import (CaseResult, ValidationReport, run_all,
                       run_curvature_suite, run_flat_sweep, run_grain_cases,
                       separation_for_angle)
from .volume import (DEFENDING, INVADING, SOLID, ComponentMap, FlatFrame,
                     GrainFrame, LabeledVolume, PhantomSpec, connected_components,
                     dilate_mask, flat_frame, gen_flat_droplet, gen_grain_droplet,
                     gen_phantom, gen_solid_sphere, grain_contact_angle,
                     grain_frame, label_mask, remove_small_clusters)
from .wetmap import (MapParams, PathAngles, WettabilityField, assign_defending_transition,
                     assign_invading_objects, assign_uninvaded, build_field,
                     clip_field, field_histogram)

__version__ = "0.1.0"
